#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "promptloop/gateway/backend.hpp"
#include "promptloop/harness/report.hpp"
#include "promptloop/optimizer/optimizer.hpp"

namespace promptloop::harness {

/// Process exit codes of `run`. Disjoint by construction.
enum ExitCode : int {
    exit_coverage = 0,
    exit_budget = 2,
    exit_cap = 3,
    exit_config = 4,
    exit_transport = 5,
};

int exit_code_for(optimizer::Termination t) noexcept;

struct RunConfig {
    std::string task;
    std::string backend = "mock";  // mock | http
    std::optional<int> difficulty_max;
    /// M; defaults to the difficulty maximum (one level per difficulty).
    std::optional<int> budget;
    /// T_max; 0 or unset selects budget * (local_retry_cap + 1).
    std::optional<int> tmax;
    int local_retry_cap = 3;
    std::uint64_t seed = 0;
    std::optional<bool> voters;
    std::optional<bool> geometry;
    bool include_seeds_in_global = false;
    std::size_t eval_workers = 1;
    std::filesystem::path data_dir;
    /// Defaults to <data_dir>/templates.
    std::optional<std::filesystem::path> template_dir;
    /// Defaults to the task's mock.json.
    std::optional<std::filesystem::path> mock_script;
    /// Defaults to <data_dir>/geometry_templates.
    std::optional<std::filesystem::path> geometry_dir;
    std::optional<std::filesystem::path> cache_dir;
    std::filesystem::path out_dir;
    BoundOptions bound;
};

struct RunOutcome {
    int exit_code = exit_config;
    std::string message;
    std::optional<optimizer::OptimizationResult> result;
    std::string run_id;
    std::size_t transcript_size = 0;
};

/// Validates the whole configuration, then writes runlog.jsonl,
/// transcript.jsonl, synthetic.jsonl, final_prompt.txt, report.json and
/// summary.json into `out_dir`. A configuration error leaves no artifacts.
/// `backend_override` replaces the configured backend (used by tests).
RunOutcome run(const RunConfig& config, std::shared_ptr<gateway::Backend> backend_override = nullptr);

}  // namespace promptloop::harness
