#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "promptloop/core/types.hpp"

namespace promptloop::harness {

/// Everything shipped for one task under `<data>/tasks/<id>/`.
struct TaskBundle {
    core::TaskSpec spec;
    std::vector<core::LabeledExample> seeds;
    std::string initial_prompt;
    std::filesystem::path dir;
    /// mock.json when present.
    std::optional<std::filesystem::path> mock_script;
};

core::TaskSpec parse_task_spec(const nlohmann::json& j);

/// Loads task.json, seeds.jsonl and initial_prompt.txt and validates the
/// seeds against the label space. Throws ConfigError.
TaskBundle load_task(const std::filesystem::path& data_dir, const std::string& id);

/// Template file `name` from the task directory when it overrides the shared
/// one, else from `template_dir`.
std::filesystem::path resolve_template(const TaskBundle& task, const std::filesystem::path& template_dir,
                                       const std::string& name);

}  // namespace promptloop::harness
