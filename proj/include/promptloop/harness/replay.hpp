#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "promptloop/core/types.hpp"
#include "promptloop/harness/runlog.hpp"

namespace promptloop::harness {

struct InvariantResult {
    std::string name;
    bool passed = true;
    std::string detail;
};

struct LevelScore {
    int level = 0;
    std::string prompt_digest;
    core::Score score;
    bool accepted = false;
};

struct ReplayReport {
    std::vector<InvariantResult> invariants;
    /// Score history re-derived from the events.
    std::vector<LevelScore> history;

    bool passed() const;
    const InvariantResult* find(const std::string& name) const;
};

/// Re-derives the run's claims from its events and checks them:
/// payload-digests, transcript-continuity, accepted-after-global-confirmation,
/// accepted-scores-perfect, monotone-accepted-scores, budget-compliance,
/// score-history, final-prompt-argmax, label-first and
/// termination-consistency.
///
/// Throws ReplayError for an empty or truncated log (no final terminated
/// event) or sequence numbers that do not strictly increase.
ReplayReport replay(const std::vector<LogEvent>& events);
ReplayReport replay_file(const std::filesystem::path& path);

}  // namespace promptloop::harness
