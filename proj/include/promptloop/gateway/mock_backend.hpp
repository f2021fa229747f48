#pragma once

#include <atomic>
#include <climits>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "promptloop/gateway/backend.hpp"

namespace promptloop::gateway {

/// One scripted rule: matches on role and on substrings of system + user text,
/// answering with a literal response or a named family behaviour. Behaviours
/// may decline a request, in which case matching continues with the next rule.
struct MockRule {
    std::optional<Role> role;
    std::vector<std::string> contains;
    std::optional<std::string> response;
    std::optional<std::string> behavior;

    bool catch_all() const noexcept { return !role && contains.empty() && response.has_value(); }
};

/// Items at difficulty in [min_difficulty, max_difficulty] are answered wrongly
/// unless the prompt contains `clause`. Hidden clauses are never recommended.
struct ClauseRequirement {
    std::string clause;
    int min_difficulty = 1;
    int max_difficulty = INT_MAX;
    bool hidden = false;
};

/// Items in range are answered wrongly when the prompt contains `clause`
/// but not `remedy`.
struct ClauseConflict {
    std::string clause;
    int min_difficulty = 1;
    int max_difficulty = INT_MAX;
    std::string remedy;
};

/// Voter `voter` (1-based) rejects items at `difficulty`; restricted to the
/// listed generation attempts when `attempts` is set.
struct VoteRejection {
    int difficulty = 1;
    int voter = 1;
    std::optional<std::vector<int>> attempts;
};

/// Behaviour knobs of a scripted model family.
///
/// Generated items carry `[difficulty: d] [answer: y] [attempt: a]` markers in
/// their input, which is how the family's evaluator knows the right answer.
/// The marker strings below must match the shipped templates.
struct MockFamily {
    std::string wrong_answer = "unknown";
    std::string answer_style = "plain";  // plain | word-and-numeral | answer-tag
    std::string topic = "scenario";
    std::vector<ClauseRequirement> requirements;
    std::vector<ClauseConflict> conflicts;
    std::vector<int> garble_difficulties;
    std::vector<int> corrupt_geometry_difficulties;
    std::vector<VoteRejection> vote_rejections;

    std::string difficulty_marker = "current difficulty level: ";
    std::string target_marker = "Target label for the new item: ";
    std::string reference_marker = "Reference SVG path: ";
    std::string cue_marker = "Theme to build on: ";
    std::string prompt_begin = "Current prompt: ";
    std::string recommend_prompt_end = "\nGenerated error analysis: ";
    std::string refine_prompt_end = "\nRefinement recommendation: ";
    std::string recommendation_begin = "Refinement recommendation: ";
    std::string recommendation_end = "\n\nTasks:";
};

struct MockScript {
    std::string name = "mock";
    std::vector<MockRule> rules;
    MockFamily family;

    /// Throws ConfigError on unknown keys' values, unknown behaviours or a
    /// rule list whose last rule is not a literal catch-all.
    static MockScript from_json(const nlohmann::json& j);
    static MockScript load(const std::filesystem::path& path);
    void validate() const;
};

/// Deterministic scripted model: the response is a pure function of the request.
class MockBackend final : public Backend {
public:
    explicit MockBackend(MockScript script);

    std::string id() const override { return "mock:" + script_.name; }
    ModelResponse complete(const ModelRequest& request) override;

    const MockScript& script() const noexcept { return script_; }
    std::size_t calls() const noexcept { return calls_.load(); }

private:
    MockScript script_;
    std::atomic<std::size_t> calls_{0};
};

/// Text helpers used by the family behaviours, exposed for tests.
namespace mock_markers {
std::optional<int> difficulty(std::string_view text);
std::optional<std::string> answer(std::string_view text);
std::optional<int> attempt(std::string_view text);
std::vector<int> all_difficulties(std::string_view text);
std::string item_markers(int difficulty, std::string_view answer, int attempt);
}  // namespace mock_markers

}  // namespace promptloop::gateway
