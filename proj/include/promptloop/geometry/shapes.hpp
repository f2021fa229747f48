#pragma once

#include <climits>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "promptloop/core/random.hpp"
#include "promptloop/geometry/path.hpp"

namespace promptloop::geometry {

using LabelSet = std::set<std::string>;

/// Segment tally used by the rule table. A closing Z counts as one line
/// segment when it draws one, i.e. when the current point differs from the
/// subpath start.
struct CommandCounts {
    std::size_t lines = 0;
    std::size_t arcs = 0;
};

CommandCounts count_segments(const PathCommandList& path);

struct ShapeRule {
    std::optional<std::size_t> lines;  // nullopt matches any line count
    std::size_t arcs_min = 0;
    std::size_t arcs_max = 0;
    LabelSet labels;
};

class ShapeRuleTable {
public:
    explicit ShapeRuleTable(std::vector<ShapeRule> rules);

    /// 2 L line, 3 L triangle, 4 L rectangle or kite, 5..8 L pentagon to
    /// octagon, 1 A sector, 2+ A circle. Arc rules apply regardless of the
    /// line count, so a wedge drawn with two radii and one arc is a sector.
    static const ShapeRuleTable& standard();

    LabelSet lookup(CommandCounts counts) const;
    const LabelSet& label_space() const noexcept { return labels_; }
    bool contains(const std::string& label) const { return labels_.count(label) > 0; }

private:
    std::vector<ShapeRule> rules_;
    LabelSet labels_;
};

/// Empty when no rule matches.
LabelSet infer_labels(const PathCommandList& path, const ShapeRuleTable& table = ShapeRuleTable::standard());

enum class RejectReason { none, malformed, count_mismatch, out_of_table };

std::string_view to_string(RejectReason r);

struct CheckResult {
    bool accepted = false;
    RejectReason reason = RejectReason::none;
    std::string detail;
};

/// Accepts iff `target` is among the labels inferred from the normalized path.
/// A target outside the table's label space is rejected as out_of_table.
CheckResult reverse_check(std::string_view d, const std::string& target,
                          const ShapeRuleTable& table = ShapeRuleTable::standard());

/// Template paths keyed by label, loaded from `<label>.txt` or `<label>_N.txt`
/// files holding one path per non-empty line.
class TemplateLibrary {
public:
    static TemplateLibrary load(const std::filesystem::path& dir);

    void add(const std::string& label, PathCommandList path);
    const std::map<std::string, std::vector<PathCommandList>>& entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }

private:
    std::map<std::string, std::vector<PathCommandList>> entries_;
};

/// Picks a template for `target` and moves each distinct vertex by a uniform
/// offset within +-fraction of the larger bounding-box side. Command letters
/// and counts are preserved; the result is normalized. Throws ConfigError when
/// no template matches the target.
PathCommandList retrieve_template(const std::string& target, const TemplateLibrary& library,
                                  core::Rng& rng, double fraction = 0.1,
                                  const ShapeRuleTable& table = ShapeRuleTable::standard());

}  // namespace promptloop::geometry
