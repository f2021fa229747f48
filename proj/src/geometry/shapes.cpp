#include "promptloop/geometry/shapes.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "promptloop/core/text.hpp"
#include "promptloop/errors.hpp"

namespace promptloop::geometry {

namespace {

Point end_point(const PathCommand& c) {
    if (auto* m = std::get_if<MoveTo>(&c)) return m->p;
    if (auto* l = std::get_if<LineTo>(&c)) return l->p;
    if (auto* a = std::get_if<ArcTo>(&c)) return a->p;
    return {};
}

Point* end_point_ref(PathCommand& c) {
    if (auto* m = std::get_if<MoveTo>(&c)) return &m->p;
    if (auto* l = std::get_if<LineTo>(&c)) return &l->p;
    if (auto* a = std::get_if<ArcTo>(&c)) return &a->p;
    return nullptr;
}

std::string label_from_stem(std::string stem) {
    auto us = stem.rfind('_');
    if (us != std::string::npos && us + 1 < stem.size() &&
        std::all_of(stem.begin() + static_cast<long>(us) + 1, stem.end(),
                    [](unsigned char c) { return std::isdigit(c); }))
        stem.erase(us);
    return core::text::lower(stem);
}

}  // namespace

CommandCounts count_segments(const PathCommandList& path) {
    CommandCounts n;
    Point start, current;
    for (const auto& c : path.commands) {
        if (std::holds_alternative<MoveTo>(c)) {
            start = current = end_point(c);
        } else if (std::holds_alternative<LineTo>(c)) {
            ++n.lines;
            current = end_point(c);
        } else if (std::holds_alternative<ArcTo>(c)) {
            ++n.arcs;
            current = end_point(c);
        } else {
            if (!(current == start)) ++n.lines;
            current = start;
        }
    }
    return n;
}

ShapeRuleTable::ShapeRuleTable(std::vector<ShapeRule> rules) : rules_(std::move(rules)) {
    for (const auto& r : rules_) labels_.insert(r.labels.begin(), r.labels.end());
}

const ShapeRuleTable& ShapeRuleTable::standard() {
    static const ShapeRuleTable table({
        {2, 0, 0, {"line"}},
        {3, 0, 0, {"triangle"}},
        {4, 0, 0, {"rectangle", "kite"}},
        {5, 0, 0, {"pentagon"}},
        {6, 0, 0, {"hexagon"}},
        {7, 0, 0, {"heptagon"}},
        {8, 0, 0, {"octagon"}},
        {std::nullopt, 1, 1, {"sector"}},
        {std::nullopt, 2, SIZE_MAX, {"circle"}},
    });
    return table;
}

LabelSet ShapeRuleTable::lookup(CommandCounts counts) const {
    LabelSet out;
    for (const auto& r : rules_) {
        if (r.lines && *r.lines != counts.lines) continue;
        if (counts.arcs < r.arcs_min || counts.arcs > r.arcs_max) continue;
        out.insert(r.labels.begin(), r.labels.end());
    }
    return out;
}

LabelSet infer_labels(const PathCommandList& path, const ShapeRuleTable& table) {
    return table.lookup(count_segments(path));
}

std::string_view to_string(RejectReason r) {
    switch (r) {
    case RejectReason::none: return "none";
    case RejectReason::malformed: return "malformed";
    case RejectReason::count_mismatch: return "count_mismatch";
    case RejectReason::out_of_table: return "out_of_table";
    }
    return "none";
}

CheckResult reverse_check(std::string_view d, const std::string& target, const ShapeRuleTable& table) {
    auto label = core::text::lower(core::text::trim(target));
    if (!table.contains(label))
        return {false, RejectReason::out_of_table, "label '" + label + "' has no counting rule"};
    PathCommandList path;
    try {
        path = normalize_precision(parse_path(d));
    } catch (const ParseError& e) {
        return {false, RejectReason::malformed, e.what()};
    }
    auto counts = count_segments(path);
    auto labels = table.lookup(counts);
    if (labels.count(label)) return {true, RejectReason::none, {}};
    return {false, RejectReason::count_mismatch,
            std::to_string(counts.lines) + " L, " + std::to_string(counts.arcs) + " A does not give '" +
                label + "'"};
}

TemplateLibrary TemplateLibrary::load(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw ConfigError("template library not found: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    TemplateLibrary lib;
    for (const auto& f : files) {
        std::ifstream in(f);
        std::string line;
        std::size_t n = 0;
        while (std::getline(in, line)) {
            ++n;
            auto t = core::text::trim(line);
            if (t.empty() || t.front() == '#') continue;
            try {
                lib.add(label_from_stem(f.stem().string()), parse_path(t));
            } catch (const ParseError& e) {
                throw ConfigError(f.string() + ":" + std::to_string(n) + ": " + e.what());
            }
        }
    }
    if (lib.empty()) throw ConfigError("template library " + dir.string() + " is empty");
    return lib;
}

void TemplateLibrary::add(const std::string& label, PathCommandList path) {
    entries_[label].push_back(std::move(path));
}

PathCommandList retrieve_template(const std::string& target, const TemplateLibrary& library, core::Rng& rng,
                                  double fraction, const ShapeRuleTable& table) {
    auto label = core::text::lower(core::text::trim(target));
    std::vector<const PathCommandList*> candidates;
    if (auto it = library.entries().find(label); it != library.entries().end())
        for (const auto& p : it->second) candidates.push_back(&p);
    if (candidates.empty())
        for (const auto& [name, paths] : library.entries())
            for (const auto& p : paths)
                if (infer_labels(p, table).count(label)) candidates.push_back(&p);
    if (candidates.empty()) throw ConfigError("no geometry template matches '" + label + "'");

    PathCommandList out = *candidates[core::uniform_index(rng, candidates.size())];

    std::vector<Point> vertices;
    for (const auto& c : out.commands) {
        if (std::holds_alternative<ClosePath>(c)) continue;
        auto p = end_point(c);
        if (std::find(vertices.begin(), vertices.end(), p) == vertices.end()) vertices.push_back(p);
    }
    double min_x = vertices.front().x, max_x = min_x, min_y = vertices.front().y, max_y = min_y;
    for (const auto& v : vertices) {
        min_x = std::min(min_x, v.x);
        max_x = std::max(max_x, v.x);
        min_y = std::min(min_y, v.y);
        max_y = std::max(max_y, v.y);
    }
    const double bound = fraction * std::max(max_x - min_x, max_y - min_y);
    std::vector<Point> moved;
    moved.reserve(vertices.size());
    for (const auto& v : vertices)
        moved.push_back({v.x + core::uniform(rng, -bound, bound), v.y + core::uniform(rng, -bound, bound)});

    for (auto& c : out.commands) {
        if (auto* p = end_point_ref(c)) {
            auto idx = static_cast<std::size_t>(std::find(vertices.begin(), vertices.end(), *p) - vertices.begin());
            *p = moved[idx];
        }
    }
    return normalize_precision(out);
}

}  // namespace promptloop::geometry
