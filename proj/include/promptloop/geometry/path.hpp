#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace promptloop::geometry {

struct Point {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
};

struct MoveTo {
    Point p;
    friend bool operator==(const MoveTo&, const MoveTo&) = default;
};
struct LineTo {
    Point p;
    friend bool operator==(const LineTo&, const LineTo&) = default;
};
struct ArcTo {
    double rx = 0.0;
    double ry = 0.0;
    double rotation = 0.0;
    bool large_arc = false;
    bool sweep = false;
    Point p;
    friend bool operator==(const ArcTo&, const ArcTo&) = default;
};
struct ClosePath {
    friend bool operator==(const ClosePath&, const ClosePath&) = default;
};

using PathCommand = std::variant<MoveTo, LineTo, ArcTo, ClosePath>;

/// Absolute M/L/A/Z path. The first command is always M.
struct PathCommandList {
    std::vector<PathCommand> commands;

    std::size_t count_lines() const noexcept;
    std::size_t count_arcs() const noexcept;
    std::size_t count_closes() const noexcept;
    friend bool operator==(const PathCommandList&, const PathCommandList&) = default;
};

char letter(const PathCommand& c) noexcept;

/// Parses the uppercase {M, L, A, Z} subset of SVG path data. Numbers may be
/// separated by whitespace or commas; a command letter may be followed by
/// several coordinate groups. Throws ParseError.
PathCommandList parse_path(std::string_view d);

/// Prints as "M x,y L x,y A rx,ry rot large,sweep x,y Z" with shortest
/// round-trip numbers, so parse(to_string(p)) == p.
std::string to_string(const PathCommandList& path);

/// Rounds half away from zero to two decimals, working from the shortest
/// decimal form of the value so 1.005 rounds to 1.01.
double round2(double v);

/// Rounds every coordinate, radius and rotation with round2. Idempotent.
PathCommandList normalize_precision(const PathCommandList& path);

}  // namespace promptloop::geometry
