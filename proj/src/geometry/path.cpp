#include "promptloop/geometry/path.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>

#include "promptloop/core/text.hpp"
#include "promptloop/errors.hpp"

namespace promptloop::geometry {

namespace {

template <class T>
std::size_t count_of(const PathCommandList& p) {
    std::size_t n = 0;
    for (const auto& c : p.commands) n += std::holds_alternative<T>(c) ? 1 : 0;
    return n;
}

class Lexer {
public:
    explicit Lexer(std::string_view s) : s_(s) {}

    void skip_separators() {
        while (pos_ < s_.size() && (std::isspace(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == ','))
            ++pos_;
    }

    bool at_end() {
        skip_separators();
        return pos_ >= s_.size();
    }

    bool at_number() {
        skip_separators();
        if (pos_ >= s_.size()) return false;
        char c = s_[pos_];
        return std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.';
    }

    char command() {
        skip_separators();
        char c = s_[pos_];
        if (!std::isalpha(static_cast<unsigned char>(c)))
            throw ParseError("expected a command letter at offset " + std::to_string(pos_));
        ++pos_;
        return c;
    }

    double number() {
        skip_separators();
        if (pos_ >= s_.size()) throw ParseError("malformed number: unexpected end of path data");
        auto begin = s_.data() + pos_;
        auto end = s_.data() + s_.size();
        if (*begin == '+') ++begin;
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc{} || !std::isfinite(v))
            throw ParseError("malformed number at offset " + std::to_string(pos_));
        pos_ = static_cast<std::size_t>(ptr - s_.data());
        return v;
    }

    bool flag() {
        double v = number();
        if (v != 0.0 && v != 1.0) throw ParseError("arc flag must be 0 or 1");
        return v == 1.0;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
};

std::string num(double v) { return core::text::format_double(v == 0.0 ? 0.0 : v); }

}  // namespace

std::size_t PathCommandList::count_lines() const noexcept { return count_of<LineTo>(*this); }
std::size_t PathCommandList::count_arcs() const noexcept { return count_of<ArcTo>(*this); }
std::size_t PathCommandList::count_closes() const noexcept { return count_of<ClosePath>(*this); }

char letter(const PathCommand& c) noexcept {
    static constexpr std::array<char, 4> letters = {'M', 'L', 'A', 'Z'};
    return letters[c.index()];
}

PathCommandList parse_path(std::string_view d) {
    Lexer lex(d);
    if (lex.at_end()) throw ParseError("empty path data");
    PathCommandList out;
    while (!lex.at_end()) {
        char c = lex.command();
        if (out.commands.empty() && c != 'M') throw ParseError("path data must start with M");
        switch (c) {
        case 'M': {
            Point p{lex.number(), lex.number()};
            out.commands.emplace_back(MoveTo{p});
            // extra coordinate pairs after M are implicit line segments
            while (lex.at_number()) out.commands.emplace_back(LineTo{{lex.number(), lex.number()}});
            break;
        }
        case 'L':
            do {
                out.commands.emplace_back(LineTo{{lex.number(), lex.number()}});
            } while (lex.at_number());
            break;
        case 'A':
            do {
                ArcTo a;
                a.rx = lex.number();
                a.ry = lex.number();
                a.rotation = lex.number();
                a.large_arc = lex.flag();
                a.sweep = lex.flag();
                a.p = {lex.number(), lex.number()};
                out.commands.emplace_back(a);
            } while (lex.at_number());
            break;
        case 'Z':
            out.commands.emplace_back(ClosePath{});
            break;
        default:
            throw ParseError(std::string("unknown command '") + c + "'");
        }
    }
    return out;
}

std::string to_string(const PathCommandList& path) {
    std::string out;
    for (const auto& c : path.commands) {
        if (!out.empty()) out += ' ';
        out += letter(c);
        std::visit(
            [&](const auto& cmd) {
                using T = std::decay_t<decltype(cmd)>;
                if constexpr (std::is_same_v<T, MoveTo> || std::is_same_v<T, LineTo>) {
                    out += ' ' + num(cmd.p.x) + ',' + num(cmd.p.y);
                } else if constexpr (std::is_same_v<T, ArcTo>) {
                    out += ' ' + num(cmd.rx) + ',' + num(cmd.ry) + ' ' + num(cmd.rotation) + ' ' +
                           (cmd.large_arc ? '1' : '0') + ',' + (cmd.sweep ? '1' : '0') + ' ' +
                           num(cmd.p.x) + ',' + num(cmd.p.y);
                }
            },
            c);
    }
    return out;
}

double round2(double v) {
    if (!std::isfinite(v)) return v;
    std::array<char, 512> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), std::fabs(v), std::chars_format::fixed);
    if (ec != std::errc{}) return v;
    std::string s(buf.data(), end);
    auto dot = s.find('.');
    if (dot == std::string::npos || s.size() - dot - 1 <= 2) return v;

    bool up = s[dot + 3] >= '5';
    std::string digits = s.substr(0, dot) + s.substr(dot + 1, 2);
    if (up) {
        int i = static_cast<int>(digits.size()) - 1;
        while (i >= 0 && digits[i] == '9') digits[i--] = '0';
        if (i < 0) digits.insert(digits.begin(), '1');
        else ++digits[i];
    }
    std::string fixed = digits.substr(0, digits.size() - 2) + "." + digits.substr(digits.size() - 2);
    double r = std::strtod(fixed.c_str(), nullptr);
    return std::signbit(v) && r != 0.0 ? -r : r;
}

PathCommandList normalize_precision(const PathCommandList& path) {
    PathCommandList out;
    out.commands.reserve(path.commands.size());
    for (const auto& c : path.commands) {
        std::visit(
            [&](auto cmd) {
                using T = std::decay_t<decltype(cmd)>;
                if constexpr (std::is_same_v<T, MoveTo> || std::is_same_v<T, LineTo>) {
                    cmd.p = {round2(cmd.p.x), round2(cmd.p.y)};
                } else if constexpr (std::is_same_v<T, ArcTo>) {
                    cmd.rx = round2(cmd.rx);
                    cmd.ry = round2(cmd.ry);
                    cmd.rotation = round2(cmd.rotation);
                    cmd.p = {round2(cmd.p.x), round2(cmd.p.y)};
                }
                out.commands.emplace_back(cmd);
            },
            c);
    }
    return out;
}

}  // namespace promptloop::geometry
