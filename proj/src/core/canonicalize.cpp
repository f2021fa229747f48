#include "promptloop/core/canonicalize.hpp"

#include <array>
#include <cctype>
#include <optional>

#include "promptloop/core/text.hpp"

namespace promptloop::core {

namespace {

bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }
bool is_alpha(char c) noexcept { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_blank(char c) noexcept { return c == ' ' || c == '\t'; }

std::string case_fold_trim(std::string_view raw) {
    std::string_view line;
    for (auto l : text::split_lines(raw)) {
        l = text::trim(l);
        if (!l.empty()) {
            line = l;
            break;
        }
    }
    std::string out;
    out.reserve(line.size());
    bool pending_space = false;
    for (char c : line) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.empty()) out.push_back(' ');
        pending_space = false;
        out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
    }
    while (!out.empty() && (out.back() == '.' || out.back() == '!' || out.back() == ' '))
        out.pop_back();
    return out;
}

constexpr std::array<std::string_view, 20> kUnits = {
    "zero",    "one",     "two",       "three",    "four",     "five",    "six",
    "seven",   "eight",   "nine",      "ten",      "eleven",   "twelve",  "thirteen",
    "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen"};
constexpr std::array<std::string_view, 8> kTens = {"twenty", "thirty",  "forty",  "fifty",
                                                   "sixty",  "seventy", "eighty", "ninety"};

std::optional<int> unit_value(std::string_view word) {
    for (std::size_t i = 0; i < kUnits.size(); ++i)
        if (word == kUnits[i]) return static_cast<int>(i);
    return std::nullopt;
}

std::optional<int> tens_value(std::string_view word) {
    for (std::size_t i = 0; i < kTens.size(); ++i)
        if (word == kTens[i]) return static_cast<int>(20 + 10 * i);
    return std::nullopt;
}

bool is_number_word(std::string_view word) {
    return unit_value(word).has_value() || tens_value(word).has_value();
}

struct Token {
    std::size_t begin;
    std::string word;  // lowercased
};

std::vector<Token> alpha_tokens(std::string_view s) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        if (!is_alpha(s[i])) {
            ++i;
            continue;
        }
        const auto b = i;
        while (i < s.size() && is_alpha(s[i])) ++i;
        tokens.push_back({b, text::lower(s.substr(b, i - b))});
    }
    return tokens;
}

std::string strip_leading_zeros(std::string_view digits) {
    while (digits.size() > 1 && digits.front() == '0') digits.remove_prefix(1);
    return std::string(digits);
}

std::string word_and_numeral(std::string_view raw) {
    // "<number word>, <digits>" pairs first.
    std::optional<std::string_view> first_run;
    for (std::size_t i = 0; i < raw.size();) {
        if (!is_digit(raw[i])) {
            ++i;
            continue;
        }
        const auto b = i;
        while (i < raw.size() && is_digit(raw[i])) ++i;
        const auto run = raw.substr(b, i - b);
        if (!first_run) first_run = run;

        std::size_t j = b;
        while (j > 0 && is_blank(raw[j - 1])) --j;
        if (j == 0 || raw[j - 1] != ',') continue;
        --j;
        while (j > 0 && is_blank(raw[j - 1])) --j;
        std::size_t k = j;
        while (k > 0 && is_alpha(raw[k - 1])) --k;
        if (k < j && is_number_word(text::lower(raw.substr(k, j - k))))
            return strip_leading_zeros(run);
    }
    if (first_run) return strip_leading_zeros(*first_run);

    const auto tokens = alpha_tokens(raw);
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        if (auto u = unit_value(tokens[t].word)) return std::to_string(*u);
        if (auto tens = tens_value(tokens[t].word)) {
            int value = *tens;
            if (t + 1 < tokens.size()) {
                const auto gap_begin = tokens[t].begin + tokens[t].word.size();
                const auto gap = raw.substr(gap_begin, tokens[t + 1].begin - gap_begin);
                const bool joined = gap == "-" || gap == " ";
                auto u = unit_value(tokens[t + 1].word);
                if (joined && u && *u >= 1 && *u <= 9) value += *u;
            }
            return std::to_string(value);
        }
    }
    return case_fold_trim(raw);
}

std::string letter_or_text(std::string_view raw) {
    auto c = case_fold_trim(raw);
    auto letter = [](char ch) { return ch >= 'a' && ch <= 'z'; };
    if (c.size() == 1 && letter(c[0])) return c;
    if (c.size() == 2 && letter(c[0]) && (c[1] == ')' || c[1] == ':')) return c.substr(0, 1);
    if (c.size() >= 3 && c[0] == '(' && letter(c[1]) && c[2] == ')' &&
        (c.size() == 3 || c[3] == ' '))
        return c.substr(1, 1);
    return c;
}

std::string mc_letter(std::string_view raw) {
    constexpr std::string_view open = "<answer>";
    constexpr std::string_view close = "</answer>";
    const auto b = text::ifind(raw, open);
    if (b != std::string_view::npos) {
        const auto start = b + open.size();
        const auto e = text::ifind(raw, close, start);
        if (e != std::string_view::npos) return letter_or_text(raw.substr(start, e - start));
    }
    return letter_or_text(raw);
}

}  // namespace

std::string canonicalize_answer(std::string_view raw, AnswerFormat rule) {
    switch (rule) {
    case AnswerFormat::exact: return std::string(raw);
    case AnswerFormat::case_fold_trim: return case_fold_trim(raw);
    case AnswerFormat::word_and_numeral: return word_and_numeral(raw);
    case AnswerFormat::mc_letter: return mc_letter(raw);
    }
    return std::string(raw);
}

std::string canonicalize_answer(std::string_view raw, std::string_view rule_id) {
    return canonicalize_answer(raw, parse_answer_format(rule_id));
}

}  // namespace promptloop::core
