#pragma once

#include <string>
#include <string_view>
#include <vector>

// Small string helpers shared across modules.
namespace promptloop::core::text {

std::string_view trim(std::string_view s) noexcept;
std::string lower(std::string_view s);
std::vector<std::string_view> split_lines(std::string_view s);
bool contains(std::string_view haystack, std::string_view needle) noexcept;
/// Case-insensitive (ASCII) find; npos when absent.
std::size_t ifind(std::string_view haystack, std::string_view needle, std::size_t from = 0) noexcept;
bool istarts_with(std::string_view s, std::string_view prefix) noexcept;
/// Text between `begin` and the next `end` after it (or end of input when
/// `end` is empty or missing). Empty optional-like result signalled by npos.
std::string_view between(std::string_view s, std::string_view begin, std::string_view end,
                         bool* found = nullptr) noexcept;
std::string replace_all(std::string s, std::string_view from, std::string_view to);
std::size_t count_words(std::string_view s) noexcept;
/// Shortest decimal text that round-trips `v`.
std::string format_double(double v);

}  // namespace promptloop::core::text
