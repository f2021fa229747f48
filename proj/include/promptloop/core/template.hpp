#pragma once

#include <filesystem>
#include <initializer_list>
#include <map>
#include <set>
#include <string>
#include <string_view>

namespace promptloop::core {

using SlotMap = std::map<std::string, std::string, std::less<>>;

struct RenderedPrompt {
    std::string system;
    std::string user;
};

/// A two-part (system/user) prompt with named `{slot name}` placeholders.
///
/// File layout: an optional `[System]` line opens the system part and a
/// `[User]` line opens the user part; a file without markers is all user text.
/// Rendering is a single pass, so slot values are never re-scanned, and braces
/// that do not name a provided slot are left untouched.
class PromptTemplate {
public:
    static PromptTemplate parse(std::string_view text, std::string name = "inline");
    /// Throws ConfigError when the file is missing or unreadable.
    static PromptTemplate load(const std::filesystem::path& path);

    const std::string& name() const noexcept { return name_; }
    std::set<std::string> placeholders() const;
    bool has_slot(std::string_view slot) const;
    /// Throws ConfigError naming the first slot the template lacks.
    void require(std::initializer_list<std::string_view> slots) const;

    RenderedPrompt render(const SlotMap& slots) const;

private:
    std::string name_;
    std::string system_;
    std::string user_;
};

}  // namespace promptloop::core
