#include "promptloop/core/template.hpp"

#include <fstream>
#include <sstream>

#include "promptloop/core/text.hpp"
#include "promptloop/errors.hpp"

namespace promptloop::core {

namespace {

constexpr std::size_t kMaxSlotName = 64;

bool slot_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == ' ' || c == '_' || c == '-';
}

// Calls on_text/on_slot for each literal run and each {slot} in `body`.
template <typename TextFn, typename SlotFn>
void scan(std::string_view body, TextFn on_text, SlotFn on_slot) {
    std::size_t i = 0;
    while (i < body.size()) {
        const auto open = body.find('{', i);
        if (open == std::string_view::npos) {
            on_text(body.substr(i));
            return;
        }
        const auto close = body.find('}', open + 1);
        bool is_slot = close != std::string_view::npos && close > open + 1 &&
                       close - open - 1 <= kMaxSlotName;
        if (is_slot)
            for (std::size_t k = open + 1; k < close; ++k)
                if (!slot_char(body[k])) is_slot = false;
        if (!is_slot) {
            on_text(body.substr(i, open + 1 - i));
            i = open + 1;
            continue;
        }
        on_text(body.substr(i, open - i));
        on_slot(body.substr(open + 1, close - open - 1), body.substr(open, close - open + 1));
        i = close + 1;
    }
}

std::string render_part(std::string_view body, const SlotMap& slots) {
    std::string out;
    out.reserve(body.size());
    scan(
        body, [&](std::string_view t) { out.append(t); },
        [&](std::string_view name, std::string_view literal) {
            auto it = slots.find(name);
            if (it != slots.end())
                out.append(it->second);
            else
                out.append(literal);
        });
    return out;
}

}  // namespace

PromptTemplate PromptTemplate::parse(std::string_view raw, std::string name) {
    PromptTemplate t;
    t.name_ = std::move(name);
    std::string* target = &t.user_;
    for (auto line : text::split_lines(raw)) {
        const auto trimmed = text::trim(line);
        if (trimmed == "[System]") {
            target = &t.system_;
            continue;
        }
        if (trimmed == "[User]") {
            target = &t.user_;
            continue;
        }
        target->append(line);
        target->push_back('\n');
    }
    t.system_ = std::string(text::trim(t.system_));
    t.user_ = std::string(text::trim(t.user_));
    return t;
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read template " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.filename().string());
}

std::set<std::string> PromptTemplate::placeholders() const {
    std::set<std::string> names;
    auto collect = [&](std::string_view body) {
        scan(
            body, [](std::string_view) {},
            [&](std::string_view name, std::string_view) { names.emplace(name); });
    };
    collect(system_);
    collect(user_);
    return names;
}

bool PromptTemplate::has_slot(std::string_view slot) const {
    return placeholders().count(std::string(slot)) > 0;
}

void PromptTemplate::require(std::initializer_list<std::string_view> slots) const {
    const auto have = placeholders();
    for (auto s : slots)
        if (!have.count(std::string(s)))
            throw ConfigError("template " + name_ + " lacks required slot {" + std::string(s) +
                              "}");
}

RenderedPrompt PromptTemplate::render(const SlotMap& slots) const {
    return {render_part(system_, slots), render_part(user_, slots)};
}

}  // namespace promptloop::core
