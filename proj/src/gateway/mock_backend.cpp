#include "promptloop/gateway/mock_backend.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "promptloop/core/text.hpp"
#include "promptloop/errors.hpp"

namespace promptloop::gateway {

namespace text = core::text;
using nlohmann::json;

namespace mock_markers {

namespace {
std::optional<int> int_after(std::string_view s, std::string_view key, std::size_t from = 0) {
    auto pos = s.find(key, from);
    if (pos == std::string_view::npos) return std::nullopt;
    pos += key.size();
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + s.size(), value);
    if (ec != std::errc{}) return std::nullopt;
    return value;
}
}  // namespace

std::optional<int> difficulty(std::string_view s) { return int_after(s, "[difficulty: "); }
std::optional<int> attempt(std::string_view s) { return int_after(s, "[attempt: "); }

std::optional<std::string> answer(std::string_view s) {
    bool found = false;
    auto v = text::between(s, "[answer: ", "]", &found);
    if (!found) return std::nullopt;
    return std::string(v);
}

std::vector<int> all_difficulties(std::string_view s) {
    std::vector<int> out;
    constexpr std::string_view key = "[difficulty: ";
    for (auto pos = s.find(key); pos != std::string_view::npos; pos = s.find(key, pos + 1))
        if (auto d = int_after(s, key, pos)) out.push_back(*d);
    return out;
}

std::string item_markers(int d, std::string_view answer, int attempt) {
    std::ostringstream os;
    os << "[difficulty: " << d << "] [answer: " << answer << "] [attempt: " << attempt << "]";
    return os.str();
}

}  // namespace mock_markers

namespace {

constexpr std::array<std::string_view, 7> kBehaviors = {
    "family-generate", "family-answer", "family-vote", "family-summarize",
    "family-analyze", "family-recommend", "family-refine"};

bool in_range(int d, int lo, int hi) { return d >= lo && d <= hi; }

std::size_t count_occurrences(std::string_view s, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = s.find(needle); pos != std::string_view::npos; pos = s.find(needle, pos + 1)) ++n;
    return n;
}

std::string line_after(std::string_view s, std::string_view key, bool* found) {
    auto v = text::between(s, key, "\n", found);
    return std::string(text::trim(v));
}

struct Fix {
    std::string clause;
    bool hidden = false;
};

std::vector<Fix> missing_fixes(const MockFamily& f, std::string_view prompt, int d) {
    std::vector<Fix> out;
    for (const auto& r : f.requirements)
        if (in_range(d, r.min_difficulty, r.max_difficulty) && !text::contains(prompt, r.clause))
            out.push_back({r.clause, r.hidden});
    for (const auto& c : f.conflicts)
        if (in_range(d, c.min_difficulty, c.max_difficulty) && text::contains(prompt, c.clause) &&
            !text::contains(prompt, c.remedy))
            out.push_back({c.remedy, false});
    return out;
}

const char* kNumberWords[] = {"zero",    "one",     "two",       "three",    "four",
                              "five",    "six",     "seven",     "eight",    "nine",
                              "ten",     "eleven",  "twelve",    "thirteen", "fourteen",
                              "fifteen", "sixteen", "seventeen", "eighteen", "nineteen"};
const char* kTens[] = {"", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"};

std::string number_word(int n) {
    if (n < 20) return kNumberWords[n];
    std::string w = kTens[n / 10];
    if (n % 10) w += std::string("-") + kNumberWords[n % 10];
    return w;
}

std::string styled(const MockFamily& f, const std::string& answer) {
    if (f.answer_style == "answer-tag") return "<answer>" + answer + "</answer>";
    if (f.answer_style == "word-and-numeral") {
        int n = -1;
        auto [ptr, ec] = std::from_chars(answer.data(), answer.data() + answer.size(), n);
        if (ec == std::errc{} && ptr == answer.data() + answer.size() && n >= 0 && n < 100)
            return number_word(n) + ", " + answer;
    }
    return answer;
}

bool listed(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

std::string drop_last_line_to(std::string path) {
    auto pos = path.rfind(" L ");
    if (pos == std::string::npos) return path;
    auto next = path.find_first_of("LAZ", pos + 3);
    path.erase(pos, next == std::string::npos ? std::string::npos : next - pos - 1);
    return path;
}

class Behaviors {
public:
    explicit Behaviors(const MockFamily& f) : f_(f) {}

    std::optional<std::string> run(std::string_view name, const ModelRequest& r) const {
        if (name == "family-generate") return generate(r);
        if (name == "family-answer") return answer(r);
        if (name == "family-vote") return vote(r);
        if (name == "family-summarize") return summarize(r);
        if (name == "family-analyze") return analyze(r);
        if (name == "family-recommend") return recommend(r);
        if (name == "family-refine") return refine(r);
        return std::nullopt;
    }

private:
    std::optional<std::string> generate(const ModelRequest& r) const {
        bool has_d = false, has_t = false;
        auto d_text = line_after(r.user, f_.difficulty_marker, &has_d);
        auto target = line_after(r.user, f_.target_marker, &has_t);
        if (!has_d || !has_t || target.empty()) return std::nullopt;
        int d = 0;
        if (std::from_chars(d_text.data(), d_text.data() + d_text.size(), d).ec != std::errc{})
            return std::nullopt;

        auto rejections = static_cast<int>(count_occurrences(r.user, "Previous attempt was rejected"));
        auto format_notes = static_cast<int>(count_occurrences(r.user, "could not be parsed"));
        int attempt = rejections + format_notes;
        if (format_notes == 0 && listed(f_.garble_difficulties, d))
            return "I would rather describe the idea informally this time.";

        auto markers = mock_markers::item_markers(d, target, attempt);
        bool has_ref = false;
        auto ref = line_after(r.user, f_.reference_marker, &has_ref);
        std::string question;
        if (has_ref && !ref.empty()) {
            if (rejections == 0 && listed(f_.corrupt_geometry_difficulties, d)) ref = drop_last_line_to(ref);
            question = "This SVG path element <path d=\"" + ref + "\"/> draws a shape. " + markers;
        } else {
            bool has_cue = false;
            auto cue = line_after(r.user, f_.cue_marker, &has_cue);
            question = "A " + f_.topic + " with " + std::to_string(d) + " reasoning turns. " + markers;
            if (has_cue && !cue.empty()) question += " Builds on: " + cue;
        }
        return "Question: " + question + "\nAnswer: " + target;
    }

    std::optional<std::string> answer(const ModelRequest& r) const {
        auto d = mock_markers::difficulty(r.user);
        auto y = mock_markers::answer(r.user);
        if (!d || !y) return std::nullopt;
        bool ok = missing_fixes(f_, r.system, *d).empty();
        return styled(f_, ok ? *y : f_.wrong_answer);
    }

    std::optional<std::string> vote(const ModelRequest& r) const {
        auto d = mock_markers::difficulty(r.user);
        if (!d) return std::nullopt;
        int attempt = mock_markers::attempt(r.user).value_or(0);
        int voter = 0;
        auto pos = text::ifind(r.system, "reviewer ");
        if (pos != std::string::npos) {
            auto s = std::string_view(r.system).substr(pos + 9);
            std::from_chars(s.data(), s.data() + s.size(), voter);
        }
        for (const auto& v : f_.vote_rejections) {
            if (v.difficulty != *d || v.voter != voter) continue;
            if (v.attempts && !listed(*v.attempts, attempt)) continue;
            return std::string("INVALID: the proposed answer does not follow from the question.");
        }
        return std::string("VALID: the question and its answer are consistent.");
    }

    std::optional<std::string> summarize(const ModelRequest& r) const {
        auto d = mock_markers::difficulty(r.user);
        if (!d) return std::nullopt;
        return "theme: level " + std::to_string(*d) + " " + f_.topic + " extended by one more turn";
    }

    std::optional<std::string> analyze(const ModelRequest& r) const {
        auto ds = mock_markers::all_difficulties(r.user);
        if (ds.empty()) return std::nullopt;
        std::string list;
        for (int d : ds) list += (list.empty() ? "" : ", ") + std::to_string(d);
        return "The prompt gives no rule that covers the failing items at difficulty " + list +
               ", so the model guessed instead of applying the task rules.";
    }

    std::optional<std::string> recommend(const ModelRequest& r) const {
        bool found = false;
        auto prompt = std::string(text::trim(
            text::between(r.user, f_.prompt_begin, f_.recommend_prompt_end, &found)));
        auto ds = mock_markers::all_difficulties(r.user);
        if (!found || ds.empty()) return std::nullopt;
        std::vector<std::string> adds;
        bool generic = false;
        for (int d : ds) {
            auto fixes = missing_fixes(f_, prompt, d);
            bool visible = false;
            for (const auto& fx : fixes) {
                if (fx.hidden) continue;
                visible = true;
                if (std::find(adds.begin(), adds.end(), fx.clause) == adds.end()) adds.push_back(fx.clause);
            }
            if (!visible) generic = true;
        }
        std::string out;
        for (const auto& a : adds) out += "ADD: " + a + "\n";
        if (generic || adds.empty())
            out += "ADD: Double-check step " + std::to_string(text::split_lines(prompt).size() + 1) + ".\n";
        return out;
    }

    std::optional<std::string> refine(const ModelRequest& r) const {
        bool has_prompt = false, has_rec = false;
        auto prompt = std::string(text::trim(
            text::between(r.user, f_.prompt_begin, f_.refine_prompt_end, &has_prompt)));
        auto rec = text::between(r.user, f_.recommendation_begin, f_.recommendation_end, &has_rec);
        if (!has_prompt || !has_rec) return std::nullopt;

        std::vector<std::string> lines;
        for (auto l : text::split_lines(prompt)) lines.emplace_back(l);
        for (auto l : text::split_lines(rec)) {
            l = text::trim(l);
            if (text::istarts_with(l, "ADD: ")) {
                auto clause = std::string(text::trim(l.substr(5)));
                if (!clause.empty() && !text::contains(prompt, clause)) lines.push_back(clause);
            } else if (text::istarts_with(l, "REMOVE: ")) {
                auto clause = text::trim(l.substr(8));
                std::erase_if(lines, [&](const std::string& x) { return text::trim(x) == clause; });
            }
        }
        std::string out;
        for (const auto& l : lines) out += (out.empty() ? "" : "\n") + l;
        if (out == prompt && text::contains(r.user, "must differ from the current prompt"))
            out += "\nState the final answer on its own line.";
        return out;
    }

    const MockFamily& f_;
};

template <class T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

int get_int(const json& j, const char* key, int fallback) {
    return j.contains(key) ? j.at(key).get<int>() : fallback;
}

MockFamily family_from_json(const json& j) {
    MockFamily f;
    get_if(j, "wrong_answer", f.wrong_answer);
    get_if(j, "answer_style", f.answer_style);
    get_if(j, "topic", f.topic);
    get_if(j, "garble_difficulties", f.garble_difficulties);
    get_if(j, "corrupt_geometry_difficulties", f.corrupt_geometry_difficulties);
    get_if(j, "difficulty_marker", f.difficulty_marker);
    get_if(j, "target_marker", f.target_marker);
    get_if(j, "reference_marker", f.reference_marker);
    get_if(j, "cue_marker", f.cue_marker);
    get_if(j, "prompt_begin", f.prompt_begin);
    get_if(j, "recommend_prompt_end", f.recommend_prompt_end);
    get_if(j, "refine_prompt_end", f.refine_prompt_end);
    get_if(j, "recommendation_begin", f.recommendation_begin);
    get_if(j, "recommendation_end", f.recommendation_end);
    if (j.contains("requirements"))
        for (const auto& r : j.at("requirements"))
            f.requirements.push_back({r.at("clause").get<std::string>(), get_int(r, "min_difficulty", 1),
                                      get_int(r, "max_difficulty", INT_MAX),
                                      r.value("hidden", false)});
    if (j.contains("conflicts"))
        for (const auto& c : j.at("conflicts"))
            f.conflicts.push_back({c.at("clause").get<std::string>(), get_int(c, "min_difficulty", 1),
                                   get_int(c, "max_difficulty", INT_MAX),
                                   c.at("remedy").get<std::string>()});
    if (j.contains("vote_rejections"))
        for (const auto& v : j.at("vote_rejections")) {
            VoteRejection vr{v.at("difficulty").get<int>(), v.at("voter").get<int>(), std::nullopt};
            if (v.contains("attempts")) vr.attempts = v.at("attempts").get<std::vector<int>>();
            f.vote_rejections.push_back(std::move(vr));
        }
    if (f.answer_style != "plain" && f.answer_style != "word-and-numeral" && f.answer_style != "answer-tag")
        throw ConfigError("unknown answer_style '" + f.answer_style + "'");
    return f;
}

}  // namespace

MockScript MockScript::from_json(const json& j) {
    MockScript s;
    try {
        get_if(j, "name", s.name);
        if (j.contains("family")) s.family = family_from_json(j.at("family"));
        for (const auto& r : j.at("rules")) {
            MockRule rule;
            if (r.contains("role")) rule.role = parse_role(r.at("role").get<std::string>());
            get_if(r, "contains", rule.contains);
            if (r.contains("response")) rule.response = r.at("response").get<std::string>();
            if (r.contains("behavior")) rule.behavior = r.at("behavior").get<std::string>();
            s.rules.push_back(std::move(rule));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("mock script: ") + e.what());
    }
    s.validate();
    return s;
}

MockScript MockScript::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open mock script " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("mock script " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

void MockScript::validate() const {
    if (rules.empty()) throw ConfigError("mock script has no rules");
    for (const auto& r : rules) {
        if (r.response.has_value() == r.behavior.has_value())
            throw ConfigError("mock rule needs exactly one of response or behavior");
        if (r.behavior &&
            std::find(kBehaviors.begin(), kBehaviors.end(), *r.behavior) == kBehaviors.end())
            throw ConfigError("unknown mock behavior '" + *r.behavior + "'");
        if (r.response && r.response->empty()) throw ConfigError("mock rule with empty response");
    }
    if (!rules.back().catch_all()) throw ConfigError("last mock rule must be a literal catch-all");
}

MockBackend::MockBackend(MockScript script) : script_(std::move(script)) { script_.validate(); }

ModelResponse MockBackend::complete(const ModelRequest& request) {
    ++calls_;
    const std::string haystack = request.system + "\n" + request.user;
    Behaviors behaviors(script_.family);
    std::optional<std::string> reply;
    for (const auto& rule : script_.rules) {
        if (rule.role && *rule.role != request.role) continue;
        bool all = std::all_of(rule.contains.begin(), rule.contains.end(),
                               [&](const std::string& c) { return text::contains(haystack, c); });
        if (!all) continue;
        reply = rule.response ? rule.response : behaviors.run(*rule.behavior, request);
        if (reply) break;
    }
    if (!reply || reply->empty()) throw EmptyCompletionError("mock produced an empty completion");
    ModelResponse res;
    res.text = std::move(*reply);
    res.backend = BackendKind::mock;
    res.usage.input = static_cast<std::int64_t>(text::count_words(request.system) +
                                                text::count_words(request.user));
    res.usage.output = static_cast<std::int64_t>(text::count_words(res.text));
    return res;
}

}  // namespace promptloop::gateway
