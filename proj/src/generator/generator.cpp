#include "promptloop/generator/generator.hpp"

#include "promptloop/core/canonicalize.hpp"
#include "promptloop/core/text.hpp"
#include "promptloop/errors.hpp"

namespace promptloop::generator {

namespace text = core::text;
using nlohmann::json;
using gateway::Role;

namespace {

constexpr std::string_view kParseNote =
    "Your previous reply could not be parsed. Reply with one 'Question:' part followed by one 'Answer:' line.";
constexpr int kVoters = 3;

json example_json(const core::LabeledExample& e) {
    return {{"id", e.id},
            {"input", e.input},
            {"target", e.target},
            {"difficulty", e.difficulty},
            {"provenance", core::to_string(e.provenance)}};
}

}  // namespace

void GenerationContext::append(core::LabeledExample example) {
    if (!history.empty() && example.difficulty < history.back().difficulty)
        throw DomainError("history difficulties must be non-decreasing");
    history.push_back(std::move(example));
}

std::vector<std::string> GenerationContext::history_labels() const {
    std::vector<std::string> out;
    for (const auto& e : history) out.push_back(e.target);
    return out;
}

GeneratorTemplates GeneratorTemplates::load(const std::filesystem::path& dir) {
    GeneratorTemplates t{core::PromptTemplate::load(dir / "generate.txt"),
                         core::PromptTemplate::load(dir / "vote.txt"),
                         core::PromptTemplate::load(dir / "summarize.txt")};
    t.check();
    return t;
}

void GeneratorTemplates::check() const {
    generate.require({"max difficulty level", "c", "target label", "Generated data with difficulty", "True Data 1",
                      "True Data 2"});
    vote.require({"voter id", "question", "proposed answer"});
    summarize.require({"question", "answer"});
}

std::optional<std::pair<std::string, std::string>> parse_generated(std::string_view reply) {
    auto q = text::ifind(reply, "question:");
    if (q == std::string_view::npos) return std::nullopt;
    auto a = text::ifind(reply, "answer:", q + 9);
    if (a == std::string_view::npos) return std::nullopt;
    // take the last Answer: so questions that mention the word survive
    for (auto next = text::ifind(reply, "\nanswer:", a); next != std::string_view::npos;
         next = text::ifind(reply, "\nanswer:", next + 1))
        a = next + 1;
    auto question = text::trim(reply.substr(q + 9, a - q - 9));
    auto rest = reply.substr(a + 7);
    auto lines = text::split_lines(rest);
    std::string_view answer;
    for (auto l : lines) {
        if (!text::trim(l).empty()) {
            answer = text::trim(l);
            break;
        }
    }
    if (question.empty() || answer.empty()) return std::nullopt;
    return std::make_pair(std::string(question), std::string(answer));
}

std::optional<std::string> extract_path_data(std::string_view input) {
    bool found = false;
    auto d = text::between(input, "d=\"", "\"", &found);
    if (!found) return std::nullopt;
    return std::string(d);
}

DataGenerator::DataGenerator(core::TaskSpec task, GenerationContext& context, GeneratorTemplates templates,
                             GeneratorConfig config, gateway::ModelSession& session, core::EventSink& sink,
                             const geometry::TemplateLibrary* library)
    : task_(std::move(task)),
      context_(context),
      templates_(std::move(templates)),
      config_(config),
      session_(session),
      sink_(sink),
      library_(library),
      label_rng_(core::mix_seed(context.rng_seed, 1)),
      geometry_rng_(core::mix_seed(context.rng_seed, 2)) {
    templates_.check();
    context_.prior.validate();
    if (context_.seeds.size() < 2) throw ConfigError("generation needs at least two seed examples");
    if (config_.parse_retries < 0 || config_.regeneration_cap < 0) throw ConfigError("retry caps must be >= 0");
    if (config_.geometry && !library_) throw ConfigError("geometry generation needs a template library");
}

std::string DataGenerator::render_seed(std::size_t i) const {
    const auto& s = context_.seeds[i];
    return "Question: " + s.input + "\nAnswer: " + s.target;
}

std::string DataGenerator::render_history() const {
    std::string out;
    for (const auto& e : context_.history) {
        if (!out.empty()) out += "\n";
        out += "(difficulty " + std::to_string(e.difficulty) + ") Question: " + e.input + " Answer: " + e.target;
    }
    return out;
}

Candidate DataGenerator::generate_example(const std::string& label, int c, const std::string& cue,
                                          const std::string& reference_path, const std::vector<std::string>& notes) {
    if (c < 1 || c > task_.difficulty_max) throw ConfigError("difficulty outside 1..difficulty_max");
    core::SlotMap slots{
        {"task description", task_.description},
        {"max difficulty level", std::to_string(task_.difficulty_max)},
        {"c", std::to_string(c)},
        {"target label", label},
        {"latent cue", cue.empty() ? std::string() : "Theme to build on: " + cue},
        {"reference path block", reference_path.empty() ? std::string() : "Reference SVG path: " + reference_path},
        {"Generated data with difficulty", render_history()},
        {"True Data 1", render_seed(0)},
        {"True Data 2", render_seed(1)},
    };
    auto rendered = templates_.generate.render(slots);
    for (const auto& n : notes) rendered.user += "\n\n" + n;

    for (int attempt = 0; attempt <= config_.parse_retries; ++attempt) {
        auto digest = session_.digest_of(Role::generate, rendered.system, rendered.user);
        std::optional<std::pair<std::string, std::string>> parsed;
        std::size_t index = 0;
        try {
            auto r = session_.call(Role::generate, rendered.system, rendered.user);
            index = r.transcript_index;
            parsed = parse_generated(r.text);
        } catch (const EmptyCompletionError&) {
        }
        if (parsed) {
            Candidate out;
            out.example.id = "syn-" + std::to_string(c);
            out.example.input = parsed->first;
            // label-first: the reply's own answer never replaces the drawn label
            out.example.target = label;
            out.example.difficulty = c;
            out.example.provenance = core::Provenance::synthetic;
            out.example.task = task_.id;
            out.request_index = index;
            out.request_digest = digest;
            out.parse_attempts = attempt + 1;
            out.answer_matches = core::canonicalize_answer(parsed->second, task_.answer_format) ==
                                 core::canonicalize_answer(label, task_.answer_format);
            return out;
        }
        rendered.user += "\n\n" + std::string(kParseNote);
    }
    throw GenerationError("generator reply could not be parsed after " + std::to_string(config_.parse_retries) +
                          " retries");
}

std::string DataGenerator::summarize_previous(const core::LabeledExample& example, bool* fallback) {
    auto rendered = templates_.summarize.render({{"question", example.input}, {"answer", example.target}});
    std::string cue;
    try {
        cue = std::string(text::trim(session_.call(Role::summarize, rendered.system, rendered.user).text));
    } catch (const EmptyCompletionError&) {
    }
    if (fallback) *fallback = cue.empty();
    return cue.empty() ? example.input : cue;
}

VoterVerdict DataGenerator::voter_check(const core::LabeledExample& candidate) {
    VoterVerdict verdict;
    verdict.accepted = true;
    for (int v = 1; v <= kVoters; ++v) {
        auto rendered = templates_.vote.render({{"task description", task_.description},
                                                {"voter id", std::to_string(v)},
                                                {"question", candidate.input},
                                                {"proposed answer", candidate.target}});
        Vote vote{v, false, {}};
        try {
            auto r = session_.call(Role::vote, rendered.system, rendered.user);
            vote.rationale = std::string(text::trim(r.text));
            vote.valid = text::istarts_with(vote.rationale, "valid");
        } catch (const EmptyCompletionError&) {
            vote.rationale = "(empty vote)";
        }
        verdict.accepted = verdict.accepted && vote.valid;
        verdict.votes.push_back(std::move(vote));
    }
    return verdict;
}

core::LabeledExample DataGenerator::next(int c) {
    const auto label = draw_label(context_.prior, label_rng_);
    const auto label_fixed_at = session_.transcript_size();

    std::string cue;
    bool cue_fallback = false;
    if (!context_.history.empty()) cue = summarize_previous(context_.history.back(), &cue_fallback);

    std::string reference;
    if (config_.geometry)
        reference = geometry::to_string(geometry::retrieve_template(label, *library_, geometry_rng_, config_.perturbation));

    std::vector<std::string> notes;
    json rejections = json::array();
    json votes = json::array();
    for (int attempt = 0; attempt <= config_.regeneration_cap; ++attempt) {
        auto cand = generate_example(label, c, cue, reference, notes);
        std::string reason;
        if (!cand.answer_matches) reason = "the answer does not match the required label " + label;
        if (reason.empty() && config_.geometry) {
            auto path = extract_path_data(cand.example.input);
            if (!path) {
                reason = "reverse check: malformed (no path data found)";
            } else {
                auto check = geometry::reverse_check(*path, label);
                if (!check.accepted) {
                    reason = "reverse check: " + std::string(geometry::to_string(check.reason)) + " (" + check.detail + ")";
                } else {
                    auto normalized = geometry::to_string(geometry::normalize_precision(geometry::parse_path(*path)));
                    cand.example.input = text::replace_all(cand.example.input, "d=\"" + *path + "\"",
                                                           "d=\"" + normalized + "\"");
                }
            }
        }
        if (reason.empty() && config_.voters) {
            auto verdict = voter_check(cand.example);
            json vj = json::array();
            for (const auto& v : verdict.votes)
                vj.push_back({{"voter", v.voter}, {"valid", v.valid}, {"rationale", v.rationale}});
            sink_.emit(core::EventKind::voted, {{"level", c},
                                                {"attempt", attempt},
                                                {"example_id", cand.example.id},
                                                {"request_digest", cand.request_digest},
                                                {"votes", vj},
                                                {"accepted", verdict.accepted}});
            votes = vj;
            if (!verdict.accepted) {
                for (const auto& v : verdict.votes)
                    if (!v.valid) {
                        reason = "voter " + std::to_string(v.voter) + ": " + v.rationale;
                        break;
                    }
            }
        }
        if (reason.empty()) {
            sink_.emit(core::EventKind::generated, {{"level", c},
                                                    {"label", label},
                                                    {"label_fixed_at", label_fixed_at},
                                                    {"request_index", cand.request_index},
                                                    {"request_digest", cand.request_digest},
                                                    {"example", example_json(cand.example)},
                                                    {"attempts", attempt + 1},
                                                    {"rejections", rejections},
                                                    {"votes", votes},
                                                    {"cue", cue},
                                                    {"cue_fallback", cue_fallback},
                                                    {"prior", {{"labels", context_.prior.labels},
                                                               {"probabilities", context_.prior.probabilities}}}});
            context_.append(cand.example);
            return cand.example;
        }
        rejections.push_back({{"attempt", attempt}, {"reason", reason}, {"request_digest", cand.request_digest}});
        notes.push_back("Previous attempt was rejected: " + reason);
    }
    throw GenerationError("level " + std::to_string(c) + ": no candidate passed validation after " +
                          std::to_string(config_.regeneration_cap) + " regenerations");
}

}  // namespace promptloop::generator
