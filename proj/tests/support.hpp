#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "promptloop/core/random.hpp"
#include "promptloop/gateway/gateway.hpp"
#include "promptloop/gateway/mock_backend.hpp"
#include "promptloop/generator/generator.hpp"
#include "promptloop/harness/runlog.hpp"
#include "promptloop/optimizer/optimizer.hpp"

namespace testsupport {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace promptloop;

inline fs::path data_dir() { return PROMPTLOOP_TEST_DATA_DIR; }

/// Unique scratch directory under the system temp dir, removed on destruction.
struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("promptloop-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(++counter));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

/// Script whose every role is served by the family behaviours.
inline gateway::MockScript family_script(const json& family, const std::string& name = "family",
                                         const json& extra_rules = json::array()) {
    json rules = extra_rules;
    for (std::string r : {"generate", "evaluate", "vote", "summarize", "analyze", "recommend", "refine"})
        rules.push_back({{"role", r}, {"behavior", "family-" + (r == "evaluate" ? std::string("answer") : r)}});
    rules.push_back({{"response", "no idea"}});
    return gateway::MockScript::from_json({{"name", name}, {"family", family}, {"rules", rules}});
}

inline core::TaskSpec yes_no_task(int difficulty_max = 10) {
    core::TaskSpec t;
    t.id = "toy";
    t.description = "Answer yes or no.";
    t.label_space = std::vector<std::string>{"Yes", "No"};
    t.answer_format = core::AnswerFormat::case_fold_trim;
    t.difficulty_max = difficulty_max;
    return t;
}

inline std::vector<core::LabeledExample> toy_seeds() {
    std::vector<core::LabeledExample> s(3);
    s[0] = {"s1", "Is the sky blue on a clear day?", "Yes", 0, core::Provenance::seed, "toy"};
    s[1] = {"s2", "Can a fish climb a ladder?", "No", 0, core::Provenance::seed, "toy"};
    s[2] = {"s3", "Does water boil at 100 C at sea level?", "Yes", 0, core::Provenance::seed, "toy"};
    return s;
}

inline json seed_rules() {
    return json::array({{{"role", "evaluate"}, {"contains", {"sky blue"}}, {"response", "Yes"}},
                        {{"role", "evaluate"}, {"contains", {"fish climb"}}, {"response", "No"}},
                        {{"role", "evaluate"}, {"contains", {"water boil"}}, {"response", "Yes"}}});
}

struct LoopRun {
    std::vector<harness::LogEvent> events;
    optimizer::OptimizationResult result;
    std::vector<gateway::TranscriptEntry> transcript;
    std::vector<core::LabeledExample> history;
};

struct LoopSetup {
    core::TaskSpec task = yes_no_task();
    std::vector<core::LabeledExample> seeds = toy_seeds();
    std::string initial_prompt = "Answer the question with Yes or No.";
    optimizer::LoopConfig loop;
    generator::GeneratorConfig gen;
    std::uint64_t seed = 7;
    const geometry::TemplateLibrary* library = nullptr;
};

inline generator::GeneratorTemplates shipped_generator_templates() {
    return generator::GeneratorTemplates::load(data_dir() / "templates");
}

inline optimizer::OptimizerTemplates shipped_optimizer_templates() {
    return optimizer::OptimizerTemplates::load(data_dir() / "templates");
}

/// Runs the closed loop fully in memory on `backend`.
inline LoopRun run_loop(const LoopSetup& s, std::shared_ptr<gateway::Backend> backend,
                        const generator::GeneratorTemplates& gen_templates = shipped_generator_templates()) {
    gateway::Gateway gw(std::move(backend));
    const std::string run_id = "test-run";
    gw.open_run(run_id);
    harness::RunLog log({}, &gw, run_id);
    gateway::ModelSession session(gw, run_id);
    generator::GenerationContext ctx;
    ctx.prior = generator::estimate_prior(s.seeds, s.task.label_space, s.task.answer_format);
    ctx.seeds = s.seeds;
    ctx.schedule = generator::build_schedule(s.task);
    ctx.rng_seed = s.seed;
    generator::DataGenerator gen(s.task, ctx, gen_templates, s.gen, session, log, s.library);
    optimizer::Optimizer opt(s.task, shipped_optimizer_templates(), s.loop, session, log);
    LoopRun out;
    out.result = opt.run_loop(s.initial_prompt, gen, s.seeds);
    out.events = log.events();
    out.transcript = gw.transcript(run_id);
    out.history = ctx.history;
    return out;
}

inline std::vector<const harness::LogEvent*> of_kind(const std::vector<harness::LogEvent>& events,
                                                     core::EventKind kind) {
    std::vector<const harness::LogEvent*> out;
    for (const auto& e : events)
        if (e.kind == kind) out.push_back(&e);
    return out;
}

/// Family whose level i needs clause "Rule i." and nothing else.
inline json ladder_family(int levels) {
    json reqs = json::array();
    for (int i = 1; i <= levels; ++i)
        reqs.push_back({{"clause", "Rule " + std::to_string(i) + "."}, {"min_difficulty", i}});
    return {{"topic", "toy question"}, {"requirements", reqs}};
}

/// Seeded random family for property tests.
inline json random_family(core::Rng& rng, int difficulty_max) {
    json reqs = json::array();
    int n = 1 + static_cast<int>(core::uniform_index(rng, 5));
    for (int i = 0; i < n; ++i) {
        int lo = 1 + static_cast<int>(core::uniform_index(rng, static_cast<std::size_t>(difficulty_max)));
        json r = {{"clause", "Clause " + std::to_string(i) + " applies."}, {"min_difficulty", lo}};
        if (core::uniform01(rng) < 0.5)
            r["max_difficulty"] = lo + static_cast<int>(core::uniform_index(rng, 4));
        if (core::uniform01(rng) < 0.2) r["hidden"] = true;
        reqs.push_back(r);
    }
    json conflicts = json::array();
    if (core::uniform01(rng) < 0.4) {
        int lo = 1 + static_cast<int>(core::uniform_index(rng, static_cast<std::size_t>(difficulty_max)));
        conflicts.push_back({{"clause", "Clause 0 applies."}, {"min_difficulty", lo}, {"remedy", "Clause 1 applies."}});
    }
    json garble = json::array();
    if (core::uniform01(rng) < 0.3)
        garble.push_back(1 + static_cast<int>(core::uniform_index(rng, static_cast<std::size_t>(difficulty_max))));
    return {{"topic", "random question"}, {"requirements", reqs}, {"conflicts", conflicts},
            {"garble_difficulties", garble}};
}

}  // namespace testsupport
