#include "promptloop/harness/run.hpp"

#include <fstream>

#include "promptloop/core/digest.hpp"
#include "promptloop/errors.hpp"
#include "promptloop/gateway/http_backend.hpp"
#include "promptloop/gateway/mock_backend.hpp"
#include "promptloop/generator/generator.hpp"
#include "promptloop/geometry/shapes.hpp"
#include "promptloop/harness/runlog.hpp"
#include "promptloop/harness/task.hpp"

namespace promptloop::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::out | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

struct Prepared {
    TaskBundle bundle;
    core::TaskSpec spec;
    generator::GeneratorTemplates gen_templates;
    optimizer::OptimizerTemplates opt_templates;
    optimizer::LoopConfig loop;
    generator::GeneratorConfig gen_config;
    std::optional<geometry::TemplateLibrary> library;
    std::shared_ptr<gateway::Backend> backend;
};

Prepared prepare(const RunConfig& cfg, std::shared_ptr<gateway::Backend> backend_override) {
    if (cfg.task.empty()) throw ConfigError("no task given");
    if (!fs::is_directory(cfg.data_dir)) throw ConfigError("data directory not found: " + cfg.data_dir.string());
    if (cfg.out_dir.empty()) throw ConfigError("no output directory given");

    auto bundle = load_task(cfg.data_dir, cfg.task);
    auto spec = bundle.spec;
    if (cfg.difficulty_max) spec.difficulty_max = *cfg.difficulty_max;
    core::validate(spec, bundle.seeds);

    generator::GeneratorConfig gen_config;
    gen_config.geometry = cfg.geometry.value_or(spec.geometry);
    gen_config.voters = cfg.voters.value_or(spec.voters);
    if (gen_config.geometry && !spec.geometry)
        throw ConfigError("geometry checks apply only to geometry tasks, and '" + spec.id + "' is not one");

    auto template_dir = cfg.template_dir.value_or(cfg.data_dir / "templates");
    if (!fs::is_directory(template_dir)) throw ConfigError("template directory not found: " + template_dir.string());
    auto load = [&](const char* name) { return core::PromptTemplate::load(resolve_template(bundle, template_dir, name)); };
    generator::GeneratorTemplates gen_templates{load("generate.txt"), load("vote.txt"), load("summarize.txt")};
    gen_templates.check();
    optimizer::OptimizerTemplates opt_templates{load("analyze.txt"), load("recommend.txt"), load("refine.txt")};
    opt_templates.check();

    optimizer::LoopConfig loop;
    loop.budget = cfg.budget.value_or(spec.difficulty_max);
    loop.max_revisions = cfg.tmax.value_or(0);
    loop.local_retry_cap = cfg.local_retry_cap;
    loop.include_seeds_in_global = cfg.include_seeds_in_global;
    loop.eval_workers = cfg.eval_workers;
    loop.validate();
    if (loop.budget > spec.difficulty_max)
        throw ConfigError("budget M=" + std::to_string(loop.budget) + " exceeds difficulty_max=" +
                          std::to_string(spec.difficulty_max));

    std::optional<geometry::TemplateLibrary> library;
    if (gen_config.geometry)
        library = geometry::TemplateLibrary::load(cfg.geometry_dir.value_or(cfg.data_dir / "geometry_templates"));

    std::shared_ptr<gateway::Backend> backend = std::move(backend_override);
    if (!backend) {
        if (cfg.backend == "mock") {
            auto script = cfg.mock_script ? cfg.mock_script : bundle.mock_script;
            if (!script) throw ConfigError("task '" + spec.id + "' ships no mock script; pass one explicitly");
            backend = std::make_shared<gateway::MockBackend>(gateway::MockScript::load(*script));
        } else if (cfg.backend == "http") {
            backend = std::make_shared<gateway::HttpBackend>(gateway::HttpConfig::from_env());
        } else {
            throw ConfigError("unknown backend '" + cfg.backend + "'");
        }
    }

    theory::BoundInputs check;
    check.lambda = cfg.bound.lambda;
    check.epsilon = cfg.bound.epsilon;
    check.delta = cfg.bound.delta;
    try {
        check.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("bound options: ") + e.what());
    }

    return {std::move(bundle), spec, std::move(gen_templates), std::move(opt_templates), loop, gen_config,
            std::move(library), std::move(backend)};
}

json synthetic_records(const std::vector<LogEvent>& events) {
    json out = json::array();
    for (const auto& e : events) {
        if (e.kind != core::EventKind::generated) continue;
        auto rec = e.payload.at("example");
        rec["votes"] = e.payload.at("votes");
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace

int exit_code_for(optimizer::Termination t) noexcept {
    switch (t) {
    case optimizer::Termination::coverage: return exit_coverage;
    case optimizer::Termination::budget: return exit_budget;
    case optimizer::Termination::cap: return exit_cap;
    }
    return exit_cap;
}

RunOutcome run(const RunConfig& cfg, std::shared_ptr<gateway::Backend> backend_override) {
    RunOutcome outcome;
    outcome.run_id = "run-" + cfg.task + "-" + std::to_string(cfg.seed);
    std::optional<Prepared> prep;
    try {
        prep.emplace(prepare(cfg, std::move(backend_override)));
    } catch (const ConfigError& e) {
        outcome.exit_code = exit_config;
        outcome.message = e.what();
        return outcome;
    }

    try {
        fs::create_directories(cfg.out_dir);
        gateway::GatewayOptions gw_options;
        gw_options.cache = cfg.cache_dir.has_value();
        gw_options.cache_dir = cfg.cache_dir;
        gateway::Gateway gw(prep->backend, gw_options);
        gw.open_run(outcome.run_id);
        RunLog log(cfg.out_dir / "runlog.jsonl", &gw, outcome.run_id);
        gateway::ModelSession session(gw, outcome.run_id);

        const auto& seeds = prep->bundle.seeds;
        generator::GenerationContext ctx;
        ctx.prior = generator::estimate_prior(seeds, prep->spec.label_space, prep->spec.answer_format);
        ctx.seeds = seeds;
        ctx.schedule = generator::build_schedule(prep->spec);
        ctx.rng_seed = cfg.seed;

        generator::DataGenerator gen(prep->spec, ctx, prep->gen_templates, prep->gen_config, session, log,
                                     prep->library ? &*prep->library : nullptr);
        optimizer::Optimizer opt(prep->spec, prep->opt_templates, prep->loop, session, log);

        std::optional<optimizer::OptimizationResult> result;
        try {
            result = opt.run_loop(prep->bundle.initial_prompt, gen, seeds);
        } catch (const TransportError& e) {
            outcome.exit_code = exit_transport;
            outcome.message = e.what();
        } catch (const MalformedResponseError& e) {
            outcome.exit_code = exit_transport;
            outcome.message = e.what();
        }
        outcome.transcript_size = gw.transcript_size(outcome.run_id);

        std::string transcript_lines;
        for (const auto& t : gw.transcript(outcome.run_id))
            transcript_lines += json{{"index", t.index},
                                     {"role", gateway::to_string(t.role)},
                                     {"temperature", t.temperature},
                                     {"request_digest", t.request_digest},
                                     {"response_digest", t.response_digest},
                                     {"backend", gateway::to_string(t.backend)},
                                     {"input_tokens", t.usage.input},
                                     {"output_tokens", t.usage.output},
                                     {"latency_ms", t.latency_ms}}
                                    .dump() +
                                "\n";
        write_text(cfg.out_dir / "transcript.jsonl", transcript_lines);

        std::string synthetic;
        for (const auto& r : synthetic_records(log.events())) synthetic += r.dump() + "\n";
        write_text(cfg.out_dir / "synthetic.jsonl", synthetic);

        if (!result) return outcome;

        outcome.exit_code = exit_code_for(result->termination);
        outcome.message = result->reason;
        write_text(cfg.out_dir / "final_prompt.txt", result->final_prompt + "\n");
        auto report = build_report(log.events(), cfg.bound);
        write_json(cfg.out_dir / "report.json", report.to_json());

        json history = json::array();
        for (const auto& h : result->score_history)
            history.push_back({{"level", h.level},
                               {"correct", h.score.correct},
                               {"total", h.score.total},
                               {"value", h.score.value()}});
        write_json(cfg.out_dir / "summary.json",
                   {{"run_id", outcome.run_id},
                    {"task", prep->spec.id},
                    {"backend", prep->backend->id()},
                    {"seed", cfg.seed},
                    {"budget", prep->loop.budget},
                    {"max_revisions", prep->loop.effective_max_revisions()},
                    {"termination", optimizer::to_string(result->termination)},
                    {"reason", result->reason},
                    {"exit_code", outcome.exit_code},
                    {"revisions", result->revision_count},
                    {"final_prompt_digest", core::sha256_hex(result->final_prompt)},
                    {"score_history", history},
                    {"calls", outcome.transcript_size}});
        outcome.result = std::move(result);
    } catch (const ConfigError& e) {
        outcome.exit_code = exit_config;
        outcome.message = e.what();
    } catch (const TransportError& e) {
        outcome.exit_code = exit_transport;
        outcome.message = e.what();
    }
    return outcome;
}

}  // namespace promptloop::harness
