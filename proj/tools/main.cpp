#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "promptloop/errors.hpp"
#include "promptloop/harness/replay.hpp"
#include "promptloop/harness/report.hpp"
#include "promptloop/harness/run.hpp"

namespace {

using namespace promptloop;

std::optional<bool> on_off(const std::string& v) {
    if (v.empty()) return std::nullopt;
    if (v == "on") return true;
    if (v == "off") return false;
    throw CLI::ValidationError("expected on or off, got '" + v + "'");
}

std::string default_data_dir() {
    if (const char* env = std::getenv("PROMPTLOOP_DATA_DIR")) return env;
    return PROMPTLOOP_DEFAULT_DATA_DIR;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Closed-loop prompt optimizer with synthetic curriculum data"};
    app.require_subcommand(1);

    harness::RunConfig cfg;
    std::string data_dir = default_data_dir(), out_dir, voters, geometry, templates, mock_script, geometry_dir,
                cache_dir;
    int difficulty_max = 0, budget = 0, tmax = 0;
    std::uint64_t prompt_space = 0;
    auto* run = app.add_subcommand("run", "run the optimization loop for one task");
    run->add_option("--task", cfg.task, "task id under <data>/tasks")->required();
    run->add_option("--backend", cfg.backend, "mock or http")->check(CLI::IsMember({"mock", "http"}));
    run->add_option("--difficulty-max", difficulty_max, "highest difficulty level (default: task setting)");
    run->add_option("--budget", budget, "M, number of levels (default: difficulty max)");
    run->add_option("--tmax", tmax, "cap on revision attempts (default: M * (local retry cap + 1))");
    run->add_option("--seed", cfg.seed, "random seed");
    run->add_option("--voters", voters, "three-voter check on|off (default: task setting)");
    run->add_option("--geometry", geometry, "geometry safeguards on|off (default: task setting)");
    run->add_option("--local-retry-cap", cfg.local_retry_cap, "re-entries before a level is abandoned");
    run->add_flag("--include-seeds", cfg.include_seeds_in_global, "also re-test seeds during global confirmation");
    run->add_option("--eval-workers", cfg.eval_workers, "concurrent evaluation calls");
    run->add_option("--data-dir", data_dir, "directory with tasks/, templates/ and geometry_templates/");
    run->add_option("--templates", templates, "prompt template directory");
    run->add_option("--mock-script", mock_script, "mock rules file (default: the task's mock.json)");
    run->add_option("--geometry-templates", geometry_dir, "SVG path template directory");
    run->add_option("--cache-dir", cache_dir, "persist responses in this content-addressed directory");
    run->add_option("--lambda", cfg.bound.lambda, "KL weight in the bound");
    run->add_option("--epsilon", cfg.bound.epsilon, "assumed generator gap in the bound");
    run->add_option("--delta", cfg.bound.delta, "confidence parameter in the bound");
    run->add_option("--prompt-space", prompt_space, "|P| in the bound (default: prompts evaluated)");
    run->add_option("--out", out_dir, "output directory")->required();

    std::string log_path;
    auto* replay = app.add_subcommand("replay", "verify a run log");
    replay->add_option("runlog", log_path, "runlog.jsonl")->required();

    bool as_json = false;
    auto* report = app.add_subcommand("report", "summarize a run log");
    report->add_option("runlog", log_path, "runlog.jsonl")->required();
    report->add_flag("--json", as_json, "print JSON");
    report->add_option("--lambda", cfg.bound.lambda, "KL weight in the bound");
    report->add_option("--epsilon", cfg.bound.epsilon, "assumed generator gap in the bound");
    report->add_option("--delta", cfg.bound.delta, "confidence parameter in the bound");
    report->add_option("--prompt-space", prompt_space, "|P| in the bound");

    try {
        app.parse(argc, argv);
        if (prompt_space > 0) cfg.bound.prompt_space_size = prompt_space;

        if (*run) {
            cfg.data_dir = data_dir;
            cfg.out_dir = out_dir;
            if (difficulty_max > 0) cfg.difficulty_max = difficulty_max;
            if (budget > 0) cfg.budget = budget;
            if (tmax > 0) cfg.tmax = tmax;
            cfg.voters = on_off(voters);
            cfg.geometry = on_off(geometry);
            if (!templates.empty()) cfg.template_dir = templates;
            if (!mock_script.empty()) cfg.mock_script = mock_script;
            if (!geometry_dir.empty()) cfg.geometry_dir = geometry_dir;
            if (!cache_dir.empty()) cfg.cache_dir = cache_dir;

            auto outcome = harness::run(cfg);
            if (outcome.result) {
                std::cout << "termination: " << optimizer::to_string(outcome.result->termination) << " ("
                          << outcome.message << ")\n"
                          << "revisions: " << outcome.result->revision_count << "\n"
                          << "calls: " << outcome.transcript_size << "\n"
                          << "artifacts: " << out_dir << "\n";
            } else {
                std::cerr << "error: " << outcome.message << "\n";
            }
            return outcome.exit_code;
        }

        if (*replay) {
            auto result = harness::replay_file(log_path);
            for (const auto& inv : result.invariants)
                std::cout << (inv.passed ? "PASS " : "FAIL ") << inv.name
                          << (inv.detail.empty() ? "" : ": " + inv.detail) << "\n";
            return result.passed() ? 0 : 1;
        }

        if (*report) {
            auto rep = harness::build_report(harness::RunLog::read(log_path), cfg.bound);
            if (as_json)
                std::cout << rep.to_json().dump(2) << "\n";
            else
                std::cout << rep.to_text();
            return 0;
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : harness::exit_config;
    } catch (const ReplayError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return harness::exit_config;
    }
    return 0;
}
