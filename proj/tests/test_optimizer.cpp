#include <gtest/gtest.h>

#include "promptloop/core/scoring.hpp"
#include "promptloop/errors.hpp"
#include "promptloop/harness/replay.hpp"
#include "promptloop/optimizer/optimizer.hpp"
#include "support.hpp"

using namespace promptloop;
using namespace promptloop::optimizer;
using core::EventKind;
using nlohmann::json;
using testsupport::of_kind;

namespace {

std::shared_ptr<gateway::MockBackend> family_backend(const json& family) {
    return std::make_shared<gateway::MockBackend>(
        testsupport::family_script(family, "opt", testsupport::seed_rules()));
}

/// Optimizer wired to a bare session, for the single-step methods.
struct StepRig {
    gateway::Gateway gw;
    gateway::ModelSession session;
    harness::RunLog log;
    Optimizer opt;
    explicit StepRig(std::shared_ptr<gateway::Backend> b, LoopConfig cfg = {})
        : gw(std::move(b)),
          session(gw, "r"),
          log({}, &gw, "r"),
          opt(testsupport::yes_no_task(), testsupport::shipped_optimizer_templates(), cfg, session, log) {
        gw.open_run("r");
    }
};

core::LabeledExample item(int d, const std::string& answer, const std::string& id = "x") {
    return {id, "Q " + gateway::mock_markers::item_markers(d, answer, 0), answer, d, core::Provenance::synthetic, "toy"};
}

}  // namespace

TEST(LoopConfig, DefaultsAndValidation) {
    LoopConfig c;
    EXPECT_EQ(c.effective_max_revisions(), 40);
    c.max_revisions = 12;
    EXPECT_EQ(c.effective_max_revisions(), 12);
    c.max_revisions = 5;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.budget = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.local_retry_cap = -1;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.eval_workers = 0;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Argmax, TiesGoToLatest) {
    std::vector<ScoreEntry> h = {{1, 1, "a", {1, 1}}, {2, 2, "b", {1, 2}}, {3, 3, "c", {3, 3}}, {4, 4, "d", {2, 4}}};
    EXPECT_EQ(argmax_latest(h), 2u);
    h.push_back({5, 5, "e", {5, 5}});
    EXPECT_EQ(argmax_latest(h), 4u);
    EXPECT_THROW(argmax_latest({}), DomainError);
}

TEST(Termination, Names) {
    for (auto t : {Termination::coverage, Termination::budget, Termination::cap})
        EXPECT_EQ(parse_termination(to_string(t)), t);
    EXPECT_THROW(parse_termination("done"), ConfigError);
}

TEST(Evaluate, RecordsInOrderAndFailedCallsCountAsWrong) {
    auto script = gateway::MockScript::from_json(
        {{"name", "e"},
         {"rules",
          {{{"role", "evaluate"}, {"contains", {"first"}}, {"response", "Yes"}},
           {{"role", "evaluate"}, {"contains", {"second"}}, {"response", "Maybe"}},
           {{"role", "evaluate"}, {"contains", {"third"}}, {"behavior", "family-answer"}},
           {{"response", "x"}}}}});
    StepRig rig(std::make_shared<gateway::MockBackend>(script));
    std::vector<core::LabeledExample> ex = {{"a", "first", "Yes", 0, core::Provenance::seed, ""},
                                            {"b", "second", "No", 0, core::Provenance::seed, ""},
                                            {"c", "third has no markers", "No", 0, core::Provenance::seed, ""}};
    auto recs = rig.opt.evaluate("p", ex);
    ASSERT_EQ(recs.size(), 3u);
    EXPECT_TRUE(recs[0].correct);
    EXPECT_FALSE(recs[1].correct);
    EXPECT_EQ(recs[2].example_id, "c");
    EXPECT_FALSE(recs[2].correct);
    EXPECT_THROW(rig.opt.evaluate("p", {}), DomainError);
}

TEST(Evaluate, ParallelWorkersGiveSameRecords) {
    LoopConfig cfg;
    cfg.eval_workers = 4;
    StepRig par(family_backend(testsupport::ladder_family(5)), cfg);
    StepRig seq(family_backend(testsupport::ladder_family(5)));
    std::vector<core::LabeledExample> ex;
    for (int d = 1; d <= 9; ++d) ex.push_back(item(d % 5 + 1, d % 2 ? "Yes" : "No", "i" + std::to_string(d)));
    auto a = par.opt.evaluate("Rule 1.\nRule 2.", ex);
    auto b = seq.opt.evaluate("Rule 1.\nRule 2.", ex);
    for (std::size_t i = 0; i < ex.size(); ++i) {
        EXPECT_EQ(a[i].example_id, b[i].example_id);
        EXPECT_EQ(a[i].correct, b[i].correct);
    }
}

TEST(Steps, AnalyzeRecommendRefine) {
    StepRig rig(family_backend(testsupport::ladder_family(3)));
    auto ex = item(2, "Yes");
    auto recs = rig.opt.evaluate("Base.", {ex});
    std::vector<Failure> errs = {{ex, recs[0]}};
    auto analysis = rig.opt.analyze_errors("Base.", errs);
    EXPECT_FALSE(analysis.empty());
    auto patch = rig.opt.recommend("Base.", errs, analysis);
    EXPECT_NE(patch.recommendation.find("ADD: Rule 2."), std::string::npos);
    bool unchanged = true;
    auto revised = rig.opt.refine("Base.", patch, errs, &unchanged);
    EXPECT_FALSE(unchanged);
    EXPECT_EQ(revised, "Base.\nRule 1.\nRule 2.");
    EXPECT_THROW(rig.opt.analyze_errors("Base.", {}), DomainError);
    EXPECT_THROW(rig.opt.recommend("Base.", errs, "  "), DomainError);
}

TEST(Steps, UnchangedRefinementIsRetriedOnce) {
    StepRig rig(family_backend(testsupport::ladder_family(3)));
    auto ex = item(1, "Yes");
    std::vector<Failure> errs = {{ex, core::make_record("x", "unknown", "Yes", core::AnswerFormat::case_fold_trim)}};
    Patch p{"analysis", "Nothing to add.", 1};
    bool unchanged = true;
    auto revised = rig.opt.refine("Base.", p, errs, &unchanged);
    EXPECT_FALSE(unchanged);
    EXPECT_NE(revised, "Base.");
    std::size_t refine_calls = 0;
    for (const auto& t : rig.gw.transcript("r")) refine_calls += t.role == gateway::Role::refine;
    EXPECT_EQ(refine_calls, 2u);
}

TEST(Steps, EmptyCompletionTwiceIsOptimizerError) {
    auto script = gateway::MockScript::from_json(
        {{"name", "blank"},
         {"rules", {{{"role", "analyze"}, {"response", " "}}, {{"response", "x"}}}}});
    StepRig rig(std::make_shared<gateway::MockBackend>(script));
    auto ex = item(1, "Yes");
    std::vector<Failure> errs = {{ex, core::make_record("x", "no", "Yes", core::AnswerFormat::case_fold_trim)}};
    EXPECT_THROW(rig.opt.analyze_errors("p", errs), OptimizerError);
}

TEST(Loop, LadderReachesCoverageWithOneRevisionPerLevel) {
    testsupport::LoopSetup s;
    s.task = testsupport::yes_no_task(5);
    s.loop.budget = 5;
    auto run = testsupport::run_loop(s, family_backend(testsupport::ladder_family(5)));
    EXPECT_EQ(run.result.termination, Termination::coverage);
    EXPECT_EQ(run.result.revision_count, 5);
    ASSERT_EQ(run.result.score_history.size(), 5u);
    for (const auto& h : run.result.score_history) EXPECT_TRUE(h.score.perfect());
    for (int i = 1; i <= 5; ++i)
        EXPECT_NE(run.result.final_prompt.find("Rule " + std::to_string(i) + "."), std::string::npos);
    EXPECT_EQ(of_kind(run.events, EventKind::accepted).size(), 5u);
    EXPECT_TRUE(harness::replay(run.events).passed());
}

TEST(Loop, EasyLevelAdvancesWithoutRevision) {
    json fam = {{"requirements", {{{"clause", "Rule 3."}, {"min_difficulty", 3}}}}};
    testsupport::LoopSetup s;
    s.task = testsupport::yes_no_task(4);
    s.loop.budget = 4;
    auto run = testsupport::run_loop(s, family_backend(fam));
    EXPECT_EQ(run.result.revision_count, 1);
    auto refined = of_kind(run.events, EventKind::refined);
    ASSERT_EQ(refined.size(), 1u);
    EXPECT_EQ(refined[0]->payload["level"], 3);
}

TEST(Loop, NeverFixableLevelIsAbandonedAfterRetryCap) {
    json fam = {{"requirements", {{{"clause", "Secret."}, {"min_difficulty", 2}, {"max_difficulty", 2},
                                   {"hidden", true}}}}};
    testsupport::LoopSetup s;
    s.task = testsupport::yes_no_task(3);
    s.loop.budget = 3;
    s.loop.local_retry_cap = 2;
    auto run = testsupport::run_loop(s, family_backend(fam));
    auto abandoned = of_kind(run.events, EventKind::abandoned);
    // level 3 re-evaluates the level 2 item, which stays wrong, so it is abandoned too
    ASSERT_EQ(abandoned.size(), 2u);
    EXPECT_EQ(abandoned[0]->payload["level"], 2);
    EXPECT_EQ(abandoned[0]->payload["attempts"], 3);
    EXPECT_EQ(run.result.revision_count, 6);
    EXPECT_EQ(run.result.termination, Termination::budget);
    EXPECT_TRUE(harness::replay(run.events).passed());
}

TEST(Loop, ConflictIsResolvedThroughGlobalRegression) {
    // the level 3 clause breaks level 1 items until its remedy is added
    json fam = {{"requirements", {{{"clause", "Rule A."}, {"min_difficulty", 1}, {"max_difficulty", 1}},
                                  {{"clause", "Rule B."}, {"min_difficulty", 3}}}},
                {"conflicts", {{{"clause", "Rule B."}, {"min_difficulty", 1}, {"max_difficulty", 1},
                                {"remedy", "Rule B applies from level three."}}}},
                {"topic", "toy"}};
    testsupport::LoopSetup s;
    s.task = testsupport::yes_no_task(4);
    s.loop.budget = 4;
    auto run = testsupport::run_loop(s, family_backend(fam));
    auto globals = of_kind(run.events, EventKind::global_confirmed);
    bool saw_regression = false;
    for (const auto* g : globals) saw_regression |= !g->payload["passed"].get<bool>();
    EXPECT_TRUE(saw_regression);
    EXPECT_EQ(run.result.termination, Termination::coverage);
    EXPECT_TRUE(harness::replay(run.events).passed());
}

TEST(Loop, SeedsJoinGlobalConfirmationWhenEnabled) {
    testsupport::LoopSetup s;
    s.task = testsupport::yes_no_task(2);
    s.loop.budget = 2;
    s.loop.include_seeds_in_global = true;
    auto run = testsupport::run_loop(s, family_backend(testsupport::ladder_family(2)));
    for (const auto* e : of_kind(run.events, EventKind::evaluated)) {
        if (e->payload["phase"] == "global") {
            EXPECT_EQ(e->payload["examples"][0], "s1");
        }
    }
    EXPECT_EQ(run.result.termination, Termination::coverage);
}

TEST(Loop, FinalEvaluationPrecedesTermination) {
    testsupport::LoopSetup s;
    s.task = testsupport::yes_no_task(2);
    s.loop.budget = 2;
    auto run = testsupport::run_loop(s, family_backend(testsupport::ladder_family(2)));
    auto n = run.events.size();
    ASSERT_GE(n, 3u);
    EXPECT_EQ(run.events[n - 3].payload["phase"], "final_seed");
    EXPECT_EQ(run.events[n - 2].payload["phase"], "final_synthetic");
    EXPECT_EQ(run.events[n - 1].kind, EventKind::terminated);
    EXPECT_EQ(run.events[n - 3].payload["correct"], 3);
}

TEST(Loop, GenerationFailureEndsWithCap) {
    json fam = testsupport::ladder_family(3);
    fam["vote_rejections"] = {{{"difficulty", 2}, {"voter", 1}}};
    testsupport::LoopSetup s;
    s.task = testsupport::yes_no_task(3);
    s.loop.budget = 3;
    s.gen.voters = true;
    s.gen.regeneration_cap = 1;
    auto run = testsupport::run_loop(s, family_backend(fam));
    EXPECT_EQ(run.result.termination, Termination::cap);
    EXPECT_NE(run.result.reason.find("generation failed"), std::string::npos);
    EXPECT_EQ(run.history.size(), 1u);
    EXPECT_TRUE(harness::replay(run.events).passed());
}

TEST(Loop, EmptyInputsAreConfigErrors) {
    testsupport::LoopSetup s;
    auto backend = family_backend(testsupport::ladder_family(1));
    s.initial_prompt = "   ";
    EXPECT_THROW(testsupport::run_loop(s, backend), ConfigError);
}
