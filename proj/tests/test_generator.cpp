#include <map>

#include <gtest/gtest.h>

#include "promptloop/errors.hpp"
#include "promptloop/generator/generator.hpp"
#include "promptloop/generator/prior.hpp"
#include "promptloop/harness/runlog.hpp"
#include "support.hpp"

using namespace promptloop;
using namespace promptloop::generator;
using nlohmann::json;
using testsupport::of_kind;

namespace {

/// One generator wired to an in-memory log.
struct Rig {
    std::shared_ptr<gateway::MockBackend> backend;
    gateway::Gateway gw;
    harness::RunLog log;
    gateway::ModelSession session;
    GenerationContext ctx;
    std::optional<geometry::TemplateLibrary> library;
    std::unique_ptr<DataGenerator> gen;

    Rig(const json& family, GeneratorConfig config = {}, core::TaskSpec task = testsupport::yes_no_task(),
        json extra_rules = json::array(), std::uint64_t seed = 3)
        : backend(std::make_shared<gateway::MockBackend>(testsupport::family_script(family, "gen", extra_rules))),
          gw(backend),
          log({}, &gw, "r"),
          session(gw, "r") {
        gw.open_run("r");
        auto seeds = testsupport::toy_seeds();
        if (task.geometry) {
            seeds = {{"g1", "<path d=\"M 0,0 L 1,0 L 0,1 Z\"/>", "triangle", 0, core::Provenance::seed, task.id},
                     {"g2", "<path d=\"M 0,0 L 1,0 L 1,1 L 0,1 Z\"/>", "kite", 0, core::Provenance::seed, task.id}};
            library = geometry::TemplateLibrary::load(testsupport::data_dir() / "geometry_templates");
        }
        ctx.prior = estimate_prior(seeds, task.label_space, task.answer_format);
        ctx.seeds = seeds;
        ctx.schedule = build_schedule(task);
        ctx.rng_seed = seed;
        gen = std::make_unique<DataGenerator>(task, ctx, testsupport::shipped_generator_templates(), config, session,
                                              log, library ? &*library : nullptr);
    }
};

core::TaskSpec shape_task() {
    core::TaskSpec t;
    t.id = "shapes";
    t.description = "Name the shape.";
    auto labels = geometry::ShapeRuleTable::standard().label_space();
    t.label_space = std::vector<std::string>(labels.begin(), labels.end());
    t.difficulty_max = 12;
    t.geometry = true;
    return t;
}

}  // namespace

TEST(Prior, AddOneSmoothing) {
    auto seeds = testsupport::toy_seeds();  // Yes, No, Yes
    auto p = estimate_prior(seeds, std::vector<std::string>{"Yes", "No", "Maybe"});
    ASSERT_EQ(p.labels, (std::vector<std::string>{"Yes", "No", "Maybe"}));
    EXPECT_DOUBLE_EQ(p.probabilities[0], 3.0 / 6.0);
    EXPECT_DOUBLE_EQ(p.probabilities[1], 2.0 / 6.0);
    EXPECT_DOUBLE_EQ(p.probabilities[2], 1.0 / 6.0);
    EXPECT_NO_THROW(p.validate());
}

TEST(Prior, WithoutLabelSpaceUsesSortedSeedTargets) {
    auto p = estimate_prior(testsupport::toy_seeds(), std::nullopt);
    EXPECT_EQ(p.labels, (std::vector<std::string>{"No", "Yes"}));
    EXPECT_DOUBLE_EQ(p.probabilities[0], 2.0 / 5.0);
}

TEST(Prior, MatchesTargetsCanonically) {
    std::vector<core::LabeledExample> seeds = {{"a", "q", "yes", 0, core::Provenance::seed, ""}};
    auto p = estimate_prior(seeds, std::vector<std::string>{"Yes", "No"}, core::AnswerFormat::case_fold_trim);
    EXPECT_DOUBLE_EQ(p.probabilities[0], 2.0 / 3.0);
}

TEST(Prior, Validation) {
    LabelPrior p{{"a", "b"}, {0.5}};
    EXPECT_THROW(p.validate(), ConfigError);
    p.probabilities = {0.7, 0.7};
    EXPECT_THROW(p.validate(), ConfigError);
    p.probabilities = {1.2, -0.2};
    EXPECT_THROW(p.validate(), ConfigError);
    p.probabilities = {0.0, 0.0};
    EXPECT_THROW(p.validate(), ConfigError);
    p.probabilities = {0.25, 0.75};
    EXPECT_NO_THROW(p.validate());
    EXPECT_EQ(p.index_of("b"), 1u);
    EXPECT_FALSE(p.index_of("c"));
}

TEST(Prior, DrawFollowsDistribution) {
    LabelPrior p{{"a", "b", "c"}, {0.2, 0.5, 0.3}};
    core::Rng rng(1);
    std::map<std::string, int> counts;
    const int n = 50000;
    for (int i = 0; i < n; ++i) ++counts[draw_label(p, rng)];
    EXPECT_NEAR(counts["a"] / double(n), 0.2, 0.01);
    EXPECT_NEAR(counts["b"] / double(n), 0.5, 0.01);
    EXPECT_NEAR(counts["c"] / double(n), 0.3, 0.01);
}

TEST(Prior, DrawNeverPicksZeroMass) {
    LabelPrior p{{"a", "b", "c"}, {0.0, 1.0, 0.0}};
    core::Rng rng(2);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(draw_label(p, rng), "b");
}

TEST(Prior, EmpiricalKl) {
    LabelPrior p{{"a", "b", "c"}, {1.0 / 3, 1.0 / 3, 1.0 / 3}};
    EXPECT_NEAR(empirical_label_kl({"a", "b", "c", "c"}, p), 0.05889151782819172726939705473526085253424, 1e-15);
    EXPECT_THROW(empirical_label_kl({}, p), DomainError);
    LabelPrior q{{"a", "b"}, {1.0, 0.0}};
    EXPECT_THROW(empirical_label_kl({"b"}, q), DivergenceUndefinedError);
    EXPECT_THROW(empirical_label_kl({"z"}, p), DivergenceUndefinedError);
}

TEST(Prior, Schedule) {
    auto t = testsupport::yes_no_task(4);
    EXPECT_EQ(build_schedule(t), (std::vector<int>{1, 2, 3, 4}));
}

TEST(Parse, GeneratedReply) {
    auto r = parse_generated("Question: Is it raining?\nAnswer: Yes\nextra");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->first, "Is it raining?");
    EXPECT_EQ(r->second, "Yes");
    auto twice = parse_generated("Question: Give the answer: what?\nAnswer: the first\nAnswer: No");
    ASSERT_TRUE(twice);
    EXPECT_EQ(twice->second, "No");
    EXPECT_FALSE(parse_generated("just chatting"));
    EXPECT_FALSE(parse_generated("Question: x\nAnswer:   "));
    EXPECT_EQ(extract_path_data("see <path d=\"M 1,1 L 2,2\"/> here"), "M 1,1 L 2,2");
    EXPECT_FALSE(extract_path_data("no path"));
}

TEST(Context, AppendRejectsEasierExamples) {
    GenerationContext ctx;
    ctx.append({"a", "q", "Yes", 3, core::Provenance::synthetic, ""});
    ctx.append({"b", "q", "No", 3, core::Provenance::synthetic, ""});
    EXPECT_THROW(ctx.append({"c", "q", "No", 2, core::Provenance::synthetic, ""}), DomainError);
    EXPECT_EQ(ctx.history_labels(), (std::vector<std::string>{"Yes", "No"}));
}

TEST(Generator, LabelIsFixedBeforeFirstGenerationCall) {
    Rig rig(testsupport::ladder_family(5));
    for (int c = 1; c <= 5; ++c) rig.gen->next(c);
    auto transcript = rig.gw.transcript("r");
    for (const auto* e : of_kind(rig.log.events(), core::EventKind::generated)) {
        auto fixed = e->payload["label_fixed_at"].get<std::size_t>();
        auto idx = e->payload["request_index"].get<std::size_t>();
        EXPECT_LE(fixed, idx);
        EXPECT_EQ(transcript[idx].role, gateway::Role::generate);
        EXPECT_EQ(transcript[idx].request_digest, e->payload["request_digest"]);
        // no generate call happened between fixing the label and the request
        for (std::size_t i = fixed; i < idx; ++i) EXPECT_NE(transcript[i].role, gateway::Role::generate);
        EXPECT_EQ(e->payload["example"]["target"], e->payload["label"]);
    }
    EXPECT_EQ(rig.ctx.history.size(), 5u);
    EXPECT_EQ(rig.ctx.history.back().difficulty, 5);
}

TEST(Generator, CueComesFromPreviousExample) {
    Rig rig(testsupport::ladder_family(3));
    rig.gen->next(1);
    rig.gen->next(2);
    auto gens = of_kind(rig.log.events(), core::EventKind::generated);
    EXPECT_EQ(gens[0]->payload["cue"], "");
    EXPECT_NE(gens[1]->payload["cue"].get<std::string>().find("level 1"), std::string::npos);
    EXPECT_FALSE(gens[1]->payload["cue_fallback"].get<bool>());
}

TEST(Generator, SummaryFallbackUsesRawInput) {
    // summarize requests never match a family rule here
    json fam = testsupport::ladder_family(3);
    auto script = gateway::MockScript::from_json(
        {{"name", "nosum"},
         {"family", fam},
         {"rules", {{{"role", "generate"}, {"behavior", "family-generate"}}, {{"response", "   "}}}}});
    auto backend = std::make_shared<gateway::MockBackend>(script);
    gateway::Gateway gw(backend);
    harness::RunLog log({}, &gw, "r");
    gateway::ModelSession session(gw, "r");
    GenerationContext ctx;
    ctx.prior = estimate_prior(testsupport::toy_seeds(), std::vector<std::string>{"Yes", "No"});
    ctx.seeds = testsupport::toy_seeds();
    DataGenerator gen(testsupport::yes_no_task(), ctx, testsupport::shipped_generator_templates(), {}, session, log);
    core::LabeledExample ex{"x", "raw question text", "Yes", 1, core::Provenance::synthetic, ""};
    bool fallback = false;
    EXPECT_EQ(gen.summarize_previous(ex, &fallback), "raw question text");
    EXPECT_TRUE(fallback);
}

TEST(Generator, GarbledReplyIsRetriedWithFormatNote) {
    json fam = testsupport::ladder_family(3);
    fam["garble_difficulties"] = {2};
    Rig rig(fam);
    rig.gen->next(1);
    auto before = rig.gw.transcript_size("r");
    auto ex = rig.gen->next(2);
    EXPECT_EQ(ex.difficulty, 2);
    std::size_t generate_calls = 0;
    auto t = rig.gw.transcript("r");
    for (std::size_t i = before; i < t.size(); ++i) generate_calls += t[i].role == gateway::Role::generate;
    EXPECT_EQ(generate_calls, 2u);
}

TEST(Generator, ParseRetriesExhaustedIsGenerationError) {
    auto script = gateway::MockScript::from_json({{"name", "chatty"}, {"rules", {{{"response", "no structure"}}}}});
    auto backend = std::make_shared<gateway::MockBackend>(script);
    gateway::Gateway gw(backend);
    harness::RunLog log({}, &gw, "r");
    gateway::ModelSession session(gw, "r");
    GenerationContext ctx;
    ctx.prior = estimate_prior(testsupport::toy_seeds(), std::vector<std::string>{"Yes", "No"});
    ctx.seeds = testsupport::toy_seeds();
    GeneratorConfig cfg;
    cfg.parse_retries = 2;
    DataGenerator gen(testsupport::yes_no_task(), ctx, testsupport::shipped_generator_templates(), cfg, session, log);
    EXPECT_THROW(gen.next(1), GenerationError);
    EXPECT_TRUE(ctx.history.empty());
}

TEST(Generator, MismatchedAnswerIsRegenerated) {
    // the first reply answers "Maybe"; the retry carries a rejection note and falls through to the family
    json extra = json::array({{{"role", "generate"},
                               {"contains", {"Target label"}},
                               {"response", "Question: odd one [difficulty: 1] [answer: Maybe] [attempt: 0]\nAnswer: Maybe"}}});
    // rule order: the literal rule wins only while no rejection note is present
    extra[0]["contains"] = {"Target label for the new item"};
    auto script_json = json{{"name", "mm"},
                            {"family", testsupport::ladder_family(2)},
                            {"rules",
                             {{{"role", "generate"}, {"contains", {"Previous attempt was rejected"}},
                               {"behavior", "family-generate"}},
                              extra[0],
                              {{"response", "fallback"}}}}};
    auto backend = std::make_shared<gateway::MockBackend>(gateway::MockScript::from_json(script_json));
    gateway::Gateway gw(backend);
    harness::RunLog log({}, &gw, "r");
    gateway::ModelSession session(gw, "r");
    GenerationContext ctx;
    ctx.prior = estimate_prior(testsupport::toy_seeds(), std::vector<std::string>{"Yes", "No"});
    ctx.seeds = testsupport::toy_seeds();
    DataGenerator gen(testsupport::yes_no_task(), ctx, testsupport::shipped_generator_templates(), {}, session, log);
    auto ex = gen.next(1);
    auto g = of_kind(log.events(), core::EventKind::generated);
    ASSERT_EQ(g.size(), 1u);
    EXPECT_EQ(g[0]->payload["attempts"], 2);
    EXPECT_NE(g[0]->payload["rejections"][0]["reason"].get<std::string>().find("does not match"), std::string::npos);
    EXPECT_EQ(ex.target, g[0]->payload["label"]);
}

TEST(Generator, VotersMakeExactlyThreeCallsPerCandidate) {
    json fam = testsupport::ladder_family(4);
    fam["vote_rejections"] = {{{"difficulty", 2}, {"voter", 2}, {"attempts", {0, 1}}}};
    GeneratorConfig cfg;
    cfg.voters = true;
    Rig rig(fam, cfg);
    for (int c = 1; c <= 4; ++c) rig.gen->next(c);
    auto voted = of_kind(rig.log.events(), core::EventKind::voted);
    ASSERT_EQ(voted.size(), 6u);  // levels 1, 3, 4 once; level 2 three times
    for (const auto* v : voted) {
        std::size_t vote_calls = 0;
        for (const auto& c : v->calls) vote_calls += c.role == "vote";
        EXPECT_EQ(vote_calls, 3u);
        EXPECT_EQ(v->calls.back().role, "vote");
        EXPECT_EQ(v->payload["votes"].size(), 3u);
    }
    auto gens = of_kind(rig.log.events(), core::EventKind::generated);
    EXPECT_EQ(gens[1]->payload["attempts"], 3);
    EXPECT_EQ(gens[1]->payload["rejections"].size(), 2u);
}

TEST(Generator, VotersOffMakeNoVoteCalls) {
    json fam = testsupport::ladder_family(3);
    fam["vote_rejections"] = {{{"difficulty", 2}, {"voter", 1}}};
    Rig rig(fam);
    for (int c = 1; c <= 3; ++c) rig.gen->next(c);
    for (const auto& t : rig.gw.transcript("r")) EXPECT_NE(t.role, gateway::Role::vote);
    EXPECT_TRUE(of_kind(rig.log.events(), core::EventKind::voted).empty());
}

TEST(Generator, RegenerationCapIsGenerationError) {
    json fam = testsupport::ladder_family(2);
    fam["vote_rejections"] = {{{"difficulty", 1}, {"voter", 3}}};
    GeneratorConfig cfg;
    cfg.voters = true;
    cfg.regeneration_cap = 2;
    Rig rig(fam, cfg);
    EXPECT_THROW(rig.gen->next(1), GenerationError);
    EXPECT_EQ(of_kind(rig.log.events(), core::EventKind::voted).size(), 3u);
    EXPECT_TRUE(rig.ctx.history.empty());
}

TEST(Generator, GeometryReverseCheckRejectsCorruptedPaths) {
    json fam = {{"topic", "svg"}, {"corrupt_geometry_difficulties", {2, 5}}};
    GeneratorConfig cfg;
    cfg.geometry = true;
    Rig rig(fam, cfg, shape_task(), json::array(), 11);
    for (int c = 1; c <= 6; ++c) rig.gen->next(c);
    for (const auto* e : of_kind(rig.log.events(), core::EventKind::generated)) {
        auto label = e->payload["label"].get<std::string>();
        auto input = e->payload["example"]["input"].get<std::string>();
        auto d = extract_path_data(input);
        ASSERT_TRUE(d);
        EXPECT_TRUE(geometry::reverse_check(*d, label).accepted) << input;
        EXPECT_EQ(geometry::to_string(geometry::normalize_precision(geometry::parse_path(*d))), *d);
        int level = e->payload["level"];
        bool corrupt = level == 2 || level == 5;
        // dropping a segment always breaks the count unless the label is arc-based
        if (corrupt && label != "sector" && label != "circle") {
            EXPECT_EQ(e->payload["attempts"], 2) << label;
            EXPECT_NE(e->payload["rejections"][0]["reason"].get<std::string>().find("reverse check"), std::string::npos);
        }
    }
}

TEST(Generator, SameSeedSameExamples) {
    Rig a(testsupport::ladder_family(4)), b(testsupport::ladder_family(4));
    for (int c = 1; c <= 4; ++c) EXPECT_EQ(a.gen->next(c).input, b.gen->next(c).input);
}

TEST(Generator, ConstructorChecks) {
    auto backend = std::make_shared<gateway::MockBackend>(testsupport::family_script(testsupport::ladder_family(1)));
    gateway::Gateway gw(backend);
    core::NullSink sink;
    gateway::ModelSession session(gw, "r");
    GenerationContext ctx;
    ctx.prior = estimate_prior(testsupport::toy_seeds(), std::vector<std::string>{"Yes", "No"});
    ctx.seeds = {testsupport::toy_seeds()[0]};
    EXPECT_THROW(DataGenerator(testsupport::yes_no_task(), ctx, testsupport::shipped_generator_templates(), {},
                               session, sink),
                 ConfigError);
    ctx.seeds = testsupport::toy_seeds();
    GeneratorConfig geo;
    geo.geometry = true;
    EXPECT_THROW(DataGenerator(testsupport::yes_no_task(), ctx, testsupport::shipped_generator_templates(), geo,
                               session, sink),
                 ConfigError);
}

TEST(Templates, GenerateTemplateNeedsSlots) {
    auto t = testsupport::shipped_generator_templates();
    EXPECT_NO_THROW(t.check());
    t.generate = core::PromptTemplate::parse("Make something at {c}.");
    EXPECT_THROW(t.check(), ConfigError);
}
