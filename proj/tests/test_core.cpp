#include <gtest/gtest.h>

#include "promptloop/core/canonicalize.hpp"
#include "promptloop/core/digest.hpp"
#include "promptloop/core/events.hpp"
#include "promptloop/core/random.hpp"
#include "promptloop/core/scoring.hpp"
#include "promptloop/core/template.hpp"
#include "promptloop/core/text.hpp"
#include "promptloop/core/types.hpp"
#include "promptloop/errors.hpp"

using namespace promptloop;
using namespace promptloop::core;

TEST(Canonicalize, ExactIsIdentity) {
    EXPECT_EQ(canonicalize_answer("  Yes. ", AnswerFormat::exact), "  Yes. ");
}

TEST(Canonicalize, CaseFoldTrim) {
    EXPECT_EQ(canonicalize_answer("  YES.  ", AnswerFormat::case_fold_trim), "yes");
    EXPECT_EQ(canonicalize_answer("\n\nNo!\nbecause", AnswerFormat::case_fold_trim), "no");
    EXPECT_EQ(canonicalize_answer("Right   Triangle", AnswerFormat::case_fold_trim), "right triangle");
}

TEST(Canonicalize, WordAndNumeral) {
    EXPECT_EQ(canonicalize_answer("six, 6", AnswerFormat::word_and_numeral), "6");
    EXPECT_EQ(canonicalize_answer("6", AnswerFormat::word_and_numeral), "6");
    EXPECT_EQ(canonicalize_answer("I count 12 items", AnswerFormat::word_and_numeral), "12");
    EXPECT_EQ(canonicalize_answer("seven", AnswerFormat::word_and_numeral), "7");
    EXPECT_EQ(canonicalize_answer("None", AnswerFormat::word_and_numeral), "none");
}

TEST(Canonicalize, MultipleChoiceLetter) {
    EXPECT_EQ(canonicalize_answer("(B)", AnswerFormat::mc_letter), "b");
    EXPECT_EQ(canonicalize_answer("c", AnswerFormat::mc_letter), "c");
    EXPECT_EQ(canonicalize_answer("Thinking... <answer>D</answer>", AnswerFormat::mc_letter), "d");
}

TEST(Canonicalize, UnknownRuleIdIsConfigError) {
    EXPECT_THROW(canonicalize_answer("x", "fuzzy"), ConfigError);
    EXPECT_EQ(canonicalize_answer("YES", "case-fold-trim"), "yes");
}

TEST(Canonicalize, IdempotentOnRandomStrings) {
    Rng rng(11);
    const std::string alphabet = "aBc Yz.!(<>)/0123456789\n,answer";
    for (auto rule : {AnswerFormat::exact, AnswerFormat::case_fold_trim, AnswerFormat::word_and_numeral,
                      AnswerFormat::mc_letter}) {
        for (int i = 0; i < 300; ++i) {
            std::string s;
            std::size_t len = uniform_index(rng, 24);
            for (std::size_t k = 0; k < len; ++k) s += alphabet[uniform_index(rng, alphabet.size())];
            auto once = canonicalize_answer(s, rule);
            EXPECT_EQ(canonicalize_answer(once, rule), once) << "input: " << s;
        }
    }
}

TEST(Score, ExactRationalComparison) {
    EXPECT_EQ((Score{1, 3}), (Score{2, 6}));
    EXPECT_LT((Score{2, 3}), (Score{3, 4}));
    EXPECT_TRUE((Score{4, 4}).perfect());
    EXPECT_FALSE((Score{0, 0}).perfect());
}

TEST(Scoring, AccuracyAndErrorSlice) {
    std::vector<EvaluationRecord> recs = {make_record("a", "Yes", "yes", AnswerFormat::case_fold_trim),
                                          make_record("b", "no", "Yes", AnswerFormat::case_fold_trim),
                                          make_record("c", "six, 6", "6", AnswerFormat::word_and_numeral)};
    auto s = accuracy_score(recs);
    EXPECT_EQ(s.correct, 2u);
    EXPECT_EQ(s.total, 3u);
    EXPECT_EQ(error_slice(recs), std::vector<std::string>{"b"});
    EXPECT_THROW(accuracy_score(std::span<const EvaluationRecord>{}), DomainError);
}

TEST(Types, ExampleValidation) {
    LabeledExample seed{"s", "q", "a", 0, Provenance::seed, "t"};
    EXPECT_NO_THROW(validate(seed));
    auto bad = seed;
    bad.difficulty = 2;
    EXPECT_THROW(validate(bad), ConfigError);
    LabeledExample syn{"x", "q", "a", 3, Provenance::synthetic, "t"};
    EXPECT_NO_THROW(validate(syn));
    syn.difficulty = 0;
    EXPECT_THROW(validate(syn), ConfigError);
    syn.difficulty = 1;
    syn.target = "";
    EXPECT_THROW(validate(syn), ConfigError);
}

TEST(Types, TaskValidationChecksSeedLabels) {
    TaskSpec t;
    t.id = "t";
    t.label_space = std::vector<std::string>{"Yes", "No"};
    std::vector<LabeledExample> seeds = {{"s", "q", "Maybe", 0, Provenance::seed, "t"}};
    EXPECT_THROW(validate(t, seeds), ConfigError);
    seeds[0].target = "yes";
    EXPECT_NO_THROW(validate(t, seeds));
    t.difficulty_max = 0;
    EXPECT_THROW(validate(t), ConfigError);
}

TEST(Types, AnswerFormatRoundTrip) {
    for (auto f : {AnswerFormat::exact, AnswerFormat::case_fold_trim, AnswerFormat::word_and_numeral,
                   AnswerFormat::mc_letter})
        EXPECT_EQ(parse_answer_format(to_string(f)), f);
    EXPECT_THROW(parse_answer_format("loose"), ConfigError);
}

TEST(Template, RendersSlotsSinglePass) {
    auto t = PromptTemplate::parse("[System]\nYou are {role}.\n[User]\nSolve {task}. Keep {unknown}.");
    auto r = t.render({{"role", "a {task} solver"}, {"task", "x"}});
    EXPECT_EQ(r.system, "You are a {task} solver.");
    EXPECT_EQ(r.user, "Solve x. Keep {unknown}.");
    EXPECT_TRUE(t.has_slot("task"));
    EXPECT_EQ(t.placeholders(), (std::set<std::string>{"role", "task", "unknown"}));
}

TEST(Template, WithoutMarkersAllUser) {
    auto t = PromptTemplate::parse("Just {x}");
    auto r = t.render({{"x", "this"}});
    EXPECT_EQ(r.system, "");
    EXPECT_EQ(r.user, "Just this");
}

TEST(Template, RequireNamesMissingSlot) {
    auto t = PromptTemplate::parse("{a} and {b}", "demo");
    EXPECT_NO_THROW(t.require({"a", "b"}));
    try {
        t.require({"a", "c"});
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("c"), std::string::npos);
    }
    EXPECT_THROW(PromptTemplate::load("/nonexistent/template.txt"), ConfigError);
}

TEST(Digest, KnownVectors) {
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Events, KindNamesRoundTrip) {
    for (auto k : {EventKind::generated, EventKind::voted, EventKind::evaluated, EventKind::analyzed,
                   EventKind::recommended, EventKind::refined, EventKind::local_confirmed,
                   EventKind::global_confirmed, EventKind::accepted, EventKind::abandoned, EventKind::terminated})
        EXPECT_EQ(parse_event_kind(to_string(k)), k);
    EXPECT_THROW(parse_event_kind("bogus"), ConfigError);
}

TEST(Text, Helpers) {
    EXPECT_EQ(text::trim("  a b \n"), "a b");
    EXPECT_EQ(text::lower("AbC"), "abc");
    EXPECT_EQ(text::split_lines("a\nb\r\nc").size(), 3u);
    EXPECT_EQ(text::ifind("Hello World", "WORLD"), 6u);
    EXPECT_EQ(text::between("x [a] y", "[", "]"), "a");
    EXPECT_EQ(text::replace_all("aXbXc", "X", "--"), "a--b--c");
    EXPECT_EQ(text::count_words(" one two  three "), 3u);
    EXPECT_EQ(text::format_double(0.1), "0.1");
}

TEST(Random, Uniform01InRangeAndSeeded) {
    Rng a(5), b(5);
    for (int i = 0; i < 1000; ++i) {
        double x = uniform01(a);
        EXPECT_GE(x, 0.0);
        EXPECT_LT(x, 1.0);
        EXPECT_EQ(x, uniform01(b));
    }
    EXPECT_NE(mix_seed(1, 1), mix_seed(1, 2));
    Rng c(9);
    for (int i = 0; i < 1000; ++i) EXPECT_LT(uniform_index(c, 7), 7u);
}
