#include <gtest/gtest.h>

#include "divcov/core/error.hpp"
#include "divcov/core/hash.hpp"
#include "divcov/core/rng.hpp"
#include "divcov/core/serialize.hpp"
#include "divcov/core/text.hpp"
#include "divcov/core/types.hpp"
#include "divcov/core/validate.hpp"
#include "mocks.hpp"

namespace divcov {
namespace {

TEST(Text, MatchForm) {
  EXPECT_EQ(text::match_form("  The  CAT. "), "the cat");
  EXPECT_EQ(text::match_form("Monday!"), "monday");
  EXPECT_EQ(text::match_form("Straße"), text::match_form("STRASSE"));
  // NFC: precomposed and combining forms agree.
  EXPECT_EQ(text::match_form("caf\xC3\xA9"), text::match_form("cafe\xCC\x81"));
}

TEST(Text, Utf8Validation) {
  EXPECT_TRUE(text::is_valid_utf8("星期三"));
  EXPECT_FALSE(text::is_valid_utf8("\xff\xfe"));
  EXPECT_EQ(text::collapse_whitespace("a \t\n b"), "a b");
  EXPECT_EQ(text::trim("  x  "), "x");
}

TEST(Hash, Sha256) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Rng, Deterministic) {
  Rng a(5), b(5);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(uniform_index(a, 100), uniform_index(b, 100));
}

TEST(Types, ArgmaxLowestTies) {
  EXPECT_EQ(argmax_lowest({0.2, 0.5, 0.5}), 1u);
  EXPECT_EQ(argmax_lowest({1.0}), 0u);
}

TEST(Types, AnswerSetValidation) {
  const ModelPool pool = make_pool({"a", "b"});
  AnswerSet s = make_answer_set("q", pool[1], PromptKind::kGAll, {"x", "y"});
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.answers[1].position, 1);
  s.answers[1].position = 5;
  EXPECT_THROW(s.validate(), ContractError);
}

TEST(Types, ScoreTableCompleteness) {
  ScoreTable t({"q1", "q2"}, make_pool({"a", "b"}), 10, PromptKind::kGAll);
  EXPECT_FALSE(t.complete());
  EXPECT_EQ(t.missing().size(), 4u);
  EXPECT_THROW(t.at("q1", 0), IncompleteError);
  for (const char* q : {"q1", "q2"}) {
    for (int m = 0; m < 2; ++m) t.set(q, m, MetricRecord{0.5, 1, 1.0, 1.0});
  }
  EXPECT_TRUE(t.complete());
  EXPECT_NO_THROW(t.require_complete());
  const ScoreTable sub = t.subset({"q2"});
  EXPECT_EQ(sub.query_ids(), std::vector<std::string>{"q2"});
  int reads = 0;
  t.set_access_observer([&](const std::string&) { ++reads; });
  t.at("q1", 1);
  EXPECT_EQ(reads, 1);
}

TEST(Serialize, QueryRoundTrip) {
  Query q{"q1", "Name a day.", AnswerSpace::kFixedSet, std::vector<std::string>{"Monday"}, "days"};
  const std::string bytes = serialize(q);
  EXPECT_EQ(deserialize<Query>(bytes), q);
  EXPECT_EQ(serialize(deserialize<Query>(bytes)), bytes);
}

TEST(Serialize, RejectsUnknownKeysWithPath) {
  try {
    deserialize<Query>(R"({"id":"q","text":"t","space":"open","dataset_tag":"x","extra":1})");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("extra"), std::string::npos);
  }
}

TEST(Serialize, BadSpaceNamesField) {
  try {
    deserialize<Query>(R"({"id":"q","text":"t","space":"weird","dataset_tag":"x"})");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field_path(), "space");
  }
}

TEST(Serialize, ScoreTableRoundTrip) {
  ScoreTable t({"q1", "q2"}, make_pool({"a", "b"}), 10, PromptKind::kGAll);
  for (const char* q : {"q1", "q2"}) {
    for (int m = 0; m < 2; ++m) t.set(q, m, MetricRecord{0.25 * (m + 1), m + 1, 0.5, 1.0});
  }
  const std::string bytes = serialize_score_table(t);
  const ScoreFile back = parse_score_table(bytes);
  EXPECT_EQ(back.table, t);
  EXPECT_EQ(serialize_score_table(back.table), bytes);
}

TEST(Serialize, IncompleteScoreFileRejected) {
  ScoreTable t({"q1"}, make_pool({"a", "b"}), 10, PromptKind::kGAll);
  t.set("q1", 0, MetricRecord{});
  const std::string bytes = serialize_score_table(t);
  EXPECT_THROW(parse_score_table(bytes, true), IncompleteError);
  EXPECT_NO_THROW(parse_score_table(bytes, false));
}

TEST(Serialize, PlanRoundTrip) {
  testing::TempDir dir;
  const ModelPool pool = make_pool({"a", "b"});
  EnsemblePlan plan;
  plan.budget = 10;
  plan.rows.push_back(PlanRow{"q1", {Allocation{pool[0], 5}, Allocation{pool[1], 5}}});
  write_plan(dir.path() / "plan.ndjson", plan);
  EXPECT_EQ(read_plan(dir.path() / "plan.ndjson"), plan);
}

TEST(Serialize, MissingFileIsIncomplete) {
  EXPECT_THROW(read_lines("/nonexistent/divcov.ndjson"), IncompleteError);
}

TEST(Validate, ReportsSortedViolations) {
  std::vector<Query> qs = {
      {"b", "text", AnswerSpace::kFixedSet, std::nullopt, ""},
      {"a", "text", AnswerSpace::kOpenEnded, std::vector<std::string>{"x"}, ""},
      {"c", "text", AnswerSpace::kFixedSet, std::vector<std::string>{"Mon", "mon."}, ""},
      {"c", "", AnswerSpace::kOpenEnded, std::nullopt, ""},
  };
  const ValidationReport r = validate_dataset(qs);
  ASSERT_FALSE(r.ok());
  EXPECT_TRUE(std::is_sorted(r.violations.begin(), r.violations.end()));
  std::set<std::string> ids;
  for (const auto& v : r.violations) ids.insert(v.query_id);
  EXPECT_EQ(ids, (std::set<std::string>{"a", "b", "c"}));
}

TEST(Validate, CleanDataset) {
  testing::World w;
  w.n_queries = 10;
  EXPECT_TRUE(validate_dataset(w.queries()).ok());
}

}  // namespace
}  // namespace divcov
