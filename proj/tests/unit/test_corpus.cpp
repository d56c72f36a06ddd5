#include <gtest/gtest.h>

#include <nlohmann/json.hpp>
#include <set>

#include "builders.hpp"
#include "ttk/corpus.hpp"
#include "ttk/error.hpp"

namespace cp = ttk::corpus;

namespace {

std::string error_of(const std::string& jsonl) {
  try {
    cp::parse_dataset(jsonl);
  } catch (const ttk::ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Dataset, RoundTrip) {
  const auto ds = ttk::testing::make_dataset(2, 2, 3);
  EXPECT_EQ(ds.sources().size(), 6u);
  EXPECT_EQ(ds.translations().size(), 24u);
  const auto again = cp::parse_dataset(cp::serialize_dataset(ds));
  EXPECT_EQ(again.sources(), ds.sources());
  EXPECT_EQ(again.translations(), ds.translations());
  EXPECT_EQ(cp::serialize_dataset(again), cp::serialize_dataset(ds));
}

TEST(Dataset, ErrorsCarryLineNumbers) {
  const std::string src = R"({"kind":"source","id":"s1","genre":"g","text":"t"})" "\n";
  EXPECT_NE(error_of(src + "{not json}\n").find("line 2"), std::string::npos);
  EXPECT_NE(error_of(src + src).find("line 2"), std::string::npos);
  EXPECT_NE(error_of(src + R"({"kind":"translation","id":"t","source_id":"zz","author":"a","condition":"low","text":"x"})")
                .find("line 2"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"kind":"translation","id":"t","source_id":"s1","author":"a","condition":"odd","text":"x"})")
                .find("line 1"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"kind":"source","id":"s1","genre":"g"})").find("text"), std::string::npos);
  EXPECT_NE(error_of(R"({"kind":"source","id":"s1","genre":"g","text":""})").find("empty"), std::string::npos);
}

TEST(Dataset, TranslationMayPrecedeSource) {
  const auto ds = cp::parse_dataset(
      R"({"kind":"translation","id":"t","source_id":"s1","author":"a","condition":"wild","text":"x"})" "\n"
      R"({"kind":"source","id":"s1","genre":"g","text":"t"})" "\n");
  EXPECT_EQ(ds.translations().size(), 1u);
}

TEST(DomainKey, Parse) {
  const auto k = cp::parse_domain_key("news:a:b");
  EXPECT_EQ(k.genre, "news:a");
  EXPECT_EQ(k.author, "b");
  EXPECT_THROW(cp::parse_domain_key("news"), ttk::ValidationError);
  EXPECT_THROW(cp::parse_domain_key(":a"), ttk::ValidationError);
}

TEST(Triplets, BuildAndOrphans) {
  auto jsonl = ttk::testing::dataset_jsonl(1, 2, 2);
  jsonl += R"({"kind":"source","id":"lonely","genre":"g0","text":"t"})" "\n";
  jsonl += R"({"kind":"translation","id":"l1","source_id":"lonely","author":"a0","condition":"low","text":"x"})" "\n";
  jsonl += R"({"kind":"translation","id":"w1","source_id":"lonely","author":"a0","condition":"wild","text":"x"})" "\n";
  const auto built = cp::build_triplets(cp::parse_dataset(jsonl));
  ASSERT_EQ(built.triplets.size(), 4u);
  EXPECT_EQ(built.triplets[0].source.id, "src-g0-0");
  EXPECT_EQ(built.triplets[0].low.author, "a0");
  EXPECT_EQ(built.triplets[1].low.author, "a1");
  for (const auto& t : built.triplets) {
    EXPECT_EQ(t.low.condition, cp::Condition::low);
    EXPECT_EQ(t.high.condition, cp::Condition::high);
    EXPECT_EQ(t.low.source_id, t.source.id);
  }
  ASSERT_EQ(built.orphans.size(), 1u);
  EXPECT_EQ(built.orphans[0].source_id, "lonely");
}

TEST(Triplets, AmbiguousGroupIsAnError) {
  auto jsonl = ttk::testing::dataset_jsonl(1, 1, 1);
  jsonl += R"({"kind":"translation","id":"dup","source_id":"src-g0-0","author":"a0","condition":"low","text":"x"})" "\n";
  EXPECT_THROW(cp::build_triplets(cp::parse_dataset(jsonl)), ttk::ValidationError);
}

TEST(Split, DisjointDeterministicPerDomain) {
  const auto triplets = cp::build_triplets(ttk::testing::make_dataset(2, 2, 10)).triplets;
  const cp::SplitSpec spec{5, 2, 3, 11};
  const auto s1 = cp::split(triplets, spec), s2 = cp::split(triplets, spec);
  EXPECT_EQ(s1.train, s2.train);
  EXPECT_EQ(s1.valid, s2.valid);
  EXPECT_EQ(s1.test, s2.test);
  EXPECT_EQ(s1.train.size(), 20u);
  EXPECT_EQ(s1.valid.size(), 8u);
  EXPECT_EQ(s1.test.size(), 12u);

  std::set<std::pair<std::string, std::string>> seen;
  std::map<cp::DomainKey, int> train_per_domain;
  for (const auto* part : {&s1.train, &s1.valid, &s1.test}) {
    for (const auto& t : *part) EXPECT_TRUE(seen.insert({t.source.id, t.low.author}).second);
  }
  for (const auto& t : s1.train) ++train_per_domain[t.domain()];
  for (const auto& [k, n] : train_per_domain) EXPECT_EQ(n, 5) << cp::to_string(k);

  const auto other = cp::split(triplets, {5, 2, 3, 12});
  EXPECT_NE(other.train, s1.train);
}

TEST(Split, TooFewTriplets) {
  const auto triplets = cp::build_triplets(ttk::testing::make_dataset(1, 1, 4)).triplets;
  EXPECT_THROW(cp::split(triplets, {3, 1, 1, 0}), ttk::ValidationError);
}

TEST(Select, SingleDomainPairsShareSource) {
  const auto triplets = cp::build_triplets(ttk::testing::make_dataset(2, 2, 6)).triplets;
  cp::MixStrategy m{cp::MixKind::single_domain, 4, {{"g1", "a0"}}, 3};
  const auto pairs = cp::select_training_pairs(triplets, m);
  ASSERT_EQ(pairs.size(), 4u);
  std::set<std::string> ids;
  for (const auto& p : pairs) {
    EXPECT_EQ(p.low_source, p.high_source);
    EXPECT_EQ(p.low_source.genre, "g1");
    EXPECT_NE(p.low_text.find("by a0"), std::string::npos);
    EXPECT_EQ(p.low_text.rfind("low", 0), 0u);
    EXPECT_EQ(p.high_text.rfind("high", 0), 0u);
    ids.insert(p.low_source.id);
  }
  EXPECT_EQ(ids.size(), 4u);
  EXPECT_EQ(cp::select_training_pairs(triplets, m), pairs);
  m.k = 7;
  EXPECT_THROW(cp::select_training_pairs(triplets, m), ttk::ValidationError);
}

TEST(Select, UnpairedCrossesDomains) {
  const auto triplets = cp::build_triplets(ttk::testing::make_dataset(2, 1, 5)).triplets;
  const cp::MixStrategy m{cp::MixKind::unpaired, 3, {{"g0", "a0"}, {"g1", "a0"}}, 1};
  const auto pairs = cp::select_training_pairs(triplets, m);
  ASSERT_EQ(pairs.size(), 3u);
  for (const auto& p : pairs) {
    EXPECT_EQ(p.low_source.genre, "g0");
    EXPECT_EQ(p.high_source.genre, "g1");
  }
  const cp::MixStrategy same{cp::MixKind::unpaired, 3, {{"g0", "a0"}, {"g0", "a0"}}, 1};
  EXPECT_THROW(cp::select_training_pairs(triplets, same), ttk::ValidationError);
}

TEST(Select, MixedDomainPoolsAll) {
  const auto triplets = cp::build_triplets(ttk::testing::make_dataset(3, 1, 2)).triplets;
  const cp::MixStrategy m{cp::MixKind::mixed_domain, 6, {}, 5};
  const auto pairs = cp::select_training_pairs(triplets, m);
  std::set<std::string> ids;
  for (const auto& p : pairs) ids.insert(p.low_source.id);
  EXPECT_EQ(ids.size(), 6u);
  EXPECT_EQ(cp::parse_mix_kind("mixed_domain"), cp::MixKind::mixed_domain);
  EXPECT_THROW(cp::parse_mix_kind("other"), ttk::ValidationError);
}

TEST(Sft, RenderBothSides) {
  const auto triplets = cp::build_triplets(ttk::testing::make_dataset(1, 1, 2)).triplets;
  const cp::MixStrategy m{cp::MixKind::single_domain, 2, {{"g0", "a0"}}, 0};
  const auto pairs = cp::select_training_pairs(triplets, m);
  const auto low = cp::render_sft(pairs, cp::Side::low, cp::default_sft_template());
  const auto high = cp::render_sft(pairs, cp::Side::high, "<{source}>");
  const auto first = nlohmann::json::parse(low.substr(0, low.find('\n')));
  EXPECT_EQ(first["prompt"], "Translate the following text into Chinese.\n" + pairs[0].low_source.text + "\n");
  EXPECT_EQ(first["completion"], pairs[0].low_text);
  const auto h = nlohmann::json::parse(high.substr(0, high.find('\n')));
  EXPECT_EQ(h["prompt"], "<" + pairs[0].high_source.text + ">");
  EXPECT_EQ(h["completion"], pairs[0].high_text);
  EXPECT_THROW(cp::render_sft(pairs, cp::Side::low, "nothing"), ttk::ValidationError);
}
