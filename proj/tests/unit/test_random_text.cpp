#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "ttk/error.hpp"
#include "ttk/hash.hpp"
#include "ttk/numeric.hpp"
#include "ttk/random.hpp"
#include "ttk/resources.hpp"
#include "ttk/text.hpp"

// Reference values computed with an independent Python implementation.
TEST(Random, SplitmixReference) {
  std::uint64_t state = 0;
  EXPECT_EQ(ttk::splitmix64(state), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(state, 0x9E3779B97F4A7C15ULL);
}

TEST(Random, XorshiftReferenceStreams) {
  ttk::Xorshift64Star zero(0);
  EXPECT_EQ(zero.next(), 0x7bbcb40d550682d0ULL);
  EXPECT_EQ(zero.next(), 0xde7fe413d00cc9fdULL);
  EXPECT_EQ(zero.next(), 0xb3c638353c668c91ULL);
  ttk::Xorshift64Star answer(42);
  EXPECT_EQ(answer.next(), 0x31b0ece7c4f697a2ULL);
  EXPECT_EQ(answer.next(), 0x9008a3b1cb686f03ULL);
  EXPECT_EQ(answer.next(), 0x7c7173abd97be16fULL);
}

TEST(Random, Fnv1a) {
  EXPECT_EQ(ttk::fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(ttk::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Random, DrawRanges) {
  ttk::Xorshift64Star rng(7);
  double lo = 1, hi = 0, sum = 0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    EXPECT_LT(rng.below(13), 13u);
    const double z = rng.normal();
    EXPECT_LE(std::abs(z), 6.0);
    sum += z;
  }
  EXPECT_GE(lo, 0.0);
  EXPECT_LT(hi, 1.0);
  EXPECT_NEAR(sum / 20000, 0.0, 0.05);
  EXPECT_THROW(rng.below(0), std::invalid_argument);
}

TEST(Random, SampleIndicesArePermutationPrefix) {
  ttk::Xorshift64Star rng(1);
  const auto idx = rng.sample_indices(10, 10);
  EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), 10u);
  ttk::Xorshift64Star a(9), b(9);
  EXPECT_EQ(a.sample_indices(50, 7), b.sample_indices(50, 7));
}

TEST(Hash, Sha256KnownVector) {
  EXPECT_EQ(ttk::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_THROW(ttk::sha256_file("/nonexistent/path/x"), ttk::IoError);
}

TEST(Text, Utf8Splitting) {
  const auto chars = ttk::text::utf8_chars("a中b。");
  ASSERT_EQ(chars.size(), 4u);
  EXPECT_EQ(chars[1], "中");
  EXPECT_EQ(chars[3], "。");
  EXPECT_EQ(ttk::text::utf8_length("\xff" "a"), 2u);
  EXPECT_TRUE(ttk::text::is_space("\xe3\x80\x80"));
  EXPECT_FALSE(ttk::text::is_space("x"));
}

TEST(Text, Templates) {
  EXPECT_EQ(ttk::text::render_template("X {source} Y {source}", "s"), "X s Y s");
  EXPECT_THROW(ttk::text::render_template("no slot", "s"), ttk::ValidationError);
}

TEST(Text, SplitLines) {
  const auto lines = ttk::text::split_lines("a\r\nb\n\nc\n");
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "a");
  EXPECT_EQ(lines[2], "");
  EXPECT_EQ(lines[3], "c");
}

TEST(Text, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "ttk_text_roundtrip.bin";
  ttk::text::write_file(path, std::string("x\0y", 3));
  EXPECT_EQ(ttk::text::read_file(path), std::string("x\0y", 3));
  std::filesystem::remove(path);
  EXPECT_THROW(ttk::text::read_file(path), ttk::IoError);
}

TEST(Numeric, PairwiseSumIsAccurate) {
  std::vector<double> xs(1 << 20, 0.1);
  EXPECT_NEAR(ttk::pairwise_sum(xs), 0.1 * (1 << 20), 1e-6);
  std::vector<double> empty;
  EXPECT_EQ(ttk::pairwise_sum(empty), 0.0);
}

TEST(Resources, BundledFiles) {
  EXPECT_TRUE(ttk::resources::find("sft_template.txt").has_value());
  EXPECT_TRUE(ttk::resources::find("prompts/vanilla.txt").has_value());
  EXPECT_FALSE(ttk::resources::find("nope").has_value());
}
