#pragma once

#include <array>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Surface linguistic features of a translation and low-vs-high corpus
// comparison.
namespace ttk::features {

enum class TokenizeMode { character, whitespace, pretokenized };

std::string_view to_string(TokenizeMode m);
TokenizeMode parse_tokenize_mode(std::string_view s);

/// character: every non-space code point is a token. whitespace and
/// pretokenized: split on runs of whitespace (pretokenized input is assumed
/// to be segmented already, so the two differ only in intent).
std::vector<std::string> tokenize(std::string_view text, TokenizeMode mode);

struct Lexicons {
  std::set<std::string, std::less<>> function_words;
  std::set<std::string, std::less<>> pronouns;
  std::set<std::string, std::less<>> punctuation;
  std::set<std::string, std::less<>> sentence_enders;
  /// sha256 over the four lists, recorded in reports.
  std::string hash;

  /// Pronouns that are also listed as function words.
  std::vector<std::string> pronoun_overlap() const;
};

/// One entry per line; blank lines and lines starting with "# " are skipped.
std::set<std::string, std::less<>> parse_lexicon(std::string_view text);

/// The bundled Chinese lists.
Lexicons default_lexicons();

/// Reads function_words.txt, pronouns.txt, punctuation.txt and
/// sentence_enders.txt from `dir`. Every list must be non-empty.
Lexicons load_lexicons(const std::filesystem::path& dir);

struct FeatureVector {
  double mean_sentence_length = 0.0;
  double mean_word_length = 0.0;
  double type_token_ratio = 0.0;
  double func_word_freq = 0.0;
  double pronoun_freq = 0.0;
  double punct_freq = 0.0;
};

inline constexpr std::size_t kFeatureCount = 6;

/// Row names in table order.
std::span<const std::string_view, kFeatureCount> feature_names();
std::array<double, kFeatureCount> as_array(const FeatureVector& f);

/// Sentences end at any sentence-ender token; text after the last ender is
/// one more sentence. Word length counts code points. A token is punctuation
/// when every code point is in the punctuation set.
FeatureVector extract_features(std::string_view text, const Lexicons& lex, TokenizeMode mode);
FeatureVector extract_features(std::span<const std::string> tokens, const Lexicons& lex);

enum class Direction { lower, higher, none };

std::string_view to_string(Direction d);

struct FeatureRow {
  std::string_view name;
  double low = 0.0;
  double high = 0.0;
  double t = 0.0;
  double p_value = 1.0;
  /// Direction reported for high-translationese text relative to low.
  Direction expected = Direction::none;
  Direction observed = Direction::none;
  bool agrees = false;
};

struct CorpusComparison {
  std::vector<FeatureRow> rows;
  std::size_t n_low = 0;
  std::size_t n_high = 0;
  std::string lexicon_hash;
};

/// Macro-averaged features per corpus with a Welch t-test per feature.
/// Both corpora need at least two texts. A feature with zero variance in
/// both corpora and equal means gets t = 0, p = 1.
CorpusComparison corpus_compare(std::span<const std::string> low_texts, std::span<const std::string> high_texts,
                                const Lexicons& lex, TokenizeMode mode = TokenizeMode::character);

/// "feature,low,high,p_value" with %.6g numbers.
std::string to_csv(const CorpusComparison& cmp);

}  // namespace ttk::features
