#include "ttk/features.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "ttk/error.hpp"
#include "ttk/hash.hpp"
#include "ttk/numeric.hpp"
#include "ttk/resources.hpp"
#include "ttk/stats.hpp"
#include "ttk/text.hpp"

namespace ttk::features {
namespace {

constexpr std::array<std::string_view, kFeatureCount> kNames{
    "mean_sentence_length", "mean_word_length", "type_token_ratio",
    "func_word_freq",       "pronoun_freq",     "punct_freq"};

// Longer sentences and words, richer vocabulary and more punctuation are
// typical of idiomatic text; literal translation leans on function words and
// explicit pronouns.
constexpr std::array<Direction, kFeatureCount> kExpected{Direction::lower,  Direction::lower,
                                                         Direction::lower,  Direction::higher,
                                                         Direction::higher, Direction::lower};

constexpr std::array<std::string_view, 4> kLexiconFiles{"function_words.txt", "pronouns.txt", "punctuation.txt",
                                                        "sentence_enders.txt"};

std::string lexicon_hash(const Lexicons& lex) {
  std::string blob;
  for (const auto* list : {&lex.function_words, &lex.pronouns, &lex.punctuation, &lex.sentence_enders}) {
    for (const auto& entry : *list) {
      blob += entry;
      blob.push_back('\n');
    }
    blob.push_back('\x1e');
  }
  return sha256_hex(blob);
}

Lexicons assemble(std::array<std::string, 4> texts, std::string_view origin) {
  Lexicons lex;
  lex.function_words = parse_lexicon(texts[0]);
  lex.pronouns = parse_lexicon(texts[1]);
  lex.punctuation = parse_lexicon(texts[2]);
  lex.sentence_enders = parse_lexicon(texts[3]);
  const std::array lists{&lex.function_words, &lex.pronouns, &lex.punctuation, &lex.sentence_enders};
  for (std::size_t i = 0; i < lists.size(); ++i) {
    if (lists[i]->empty()) {
      throw ValidationError(std::string(origin) + "/" + std::string(kLexiconFiles[i]) + " has no entries");
    }
  }
  for (const auto& e : lex.sentence_enders) {
    if (text::utf8_length(e) != 1) throw ValidationError("sentence ender \"" + e + "\" is not a single character");
  }
  for (const auto& e : lex.punctuation) {
    if (text::utf8_length(e) != 1) throw ValidationError("punctuation entry \"" + e + "\" is not a single character");
  }
  lex.hash = lexicon_hash(lex);
  return lex;
}

Direction direction_of(double low, double high) {
  if (high < low) return Direction::lower;
  if (high > low) return Direction::higher;
  return Direction::none;
}

}  // namespace

std::string_view to_string(TokenizeMode m) {
  switch (m) {
    case TokenizeMode::character: return "character";
    case TokenizeMode::whitespace: return "whitespace";
    case TokenizeMode::pretokenized: return "pretokenized";
  }
  return "?";
}

TokenizeMode parse_tokenize_mode(std::string_view s) {
  if (s == "character") return TokenizeMode::character;
  if (s == "whitespace") return TokenizeMode::whitespace;
  if (s == "pretokenized") return TokenizeMode::pretokenized;
  throw ValidationError("unknown tokenize mode \"" + std::string(s) + "\"");
}

std::vector<std::string> tokenize(std::string_view text, TokenizeMode mode) {
  std::vector<std::string> tokens;
  const auto chars = text::utf8_chars(text);
  if (mode == TokenizeMode::character) {
    for (auto& c : chars) {
      if (!text::is_space(c)) tokens.push_back(std::move(c));
    }
    return tokens;
  }
  std::string current;
  for (const auto& c : chars) {
    if (text::is_space(c)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> Lexicons::pronoun_overlap() const {
  std::vector<std::string> out;
  std::set_intersection(pronouns.begin(), pronouns.end(), function_words.begin(), function_words.end(),
                        std::back_inserter(out));
  return out;
}

std::set<std::string, std::less<>> parse_lexicon(std::string_view text) {
  std::set<std::string, std::less<>> out;
  for (auto line : text::split_lines(text)) {
    if (line.starts_with("# ") || line == "#") continue;
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (!line.empty()) out.emplace(line);
  }
  return out;
}

Lexicons default_lexicons() {
  std::array<std::string, 4> texts;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    texts[i] = std::string(resources::get("lexicons/zh/" + std::string(kLexiconFiles[i])));
  }
  return assemble(std::move(texts), "bundled lexicons/zh");
}

Lexicons load_lexicons(const std::filesystem::path& dir) {
  std::array<std::string, 4> texts;
  for (std::size_t i = 0; i < texts.size(); ++i) texts[i] = text::read_file(dir / kLexiconFiles[i]);
  return assemble(std::move(texts), dir.string());
}

std::span<const std::string_view, kFeatureCount> feature_names() { return kNames; }

std::array<double, kFeatureCount> as_array(const FeatureVector& f) {
  return {f.mean_sentence_length, f.mean_word_length, f.type_token_ratio,
          f.func_word_freq,       f.pronoun_freq,     f.punct_freq};
}

FeatureVector extract_features(std::string_view text, const Lexicons& lex, TokenizeMode mode) {
  const auto tokens = tokenize(text, mode);
  return extract_features(tokens, lex);
}

FeatureVector extract_features(std::span<const std::string> tokens, const Lexicons& lex) {
  if (tokens.empty()) throw ValidationError("cannot extract features from a text with zero tokens");
  std::size_t sentences = 0, chars = 0, func = 0, pron = 0, punct = 0;
  bool open = false;  // tokens seen since the last sentence ender
  std::set<std::string_view> types;
  for (const auto& tok : tokens) {
    types.insert(tok);
    const auto cps = text::utf8_chars(tok);
    chars += cps.size();
    if (lex.function_words.contains(tok)) ++func;
    if (lex.pronouns.contains(tok)) ++pron;
    const bool is_punct =
        std::all_of(cps.begin(), cps.end(), [&](const std::string& c) { return lex.punctuation.contains(c); });
    if (is_punct) ++punct;
    // In pre-segmented input the ender may be glued to the last word.
    if (!cps.empty() && lex.sentence_enders.contains(cps.back())) {
      ++sentences;
      open = false;
    } else {
      open = true;
    }
  }
  if (open) ++sentences;
  const double n = static_cast<double>(tokens.size());
  FeatureVector f;
  f.mean_sentence_length = n / static_cast<double>(sentences);
  f.mean_word_length = static_cast<double>(chars) / n;
  f.type_token_ratio = static_cast<double>(types.size()) / n;
  f.func_word_freq = static_cast<double>(func) / n;
  f.pronoun_freq = static_cast<double>(pron) / n;
  f.punct_freq = static_cast<double>(punct) / n;
  return f;
}

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::lower: return "lower";
    case Direction::higher: return "higher";
    case Direction::none: return "none";
  }
  return "?";
}

CorpusComparison corpus_compare(std::span<const std::string> low_texts, std::span<const std::string> high_texts,
                                const Lexicons& lex, TokenizeMode mode) {
  if (low_texts.size() < 2 || high_texts.size() < 2) {
    throw ValidationError("corpus comparison needs at least two texts per corpus");
  }
  auto columns = [&](std::span<const std::string> texts) {
    std::array<std::vector<double>, kFeatureCount> cols;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      FeatureVector f;
      try {
        f = extract_features(texts[i], lex, mode);
      } catch (const ValidationError& e) {
        throw ValidationError("text " + std::to_string(i) + ": " + e.what());
      }
      const auto values = as_array(f);
      for (std::size_t j = 0; j < kFeatureCount; ++j) cols[j].push_back(values[j]);
    }
    return cols;
  };
  const auto low = columns(low_texts);
  const auto high = columns(high_texts);

  CorpusComparison out;
  out.n_low = low_texts.size();
  out.n_high = high_texts.size();
  out.lexicon_hash = lex.hash;
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    FeatureRow row;
    row.name = kNames[j];
    row.low = mean(low[j]);
    row.high = mean(high[j]);
    try {
      const auto t = stats::ttest_independent(high[j], low[j], stats::TTestVariant::welch);
      row.t = t.t;
      row.p_value = t.p;
    } catch (const UndefinedScoreError&) {
      row.t = 0.0;
      row.p_value = 1.0;
    }
    row.expected = kExpected[j];
    row.observed = direction_of(row.low, row.high);
    row.agrees = row.observed == row.expected;
    out.rows.push_back(row);
  }
  return out;
}

std::string to_csv(const CorpusComparison& cmp) {
  std::string out = "feature,low,high,p_value\n";
  char buf[64];
  for (const auto& row : cmp.rows) {
    out += row.name;
    for (double v : {row.low, row.high, row.p_value}) {
      std::snprintf(buf, sizeof buf, ",%.6g", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace ttk::features
