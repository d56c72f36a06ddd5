#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Dataset model for sources, translations and low/high triplets; split
// construction, training-pair selection and SFT export.
namespace ttk::corpus {

enum class Condition { low, high, wild };

std::string_view to_string(Condition c);
/// Throws ValidationError for anything other than "low", "high", "wild".
Condition parse_condition(std::string_view s);

struct SourceText {
  std::string id;
  std::string genre;
  std::string text;

  bool operator==(const SourceText&) const = default;
};

struct TranslationRecord {
  std::string id;
  std::string source_id;
  std::string author;
  Condition condition = Condition::wild;
  std::string text;

  bool operator==(const TranslationRecord&) const = default;
};

/// Sources and translations in file order. Construct through load_dataset()
/// or parse_dataset() to get referential integrity checked.
class Dataset {
 public:
  Dataset() = default;
  /// Validates ids, non-empty text and source references.
  Dataset(std::vector<SourceText> sources, std::vector<TranslationRecord> translations);

  const std::vector<SourceText>& sources() const { return sources_; }
  const std::vector<TranslationRecord>& translations() const { return translations_; }

  const SourceText& source(std::string_view id) const;
  const TranslationRecord* find_translation(std::string_view id) const;
  /// Position of a source in file order.
  std::size_t source_index(std::string_view id) const;

 private:
  std::vector<SourceText> sources_;
  std::vector<TranslationRecord> translations_;
  std::map<std::string, std::size_t, std::less<>> source_by_id_;
  std::map<std::string, std::size_t, std::less<>> translation_by_id_;
};

/// Parses dataset JSONL. Errors carry the 1-based line number.
Dataset parse_dataset(std::string_view jsonl);
Dataset load_dataset(const std::filesystem::path& path);
std::string serialize_dataset(const Dataset& dataset);

struct DomainKey {
  std::string genre;
  std::string author;

  auto operator<=>(const DomainKey&) const = default;
  bool operator==(const DomainKey&) const = default;
};

std::string to_string(const DomainKey& key);
/// "genre:author" (splits on the last ':').
DomainKey parse_domain_key(std::string_view s);

struct Triplet {
  SourceText source;
  TranslationRecord low;
  TranslationRecord high;

  DomainKey domain() const { return {source.genre, low.author}; }
  bool operator==(const Triplet&) const = default;
};

/// An incomplete (source, author) group that could not form a triplet.
struct OrphanReport {
  std::string source_id;
  std::string author;
  std::vector<std::string> translation_ids;
  std::string reason;
};

struct TripletBuild {
  std::vector<Triplet> triplets;
  std::vector<OrphanReport> orphans;
};

/// One triplet per (source_id, author) with exactly one low and one high
/// record, ordered by source file position then author. Wild records are
/// ignored. Two records with the same condition in a group is an ambiguity
/// error; incomplete groups are reported as orphans.
TripletBuild build_triplets(const Dataset& dataset);

struct SplitSpec {
  std::size_t train_n = 0;
  std::size_t valid_n = 0;
  std::size_t test_n = 0;
  std::uint64_t seed = 0;
};

struct Splits {
  std::vector<Triplet> train;
  std::vector<Triplet> valid;
  std::vector<Triplet> test;
};

/// Per-DomainKey seeded split: each domain is shuffled with its own
/// generator (seed mixed with the domain's FNV-1a hash) and contributes
/// train_n/valid_n/test_n triplets. Members keep input order within a split.
/// Throws ValidationError if a domain has too few triplets.
Splits split(const std::vector<Triplet>& triplets, const SplitSpec& spec);

enum class MixKind { unpaired, single_domain, mixed_domain };

std::string_view to_string(MixKind k);
MixKind parse_mix_kind(std::string_view s);

struct MixStrategy {
  MixKind kind = MixKind::single_domain;
  std::size_t k = 1;
  /// unpaired: exactly {A, B}; single_domain: exactly one; mixed_domain:
  /// optional filter (empty = every domain present).
  std::vector<DomainKey> domains;
  std::uint64_t seed = 0;
};

/// One SFT example per side. Paired strategies use the same source on both
/// sides; the unpaired strategy breaks the pairing on purpose.
struct TrainingPair {
  SourceText low_source;
  std::string low_text;
  SourceText high_source;
  std::string high_text;

  bool operator==(const TrainingPair&) const = default;
};

std::vector<TrainingPair> select_training_pairs(const std::vector<Triplet>& triplets,
                                                const MixStrategy& strategy);

enum class Side { low, high };

/// Default SFT prompt template (bundled data file sft_template.txt).
std::string_view default_sft_template();

/// JSONL with one {"prompt","completion"} object per pair, in input order.
std::string render_sft(const std::vector<TrainingPair>& pairs, Side side, std::string_view tmpl);
void export_sft(const std::vector<TrainingPair>& pairs, Side side, std::string_view tmpl,
                const std::filesystem::path& path);

}  // namespace ttk::corpus
