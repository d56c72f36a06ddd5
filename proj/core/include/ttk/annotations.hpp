#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ttk/stats.hpp"

// Human judgments: pointwise Likert ratings and forced-choice pairwise votes,
// their aggregation, and agreement with automatic scores.
namespace ttk::annotations {

using stats::Choice;

struct PointwiseRating {
  std::string item_id;
  std::string annotator_id;
  int rating = 0;  // 0..5
};

/// `choice` names the translation judged to carry MORE translationese.
struct PairwiseVote {
  std::string pair_id;
  std::string annotator_id;
  Choice choice = Choice::A;
};

struct PairJudgment {
  std::string pair_id;
  Choice majority = Choice::A;
  int agreement_count = 0;
  int n_votes = 0;
};

/// Binds a pair to the two translation ids it compares. `spans` keeps any
/// span annotation verbatim (JSON text); it is carried but not interpreted.
struct PairManifestEntry {
  std::string pair_id;
  std::string source_id;
  std::string translation_a;
  std::string translation_b;
  std::optional<std::string> spans;
};

/// JSONL parsers. Errors carry the 1-based line number; duplicate
/// (item, annotator) / (pair, annotator) keys and out-of-range ratings are
/// rejected.
std::vector<PointwiseRating> parse_pointwise(std::string_view jsonl);
std::vector<PairwiseVote> parse_pairwise(std::string_view jsonl);
std::vector<PairManifestEntry> parse_manifest(std::string_view jsonl);
std::vector<PointwiseRating> read_pointwise(const std::filesystem::path& path);
std::vector<PairwiseVote> read_pairwise(const std::filesystem::path& path);
std::vector<PairManifestEntry> read_manifest(const std::filesystem::path& path);

struct ItemRating {
  std::string item_id;
  double mean = 0.0;
  /// Sample standard deviation; 0 when only one rating exists.
  double std = 0.0;
  std::size_t n = 0;
};

/// Per-item mean, in order of first appearance.
std::vector<ItemRating> aggregate_pointwise(std::span<const PointwiseRating> ratings);

/// Majority vote per pair, in order of first appearance. Every pair must have
/// exactly `raters_per_pair` votes and that number must be odd.
std::vector<PairJudgment> aggregate_pairwise(std::span<const PairwiseVote> votes, int raters_per_pair);

/// Fleiss' kappa over the A/B votes.
double pairwise_kappa(std::span<const PairwiseVote> votes, int raters_per_pair);

/// The side with the larger score; nullopt on an exact tie.
std::optional<Choice> choose_by_score(double score_a, double score_b);

struct BucketAccuracy {
  int agreement_count = 0;
  std::size_t n = 0;
  std::size_t correct = 0;
  /// Pairs the method could not decide (counted as incorrect).
  std::size_t ties = 0;
  /// nullopt for an empty bucket.
  std::optional<double> accuracy;
};

struct AgreementReport {
  /// One bucket per possible agreement count (majority size .. raters).
  std::vector<BucketAccuracy> buckets;
  std::size_t n = 0;
  std::size_t correct = 0;
  std::size_t ties = 0;
  double accuracy = 0.0;
};

/// Accuracy of a method's choices against the human majority, split by
/// agreement count. `method_choices` maps pair_id to the method's pick
/// (nullopt = tie). A judged pair without an entry is an error.
AgreementReport method_agreement_by_bucket(std::span<const PairJudgment> judgments,
                                           const std::map<std::string, std::optional<Choice>, std::less<>>& method_choices);

/// Pearson between per-item scores and mean ratings.
stats::Correlation pointwise_correlation(std::span<const double> item_scores, std::span<const double> item_mean_ratings);

struct DisagreementPair {
  std::string pair_id;
  std::string text_a;
  std::string text_b;
  double tindex_a = 0.0;
  double tindex_b = 0.0;
  int agreement_count = 0;
};

struct DisagreementRow {
  std::string pair_id;
  int agreement_count = 0;
  double bleu = 0.0;
  double delta_tindex = 0.0;
};

struct DisagreementBucket {
  int agreement_count = 0;
  std::size_t n = 0;
  std::optional<double> mean_bleu;
  std::optional<double> mean_delta_tindex;
};

struct DisagreementReport {
  std::vector<DisagreementRow> rows;
  std::vector<DisagreementBucket> buckets;
  /// Spearman of each quantity against the agreement count; nullopt when
  /// undefined (fewer than 3 pairs or a constant column).
  std::optional<stats::Correlation> bleu_vs_agreement;
  std::optional<stats::Correlation> delta_vs_agreement;
};

/// Character-level sentence BLEU (hypothesis A, reference B) and |dT| per
/// pair, bucket means for agreement counts majority..raters, and rank
/// correlations. Empty texts are an error.
DisagreementReport disagreement_analysis(std::span<const DisagreementPair> pairs, int raters_per_pair);

}  // namespace ttk::annotations
