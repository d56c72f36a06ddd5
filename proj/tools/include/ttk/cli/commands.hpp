#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ttk/backend.hpp"
#include "ttk/cli/report.hpp"
#include "ttk/labels.hpp"
#include "ttk/scoring.hpp"

// Subcommand implementations. Each cmd_* takes parsed options, reads its
// inputs and returns the report; file output happens in the caller.
namespace ttk::cli {

using Path = std::filesystem::path;

// ---- binary classification (Table-2 layout) ----

struct DumpSet {
  std::vector<backend::TokenScores> low;
  std::vector<backend::TokenScores> high;
};

/// Rows per method x scoring model ("low", "high", or "pair" for the T-index)
/// x test domain, with an extra "all" domain when there are several.
/// Samples with split=train only feed the MD/RMD fits; split=test samples
/// are evaluated. Several dump sets (seeds) are averaged row by row.
ordered_json binary_eval_payload(std::span<const DumpSet> seeds, std::span<const labels::LabelRecord> labels,
                                 std::span<const scoring::Method> methods, scoring::Normalization normalization);

/// Score oriented so that larger means more translationese.
double oriented_score(scoring::Method method, const backend::TokenScores& ts);

struct BinaryEvalOptions {
  std::vector<Path> dump_low;
  std::vector<Path> dump_high;
  Path labels;
  std::vector<std::string> methods;  // empty = all
  std::string normalization = "per_token";
};
EvalReport cmd_eval_binary(const BinaryEvalOptions& opt);

// ---- pairwise human agreement (Table-3 layout) ----

struct PairwiseEvalOptions {
  Path scores;
  Path manifest;
  Path votes;
  int raters = 5;
  /// Enables the disagreement table (needs translation texts and T-index
  /// scores).
  std::optional<Path> dataset;
};
EvalReport cmd_eval_pairwise(const PairwiseEvalOptions& opt);

// ---- pointwise ratings vs scores ----

struct PointwiseEvalOptions {
  Path scores;
  Path ratings;
};
EvalReport cmd_eval_pointwise(const PointwiseEvalOptions& opt);

// ---- QE correlation (Figure-4 layout) ----

enum class QeCondition { standard, reverse, back_translate };
std::string_view to_string(QeCondition c);
QeCondition parse_qe_condition(std::string_view s);

struct QeScoreRecord {
  std::string sample_id;
  std::string system_id;
  std::string metric_name;
  double value = 0.0;
  QeCondition condition = QeCondition::standard;
};

std::vector<QeScoreRecord> parse_qe_scores(std::string_view jsonl);
std::vector<QeScoreRecord> read_qe_scores(const Path& path);
std::string serialize_qe_scores(std::span<const QeScoreRecord> records);

struct QeCorrelateOptions {
  Path tindex_scores;
  std::vector<Path> qe_scores;
};
EvalReport cmd_qe_correlate(const QeCorrelateOptions& opt);

/// Native character-level sentence BLEU for {"sample_id","system_id",
/// "condition","hypothesis","reference"} lines.
std::vector<QeScoreRecord> qe_bleu(std::string_view jsonl);

// ---- corpus features (Table-1 layout) ----

struct CorpusStatsOptions {
  std::optional<Path> dataset;
  /// One text per line; used when no dataset is given.
  std::optional<Path> low_texts;
  std::optional<Path> high_texts;
  std::optional<Path> lexicon_dir;
  std::string tokenize = "character";
};
EvalReport cmd_corpus_stats(const CorpusStatsOptions& opt);

// ---- shift decomposition ----

struct ShiftsOptions {
  Path grid;
  bool exclude_reference = false;
};
EvalReport cmd_shifts(const ShiftsOptions& opt);

/// Builds a grid CSV from a manifest CSV with columns model_genre,
/// model_author, model_cond, data_genre, data_author, data_cond, dump
/// (relative dump paths resolve against the manifest's directory).
std::string build_grid_csv(const Path& manifest);

// ---- reporting ----

enum class ReportFormat { json, csv, svg };
ReportFormat parse_report_format(std::string_view s);

/// json and csv return one file's bytes; svg writes one file per panel into
/// `out_dir` and returns the list of written names. Unsupported kind/format
/// combinations raise ValidationError.
std::string report_csv(const EvalReport& report);
std::vector<std::string> report_svg(const EvalReport& report, const Path& out_dir);

}  // namespace ttk::cli
