#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ttk/backend.hpp"
#include "ttk/corpus.hpp"
#include "ttk/stats.hpp"

// Distribution-shift decomposition over a (model domain x data domain) grid
// of mean log-likelihoods.
namespace ttk::shifts {

/// A training or test distribution: genre, author and translationese level.
struct GridKey {
  std::string genre;
  std::string author;
  corpus::Condition condition = corpus::Condition::low;

  auto operator<=>(const GridKey&) const = default;
  bool operator==(const GridKey&) const = default;
};

/// "genre:author:condition"
std::string to_string(const GridKey& k);

struct MllCell {
  GridKey model;
  GridKey data;
  double mll = 0.0;
};

/// Mean over samples of the per-sample mean token logprob.
double mll(std::span<const backend::TokenScores> samples);

/// Cells indexed by (model, data). Duplicate cells are rejected.
class MllGrid {
 public:
  MllGrid() = default;
  explicit MllGrid(std::span<const MllCell> cells);

  void add(const MllCell& cell);
  std::optional<double> find(const GridKey& model, const GridKey& data) const;
  /// Throws ValidationError naming the missing cell.
  double at(const GridKey& model, const GridKey& data) const;
  std::vector<GridKey> model_keys() const;
  std::vector<GridKey> data_keys(const GridKey& model) const;
  std::vector<MllCell> cells() const;
  std::size_t size() const { return cells_.size(); }

 private:
  std::map<std::pair<GridKey, GridKey>, double> cells_;
};

/// Columns model_genre, model_author, model_cond, data_genre, data_author,
/// data_cond, mll.
MllGrid parse_grid_csv(std::string_view csv);
MllGrid read_grid_csv(const std::filesystem::path& path);
std::string to_csv(const MllGrid& grid);

struct ShiftObservation {
  GridKey model;
  GridKey data;
  double o_shift = 0.0;
  double g_shift = 0.0;
  double a_shift = 0.0;
  double t_shift = 0.0;
};

/// Shifts of the model trained on `train_key` towards every data key it was
/// evaluated on. With ref = MLL(train, train), each shift is
/// MLL(train model, varied data) - ref, where the overall shift uses the test
/// key itself and the genre/author/translationese shifts replace exactly one
/// component of the training key with the test key's.
std::vector<ShiftObservation> compute_shifts(const MllGrid& grid, const GridKey& train_key);

/// compute_shifts for every model key in the grid, in key order.
std::vector<ShiftObservation> compute_all_shifts(const MllGrid& grid);

/// OLS of o_shift on (g_shift, a_shift, t_shift) with intercept and VIF.
/// Needs at least 5 observations. `exclude_reference` drops observations whose
/// data key equals the model key (all-zero rows).
stats::RegressionReport shift_regression(std::span<const ShiftObservation> observations,
                                         bool exclude_reference = false);

struct CancellationResult {
  std::string component;  // "genre_shift" or "author_shift"
  std::size_t n = 0;
  double mean_difference = 0.0;
  /// Every paired difference is exactly zero; the t-test is undefined.
  bool perfectly_canceled = false;
  stats::TTestResult test;
};

/// Pairs each low-condition model's observation with the high-condition
/// model of the same genre and author on the same data key, then runs a
/// paired t-test (low - high) on the genre and author shifts. Unmatched
/// observations are an error. Constant non-zero differences give t = +-inf.
std::vector<CancellationResult> cancellation_test(std::span<const ShiftObservation> observations);

}  // namespace ttk::shifts
