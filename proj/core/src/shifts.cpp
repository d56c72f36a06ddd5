#include "ttk/shifts.hpp"

#include <Eigen/Core>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "ttk/error.hpp"
#include "ttk/numeric.hpp"
#include "ttk/text.hpp"

namespace ttk::shifts {
namespace {

constexpr std::string_view kGridHeader = "model_genre,model_author,model_cond,data_genre,data_author,data_cond,mll";

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string to_string(const GridKey& k) {
  return k.genre + ":" + k.author + ":" + std::string(corpus::to_string(k.condition));
}

double mll(std::span<const backend::TokenScores> samples) {
  if (samples.empty()) throw ValidationError("mll needs at least one sample");
  std::vector<double> per_sample;
  per_sample.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.token_logprobs.empty()) throw ValidationError("mll: sample " + s.sample_id + " has no tokens");
    per_sample.push_back(mean(s.token_logprobs));
  }
  return mean(per_sample);
}

MllGrid::MllGrid(std::span<const MllCell> cells) {
  for (const auto& c : cells) add(c);
}

void MllGrid::add(const MllCell& cell) {
  if (!std::isfinite(cell.mll)) {
    throw ValidationError("grid cell (" + to_string(cell.model) + ", " + to_string(cell.data) + ") is not finite");
  }
  const auto [it, inserted] = cells_.emplace(std::pair{cell.model, cell.data}, cell.mll);
  if (!inserted) {
    throw ValidationError("duplicate grid cell (model " + to_string(cell.model) + ", data " + to_string(cell.data) +
                          ")");
  }
}

std::optional<double> MllGrid::find(const GridKey& model, const GridKey& data) const {
  if (auto it = cells_.find({model, data}); it != cells_.end()) return it->second;
  return std::nullopt;
}

double MllGrid::at(const GridKey& model, const GridKey& data) const {
  if (auto v = find(model, data)) return *v;
  throw ValidationError("missing grid cell (model " + to_string(model) + ", data " + to_string(data) + ")");
}

std::vector<GridKey> MllGrid::model_keys() const {
  std::vector<GridKey> out;
  for (const auto& [key, value] : cells_) {
    if (out.empty() || out.back() != key.first) out.push_back(key.first);
  }
  return out;
}

std::vector<GridKey> MllGrid::data_keys(const GridKey& model) const {
  std::vector<GridKey> out;
  for (auto it = cells_.lower_bound({model, GridKey{}}); it != cells_.end() && it->first.first == model; ++it) {
    out.push_back(it->first.second);
  }
  return out;
}

std::vector<MllCell> MllGrid::cells() const {
  std::vector<MllCell> out;
  out.reserve(cells_.size());
  for (const auto& [key, value] : cells_) out.push_back({key.first, key.second, value});
  return out;
}

MllGrid parse_grid_csv(std::string_view csv) {
  const auto lines = text::split_lines(csv);
  if (lines.empty() || lines.front() != kGridHeader) {
    throw ValidationError("grid CSV must start with the header \"" + std::string(kGridHeader) + "\"");
  }
  MllGrid grid;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto where = "grid line " + std::to_string(i + 1) + ": ";
    const auto f = split_csv(lines[i]);
    if (f.size() != 7) throw ValidationError(where + "expected 7 columns, got " + std::to_string(f.size()));
    MllCell cell;
    try {
      cell.model = {std::string(f[0]), std::string(f[1]), corpus::parse_condition(f[2])};
      cell.data = {std::string(f[3]), std::string(f[4]), corpus::parse_condition(f[5])};
      const std::string num(f[6]);
      std::size_t used = 0;
      cell.mll = std::stod(num, &used);
      if (used != num.size()) throw std::invalid_argument("trailing characters");
      grid.add(cell);
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    } catch (const std::exception&) {
      throw ValidationError(where + "mll \"" + std::string(f[6]) + "\" is not a number");
    }
  }
  return grid;
}

MllGrid read_grid_csv(const std::filesystem::path& path) {
  try {
    return parse_grid_csv(text::read_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string to_csv(const MllGrid& grid) {
  std::string out(kGridHeader);
  out += '\n';
  char buf[40];
  for (const auto& c : grid.cells()) {
    std::snprintf(buf, sizeof buf, "%.17g", c.mll);
    out += c.model.genre + ',' + c.model.author + ',' + std::string(corpus::to_string(c.model.condition)) + ',' +
           c.data.genre + ',' + c.data.author + ',' + std::string(corpus::to_string(c.data.condition)) + ',' + buf +
           '\n';
  }
  return out;
}

std::vector<ShiftObservation> compute_shifts(const MllGrid& grid, const GridKey& train_key) {
  const double ref = grid.at(train_key, train_key);
  std::vector<ShiftObservation> out;
  for (const auto& test : grid.data_keys(train_key)) {
    ShiftObservation obs;
    obs.model = train_key;
    obs.data = test;
    obs.o_shift = grid.at(train_key, test) - ref;
    obs.g_shift = grid.at(train_key, {test.genre, train_key.author, train_key.condition}) - ref;
    obs.a_shift = grid.at(train_key, {train_key.genre, test.author, train_key.condition}) - ref;
    obs.t_shift = grid.at(train_key, {train_key.genre, train_key.author, test.condition}) - ref;
    out.push_back(obs);
  }
  return out;
}

std::vector<ShiftObservation> compute_all_shifts(const MllGrid& grid) {
  std::vector<ShiftObservation> out;
  for (const auto& model : grid.model_keys()) {
    auto part = compute_shifts(grid, model);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

stats::RegressionReport shift_regression(std::span<const ShiftObservation> observations, bool exclude_reference) {
  std::vector<const ShiftObservation*> kept;
  for (const auto& o : observations) {
    if (exclude_reference && o.model == o.data) continue;
    kept.push_back(&o);
  }
  if (kept.size() < 5) {
    throw ValidationError("shift regression needs at least 5 observations, got " + std::to_string(kept.size()));
  }
  const auto n = static_cast<Eigen::Index>(kept.size());
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& o = *kept[static_cast<std::size_t>(i)];
    x(i, 0) = o.g_shift;
    x(i, 1) = o.a_shift;
    x(i, 2) = o.t_shift;
    y(i) = o.o_shift;
  }
  return stats::ols(x, y, true, {"genre_shift", "author_shift", "translationese_shift"});
}

std::vector<CancellationResult> cancellation_test(std::span<const ShiftObservation> observations) {
  using Slot = std::tuple<std::string, std::string, GridKey>;
  std::map<Slot, const ShiftObservation*> low, high;
  for (const auto& o : observations) {
    if (o.model.condition == corpus::Condition::wild) {
      throw ValidationError("model key " + to_string(o.model) + " has condition wild");
    }
    auto& side = o.model.condition == corpus::Condition::low ? low : high;
    if (!side.emplace(Slot{o.model.genre, o.model.author, o.data}, &o).second) {
      throw ValidationError("duplicate observation for model " + to_string(o.model) + " on " + to_string(o.data));
    }
  }
  std::vector<double> g_low, g_high, a_low, a_high;
  for (const auto& [slot, lo] : low) {
    auto it = high.find(slot);
    if (it == high.end()) {
      throw ValidationError("no high-condition counterpart for model " + to_string(lo->model) + " on " +
                            to_string(lo->data));
    }
    g_low.push_back(lo->g_shift);
    g_high.push_back(it->second->g_shift);
    a_low.push_back(lo->a_shift);
    a_high.push_back(it->second->a_shift);
  }
  for (const auto& [slot, hi] : high) {
    if (!low.contains(slot)) {
      throw ValidationError("no low-condition counterpart for model " + to_string(hi->model) + " on " +
                            to_string(hi->data));
    }
  }
  if (g_low.size() < 2) throw ValidationError("cancellation test needs at least 2 matched pairs");

  auto run = [](std::string name, const std::vector<double>& a, const std::vector<double>& b) {
    CancellationResult r;
    r.component = std::move(name);
    r.n = a.size();
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    r.mean_difference = mean(d);
    r.test.df = static_cast<double>(a.size() - 1);
    const bool constant = std::all_of(d.begin(), d.end(), [&](double v) { return v == d.front(); });
    if (constant) {
      if (d.front() == 0.0) {
        r.perfectly_canceled = true;
        r.test.t = 0.0;
        r.test.p = 1.0;
      } else {
        r.test.t = std::copysign(std::numeric_limits<double>::infinity(), d.front());
        r.test.p = 0.0;
      }
      return r;
    }
    r.test = stats::ttest_paired(a, b);
    return r;
  };
  return {run("genre_shift", g_low, g_high), run("author_shift", a_low, a_high)};
}

}  // namespace ttk::shifts
