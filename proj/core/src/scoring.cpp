#include "ttk/scoring.hpp"

#include <array>
#include <cmath>
#include <nlohmann/json.hpp>

#include "ttk/error.hpp"
#include "ttk/numeric.hpp"
#include "ttk/text.hpp"

namespace ttk::scoring {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr std::array kMethods{Method::tindex, Method::loglik, Method::entropy, Method::fdg,
                              Method::md,     Method::rmd,    Method::tv};

const std::vector<double>& require(const std::optional<std::vector<double>>& xs, const backend::TokenScores& ts,
                                   const char* field, const char* method) {
  if (!xs) {
    throw CapabilityError(std::string(method) + " needs " + field + ", absent for sample \"" + ts.sample_id +
                          "\" (model " + ts.model_id + ")");
  }
  return *xs;
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::tindex: return "tindex";
    case Method::loglik: return "loglik";
    case Method::entropy: return "entropy";
    case Method::fdg: return "fdg";
    case Method::md: return "md";
    case Method::rmd: return "rmd";
    case Method::tv: return "tv";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  for (auto m : kMethods) {
    if (to_string(m) == s) return m;
  }
  throw ValidationError("unknown scoring method \"" + std::string(s) + "\"");
}

std::span<const Method> all_methods() { return kMethods; }

std::string_view to_string(Normalization n) { return n == Normalization::per_token ? "per_token" : "sum"; }

Normalization parse_normalization(std::string_view s) {
  if (s == "per_token") return Normalization::per_token;
  if (s == "sum") return Normalization::sum;
  throw ValidationError("unknown normalization \"" + std::string(s) + "\" (expected per_token|sum)");
}

void validate(const ScoreRecord& r) {
  if (!std::isfinite(r.value)) throw ValidationError("score for \"" + r.sample_id + "\" is not finite");
  const std::size_t want = is_pairwise(r.method) ? 2 : 1;
  if (r.model_ids.size() != want) {
    throw ValidationError(std::string(to_string(r.method)) + " score needs " + std::to_string(want) +
                          " model_ids, got " + std::to_string(r.model_ids.size()));
  }
}

std::string serialize_score_record(const ScoreRecord& r) {
  validate(r);
  ordered_json o;
  o["sample_id"] = r.sample_id;
  o["method"] = to_string(r.method);
  o["model_ids"] = r.model_ids;
  o["value"] = r.value;
  o["normalization"] = to_string(r.normalization);
  return o.dump();
}

ScoreRecord parse_score_record(std::string_view line) {
  ScoreRecord r;
  try {
    const auto o = json::parse(line);
    r.sample_id = o.at("sample_id").get<std::string>();
    r.method = parse_method(o.at("method").get<std::string>());
    r.model_ids = o.at("model_ids").get<std::vector<std::string>>();
    r.value = o.at("value").get<double>();
    r.normalization = o.contains("normalization") ? parse_normalization(o["normalization"].get<std::string>())
                                                  : Normalization::per_token;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad score record: ") + e.what());
  }
  validate(r);
  return r;
}

std::vector<ScoreRecord> read_scores(const std::filesystem::path& path) {
  const auto bytes = text::read_file(path);
  std::vector<ScoreRecord> out;
  std::size_t line_no = 0;
  for (auto line : text::split_lines(bytes)) {
    ++line_no;
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    try {
      out.push_back(parse_score_record(line));
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string serialize_scores(std::span<const ScoreRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += serialize_score_record(r);
    out += '\n';
  }
  return out;
}

void write_scores(std::span<const ScoreRecord> records, const std::filesystem::path& path) {
  text::write_file(path, serialize_scores(records));
}

double tindex(const backend::TokenScores& low_model, const backend::TokenScores& high_model,
              Normalization normalization) {
  if (low_model.sample_id != high_model.sample_id) {
    throw ValidationError("tindex: sample_id mismatch (\"" + low_model.sample_id + "\" vs \"" +
                          high_model.sample_id + "\")");
  }
  const auto n = low_model.n_tokens();
  if (n != high_model.n_tokens()) {
    throw ValidationError("tindex: n_tokens mismatch for \"" + low_model.sample_id + "\" (" + std::to_string(n) +
                          " vs " + std::to_string(high_model.n_tokens()) + ")");
  }
  if (n == 0) throw ValidationError("tindex: empty token arrays for \"" + low_model.sample_id + "\"");
  // Differencing per position first keeps any shared per-token component
  // out of the accumulated sum.
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = high_model.token_logprobs[i] - low_model.token_logprobs[i];
  const double total = pairwise_sum(diff);
  return normalization == Normalization::sum ? total : total / static_cast<double>(n);
}

double log_likelihood(const backend::TokenScores& ts) {
  if (ts.token_logprobs.empty()) throw ValidationError("loglik: no token logprobs for \"" + ts.sample_id + "\"");
  return mean(ts.token_logprobs);
}

double entropy_score(const backend::TokenScores& ts) {
  const auto& h = require(ts.token_entropies, ts, "token_entropies", "entropy");
  if (h.empty()) throw ValidationError("entropy: empty entropy array for \"" + ts.sample_id + "\"");
  return mean(h);
}

double fast_detect_gpt(const backend::TokenScores& ts) {
  const auto& h = require(ts.token_entropies, ts, "token_entropies", "fdg");
  const auto& m2 = require(ts.logp_second_moments, ts, "logp_second_moments", "fdg");
  const auto n = ts.n_tokens();
  if (h.size() != n || m2.size() != n) throw ValidationError("fdg: array length mismatch for \"" + ts.sample_id + "\"");
  std::vector<double> centred(n);
  std::vector<double> var(n);
  std::vector<double> m2_abs(n);
  for (std::size_t i = 0; i < n; ++i) {
    centred[i] = ts.token_logprobs[i] + h[i];
    var[i] = std::max(0.0, m2[i] - h[i] * h[i]);
    m2_abs[i] = m2[i];
  }
  const double var_sum = pairwise_sum(var);
  // Deterministic and uniform positions have Var[log p] = 0; anything at
  // rounding level relative to the moments is treated the same way.
  if (!(var_sum > 1e-12 * std::max(1.0, pairwise_sum(m2_abs)))) {
    throw UndefinedScoreError("fdg: zero variance of log p for \"" + ts.sample_id +
                              "\" (every position deterministic or uniform)");
  }
  return pairwise_sum(centred) / std::sqrt(var_sum);
}

namespace {

double default_shrinkage(const Eigen::MatrixXd& raw) {
  if (raw.rows() < 1) return 1e-8;
  return std::max(1e-3 * raw.trace() / static_cast<double>(raw.rows()), 1e-8);
}

}  // namespace

GaussianFit::GaussianFit(Eigen::VectorXd mean, Eigen::MatrixXd raw_covariance, std::size_t n_fit)
    : GaussianFit(std::move(mean), raw_covariance, n_fit, default_shrinkage(raw_covariance)) {}

GaussianFit GaussianFit::with_covariance(Eigen::VectorXd mean, Eigen::MatrixXd covariance, std::size_t n_fit) {
  return GaussianFit(std::move(mean), std::move(covariance), n_fit, 0.0);
}

GaussianFit::GaussianFit(Eigen::VectorXd mean, Eigen::MatrixXd raw_covariance, std::size_t n_fit, double eps)
    : mean_(std::move(mean)), raw_cov_(std::move(raw_covariance)), eps_(eps), n_fit_(n_fit) {
  const auto d = mean_.size();
  if (d < 1 || raw_cov_.rows() != d || raw_cov_.cols() != d)
    throw ValidationError("GaussianFit: covariance shape does not match mean");
  if (!raw_cov_.allFinite()) throw ValidationError("GaussianFit: covariance has non-finite entries");
  cov_ = 0.5 * (raw_cov_ + raw_cov_.transpose());
  cov_.diagonal().array() += eps_;
  ldlt_.compute(cov_);
  if (ldlt_.info() != Eigen::Success || !(ldlt_.vectorD().array() > 0.0).all())
    throw ValidationError("GaussianFit: covariance is not positive definite");
}

GaussianFit fit_gaussian(const std::vector<Eigen::VectorXd>& embeddings) {
  if (embeddings.size() < 2) throw ValidationError("fit_gaussian needs at least 2 vectors");
  const auto d = embeddings.front().size();
  if (d < 1) throw ValidationError("fit_gaussian: zero-dimensional vectors");
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    if (embeddings[i].size() != d) {
      throw ValidationError("fit_gaussian: vector " + std::to_string(i) + " has dim " +
                            std::to_string(embeddings[i].size()) + ", expected " + std::to_string(d));
    }
  }
  const auto n = static_cast<Eigen::Index>(embeddings.size());
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) x.row(i) = embeddings[static_cast<std::size_t>(i)].transpose();
  Eigen::VectorXd mu = x.colwise().mean().transpose();
  const Eigen::MatrixXd centred = x.rowwise() - mu.transpose();
  Eigen::MatrixXd cov = (centred.transpose() * centred) / static_cast<double>(n - 1);
  return GaussianFit(std::move(mu), std::move(cov), embeddings.size());
}

double mahalanobis(const GaussianFit& fit, const Eigen::VectorXd& z) {
  if (static_cast<std::size_t>(z.size()) != fit.dim()) {
    throw ValidationError("mahalanobis: vector has dim " + std::to_string(z.size()) + ", fit has " +
                          std::to_string(fit.dim()));
  }
  const Eigen::VectorXd diff = z - fit.mean();
  const Eigen::VectorXd w = fit.factorization().solve(diff);
  return std::max(0.0, diff.dot(w));
}

double relative_mahalanobis(const GaussianFit& fit_in, const GaussianFit& fit_bg, const Eigen::VectorXd& z) {
  if (fit_in.dim() != fit_bg.dim()) throw ValidationError("relative_mahalanobis: fits differ in dimension");
  return mahalanobis(fit_in, z) - mahalanobis(fit_bg, z);
}

double trajectory_volatility(const backend::LayerEmbeddings& layers) {
  if (layers.layers < 2) throw ValidationError("trajectory_volatility needs at least 2 layer rows (L >= 1)");
  if (layers.data.size() != layers.layers * layers.dim) throw ValidationError("trajectory_volatility: bad shape");
  std::vector<Eigen::VectorXd> unit;
  unit.reserve(layers.layers);
  for (std::size_t l = 0; l < layers.layers; ++l) {
    const auto row = layers.row(l);
    Eigen::VectorXd v(static_cast<Eigen::Index>(layers.dim));
    for (std::size_t j = 0; j < layers.dim; ++j) v[static_cast<Eigen::Index>(j)] = row[j];
    const double norm = v.norm();
    if (!(norm > 0.0)) throw UndefinedScoreError("trajectory_volatility: layer " + std::to_string(l) + " has zero norm");
    unit.push_back(v / norm);
  }
  std::vector<double> d(layers.layers - 1);
  for (std::size_t l = 0; l + 1 < layers.layers; ++l) d[l] = (unit[l + 1] - unit[l]).norm();
  const double mu = mean(d);
  std::vector<double> sq(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) sq[i] = (d[i] - mu) * (d[i] - mu);
  return mean(sq);
}

Eigen::VectorXd last_hidden_state(const backend::LayerEmbeddings& layers) {
  if (layers.layers < 1) throw ValidationError("layer embeddings are empty");
  const auto row = layers.row(layers.layers - 1);
  Eigen::VectorXd v(static_cast<Eigen::Index>(layers.dim));
  for (std::size_t j = 0; j < layers.dim; ++j) v[static_cast<Eigen::Index>(j)] = row[j];
  return v;
}

}  // namespace ttk::scoring
