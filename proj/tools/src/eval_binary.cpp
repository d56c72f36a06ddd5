#include <algorithm>
#include <map>
#include <set>

#include "ttk/cli/commands.hpp"
#include "ttk/error.hpp"
#include "ttk/stats.hpp"

namespace ttk::cli {
namespace {

using backend::TokenScores;
using scoring::Method;

using DumpIndex = std::map<std::string, const TokenScores*, std::less<>>;

DumpIndex index_dump(const std::vector<TokenScores>& dump, std::string_view which) {
  DumpIndex idx;
  for (const auto& ts : dump) {
    if (!idx.emplace(ts.sample_id, &ts).second) {
      throw ValidationError(std::string(which) + " dump has sample \"" + ts.sample_id + "\" twice");
    }
  }
  return idx;
}

const TokenScores& lookup(const DumpIndex& idx, const std::string& id, std::string_view which) {
  const auto it = idx.find(id);
  if (it == idx.end()) throw ValidationError(std::string(which) + " dump has no sample \"" + id + "\"");
  return *it->second;
}

const backend::LayerEmbeddings& embeddings_of(const TokenScores& ts, Method m) {
  if (!ts.layer_embeddings) {
    throw CapabilityError(std::string(scoring::to_string(m)) + " needs layer_embeddings, absent for sample \"" +
                          ts.sample_id + "\" (model " + ts.model_id + ")");
  }
  return *ts.layer_embeddings;
}

struct Fits {
  std::optional<scoring::GaussianFit> in;
  std::optional<scoring::GaussianFit> bg;
};

// In-distribution = the scoring model's own training class; background =
// both classes.
Fits fit_for_role(Method m, const DumpIndex& idx, std::span<const labels::LabelRecord> labels, int own_label,
                  std::string_view which) {
  std::vector<Eigen::VectorXd> in, bg;
  for (const auto& l : labels) {
    if (l.split != "train") continue;
    const auto z = scoring::last_hidden_state(embeddings_of(lookup(idx, l.sample_id, which), m));
    bg.push_back(z);
    if (l.label == own_label) in.push_back(z);
  }
  if (in.size() < 2) {
    throw ValidationError(std::string(scoring::to_string(m)) + " needs at least 2 split=train samples with label " +
                          std::to_string(own_label) + " to fit the " + std::string(which) + " model's distribution");
  }
  Fits f;
  f.in = scoring::fit_gaussian(in);
  if (m == Method::rmd) f.bg = scoring::fit_gaussian(bg);
  return f;
}

struct Row {
  std::string method, model, domain;
  stats::BinaryEvalResult result;
};

std::vector<Row> evaluate_seed(const DumpSet& seed, std::span<const labels::LabelRecord> labels,
                               std::span<const Method> methods, scoring::Normalization norm) {
  const auto low = index_dump(seed.low, "low-model");
  const auto high = index_dump(seed.high, "high-model");

  std::vector<const labels::LabelRecord*> test;
  std::set<std::string> domain_set;
  for (const auto& l : labels) {
    if (l.split == "test") {
      test.push_back(&l);
      domain_set.insert(l.domain);
    }
  }
  if (test.empty()) throw ValidationError("labels contain no split=test samples");
  std::vector<std::string> domains(domain_set.begin(), domain_set.end());
  if (domains.size() > 1) domains.push_back("all");

  std::vector<Row> rows;
  for (const auto m : methods) {
    std::vector<std::string> roles = scoring::is_pairwise(m) ? std::vector<std::string>{"pair"}
                                                             : std::vector<std::string>{"low", "high"};
    for (const auto& role : roles) {
      const DumpIndex& idx = role == "high" ? high : low;
      Fits fits;
      if (m == Method::md || m == Method::rmd) fits = fit_for_role(m, idx, labels, role == "high" ? 1 : 0, role);

      // nullopt = undefined score, skipped
      std::vector<std::optional<double>> scores;
      for (const auto* l : test) {
        try {
          if (m == Method::tindex) {
            scores.push_back(scoring::tindex(lookup(low, l->sample_id, "low-model"),
                                             lookup(high, l->sample_id, "high-model"), norm));
          } else if (m == Method::md || m == Method::rmd) {
            const auto z = scoring::last_hidden_state(embeddings_of(lookup(idx, l->sample_id, role), m));
            scores.push_back(m == Method::md ? -scoring::mahalanobis(*fits.in, z)
                                             : -scoring::relative_mahalanobis(*fits.in, *fits.bg, z));
          } else {
            scores.push_back(oriented_score(m, lookup(idx, l->sample_id, role)));
          }
        } catch (const UndefinedScoreError&) {
          scores.push_back(std::nullopt);
        }
      }
      for (const auto& domain : domains) {
        std::vector<double> s;
        std::vector<int> y;
        std::size_t skipped = 0;
        for (std::size_t i = 0; i < test.size(); ++i) {
          if (domain != "all" && test[i]->domain != domain) continue;
          if (!scores[i]) {
            ++skipped;
            continue;
          }
          s.push_back(*scores[i]);
          y.push_back(test[i]->label);
        }
        Row row{std::string(scoring::to_string(m)), role, domain, {}};
        try {
          row.result = stats::evaluate_binary(s, y, skipped);
        } catch (const ValidationError& e) {
          throw ValidationError(row.method + "/" + role + "/" + domain + ": " + e.what());
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

}  // namespace

double oriented_score(Method method, const TokenScores& ts) {
  switch (method) {
    case Method::loglik: return scoring::log_likelihood(ts);
    case Method::entropy: return -scoring::entropy_score(ts);
    case Method::fdg: return scoring::fast_detect_gpt(ts);
    case Method::tv: return scoring::trajectory_volatility(embeddings_of(ts, method));
    case Method::tindex:
    case Method::md:
    case Method::rmd: break;
  }
  throw ValidationError(std::string(scoring::to_string(method)) + " is not a single-record score");
}

ordered_json binary_eval_payload(std::span<const DumpSet> seeds, std::span<const labels::LabelRecord> labels,
                                 std::span<const Method> methods, scoring::Normalization normalization) {
  if (seeds.empty()) throw ValidationError("no dump sets given");
  if (methods.empty()) throw ValidationError("no methods given");
  std::vector<std::vector<Row>> per_seed;
  for (const auto& seed : seeds) per_seed.push_back(evaluate_seed(seed, labels, methods, normalization));

  ordered_json payload;
  payload["normalization"] = scoring::to_string(normalization);
  payload["n_seeds"] = seeds.size();
  ordered_json methods_json = ordered_json::array();
  for (auto m : methods) methods_json.push_back(scoring::to_string(m));
  payload["methods"] = methods_json;
  ordered_json rows = ordered_json::array();
  const auto n_rows = per_seed.front().size();
  const double k = static_cast<double>(seeds.size());
  for (std::size_t r = 0; r < n_rows; ++r) {
    const auto& first = per_seed.front()[r];
    double acc = 0.0, auc = 0.0;
    std::size_t skipped = 0;
    ordered_json seeds_json = ordered_json::array();
    for (const auto& rows_of_seed : per_seed) {
      const auto& res = rows_of_seed[r].result;
      acc += res.accuracy;
      auc += res.auroc;
      skipped += res.skipped;
      seeds_json.push_back({{"accuracy", number(res.accuracy)},
                            {"auroc", number(res.auroc)},
                            {"threshold", number(res.threshold)}});
    }
    ordered_json row;
    row["method"] = first.method;
    row["model"] = first.model;
    row["domain"] = first.domain;
    row["accuracy"] = number(acc / k);
    row["auroc"] = number(auc / k);
    row["n_pos"] = first.result.n_pos;
    row["n_neg"] = first.result.n_neg;
    row["skipped"] = skipped;
    row["seeds"] = seeds_json;
    rows.push_back(row);
  }
  payload["rows"] = rows;
  return payload;
}

EvalReport cmd_eval_binary(const BinaryEvalOptions& opt) {
  if (opt.dump_low.empty() || opt.dump_low.size() != opt.dump_high.size()) {
    throw ValidationError("give the same number (>= 1) of --dump-low and --dump-high files");
  }
  ConfigHash hash("eval-binary");
  std::vector<DumpSet> seeds;
  for (std::size_t i = 0; i < opt.dump_low.size(); ++i) {
    hash.file("dump-low", opt.dump_low[i]).file("dump-high", opt.dump_high[i]);
    seeds.push_back({backend::read_dump(opt.dump_low[i]), backend::read_dump(opt.dump_high[i])});
  }
  hash.file("labels", opt.labels);
  const auto labels = labels::read_labels(opt.labels);
  std::vector<Method> methods;
  if (opt.methods.empty()) {
    const auto all = scoring::all_methods();
    methods.assign(all.begin(), all.end());
  }
  for (const auto& m : opt.methods) {
    methods.push_back(scoring::parse_method(m));
    hash.flag("method", m);
  }
  const auto norm = scoring::parse_normalization(opt.normalization);
  hash.flag("normalization", opt.normalization);

  EvalReport report;
  report.kind = ReportKind::binary_eval;
  report.payload = binary_eval_payload(seeds, labels, methods, norm);
  report.config_hash = hash.hex();
  return report;
}

}  // namespace ttk::cli
