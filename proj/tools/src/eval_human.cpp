#include <map>
#include <set>

#include "ttk/annotations.hpp"
#include "ttk/cli/commands.hpp"
#include "ttk/corpus.hpp"
#include "ttk/error.hpp"
#include "ttk/features.hpp"
#include "ttk/stats.hpp"
#include "ttk/text.hpp"

namespace ttk::cli {
namespace {

// Score records grouped by method and model pair, e.g. "tindex[low+high]".
struct ScoreGroup {
  std::string method;
  std::vector<std::string> model_ids;
  std::map<std::string, double, std::less<>> values;
};

std::vector<ScoreGroup> group_scores(const std::vector<scoring::ScoreRecord>& records) {
  std::map<std::pair<std::string, std::vector<std::string>>, ScoreGroup> groups;
  for (const auto& r : records) {
    const std::string method(scoring::to_string(r.method));
    auto& g = groups[{method, r.model_ids}];
    g.method = method;
    g.model_ids = r.model_ids;
    if (!g.values.emplace(r.sample_id, r.value).second) {
      throw ValidationError("score file has two " + method + " values for sample \"" + r.sample_id + "\"");
    }
  }
  std::vector<ScoreGroup> out;
  for (auto& [key, g] : groups) out.push_back(std::move(g));
  if (out.empty()) throw ValidationError("score file is empty");
  return out;
}

double score_of(const ScoreGroup& g, const std::string& id) {
  const auto it = g.values.find(id);
  if (it == g.values.end()) throw ValidationError(g.method + " has no score for \"" + id + "\"");
  return it->second;
}

ordered_json model_ids_json(const std::vector<std::string>& ids) {
  ordered_json j = ordered_json::array();
  for (const auto& id : ids) j.push_back(id);
  return j;
}

ordered_json optional_number(const std::optional<double>& v) { return v ? number(*v) : ordered_json(nullptr); }

ordered_json correlation_json(const std::optional<stats::Correlation>& c) {
  if (!c) return nullptr;
  return {{"r", number(c->r)}, {"p", number(c->p)}, {"n", c->n}};
}

}  // namespace

EvalReport cmd_eval_pairwise(const PairwiseEvalOptions& opt) {
  ConfigHash hash("eval-pairwise");
  hash.file("scores", opt.scores).file("manifest", opt.manifest).file("votes", opt.votes);
  hash.flag("raters", static_cast<std::int64_t>(opt.raters));
  const auto groups = group_scores(scoring::read_scores(opt.scores));
  const auto manifest = annotations::read_manifest(opt.manifest);
  const auto votes = annotations::read_pairwise(opt.votes);
  const auto judgments = annotations::aggregate_pairwise(votes, opt.raters);

  std::map<std::string, const annotations::PairManifestEntry*, std::less<>> by_pair;
  for (const auto& e : manifest) by_pair.emplace(e.pair_id, &e);
  for (const auto& j : judgments) {
    if (!by_pair.contains(j.pair_id)) throw ValidationError("voted pair \"" + j.pair_id + "\" is not in the manifest");
  }

  ordered_json payload;
  payload["raters"] = opt.raters;
  payload["n_pairs"] = judgments.size();
  try {
    payload["fleiss_kappa"] = number(annotations::pairwise_kappa(votes, opt.raters));
  } catch (const UndefinedScoreError&) {
    payload["fleiss_kappa"] = nullptr;
  }
  ordered_json methods = ordered_json::array();
  for (const auto& g : groups) {
    std::map<std::string, std::optional<stats::Choice>, std::less<>> choices;
    for (const auto& j : judgments) {
      const auto& e = *by_pair.at(j.pair_id);
      choices[j.pair_id] = annotations::choose_by_score(score_of(g, e.translation_a), score_of(g, e.translation_b));
    }
    const auto rep = annotations::method_agreement_by_bucket(judgments, choices);
    ordered_json buckets = ordered_json::array();
    for (const auto& b : rep.buckets) {
      buckets.push_back({{"agreement_count", b.agreement_count},
                         {"n", b.n},
                         {"correct", b.correct},
                         {"ties", b.ties},
                         {"accuracy", optional_number(b.accuracy)}});
    }
    methods.push_back({{"method", g.method},
                       {"model_ids", model_ids_json(g.model_ids)},
                       {"buckets", buckets},
                       {"n", rep.n},
                       {"correct", rep.correct},
                       {"ties", rep.ties},
                       {"accuracy", number(rep.accuracy)}});
  }
  payload["methods"] = methods;

  if (opt.dataset) {
    hash.file("dataset", *opt.dataset);
    const auto dataset = corpus::load_dataset(*opt.dataset);
    const ScoreGroup* tindex = nullptr;
    for (const auto& g : groups) {
      if (g.method == "tindex") {
        tindex = &g;
        break;
      }
    }
    if (!tindex) throw ValidationError("disagreement analysis needs tindex scores in the score file");
    auto text_of = [&](const std::string& id) -> const std::string& {
      const auto* t = dataset.find_translation(id);
      if (!t) throw ValidationError("dataset has no translation \"" + id + "\"");
      return t->text;
    };
    std::vector<annotations::DisagreementPair> pairs;
    for (const auto& j : judgments) {
      const auto& e = *by_pair.at(j.pair_id);
      pairs.push_back({j.pair_id, text_of(e.translation_a), text_of(e.translation_b),
                       score_of(*tindex, e.translation_a), score_of(*tindex, e.translation_b), j.agreement_count});
    }
    const auto d = annotations::disagreement_analysis(pairs, opt.raters);
    ordered_json rows = ordered_json::array();
    for (const auto& r : d.rows) {
      rows.push_back({{"pair_id", r.pair_id},
                      {"agreement_count", r.agreement_count},
                      {"bleu", number(r.bleu)},
                      {"delta_tindex", number(r.delta_tindex)}});
    }
    ordered_json buckets = ordered_json::array();
    for (const auto& b : d.buckets) {
      buckets.push_back({{"agreement_count", b.agreement_count},
                         {"n", b.n},
                         {"mean_bleu", optional_number(b.mean_bleu)},
                         {"mean_delta_tindex", optional_number(b.mean_delta_tindex)}});
    }
    payload["disagreement"] = {{"rows", rows},
                               {"buckets", buckets},
                               {"bleu_vs_agreement", correlation_json(d.bleu_vs_agreement)},
                               {"delta_vs_agreement", correlation_json(d.delta_vs_agreement)}};
  }

  EvalReport report;
  report.kind = ReportKind::pairwise_eval;
  report.payload = payload;
  report.config_hash = hash.hex();
  return report;
}

EvalReport cmd_eval_pointwise(const PointwiseEvalOptions& opt) {
  ConfigHash hash("eval-pointwise");
  hash.file("scores", opt.scores).file("ratings", opt.ratings);
  const auto groups = group_scores(scoring::read_scores(opt.scores));
  const auto items = annotations::aggregate_pointwise(annotations::read_pointwise(opt.ratings));

  ordered_json methods = ordered_json::array();
  for (const auto& g : groups) {
    std::vector<double> x, y;
    ordered_json points = ordered_json::array();
    for (const auto& item : items) {
      x.push_back(score_of(g, item.item_id));
      y.push_back(item.mean);
      points.push_back({{"item_id", item.item_id},
                        {"score", number(x.back())},
                        {"mean_rating", number(item.mean)},
                        {"std_rating", number(item.std)},
                        {"n_ratings", item.n}});
    }
    std::optional<stats::Correlation> corr;
    try {
      corr = annotations::pointwise_correlation(x, y);
    } catch (const UndefinedScoreError&) {
    }
    methods.push_back({{"method", g.method},
                       {"model_ids", model_ids_json(g.model_ids)},
                       {"pearson", correlation_json(corr)},
                       {"points", points}});
  }
  EvalReport report;
  report.kind = ReportKind::pointwise_eval;
  report.payload = {{"n_items", items.size()}, {"methods", methods}};
  report.config_hash = hash.hex();
  return report;
}

std::string_view to_string(QeCondition c) {
  switch (c) {
    case QeCondition::standard: return "standard";
    case QeCondition::reverse: return "reverse";
    case QeCondition::back_translate: return "back_translate";
  }
  return "?";
}

QeCondition parse_qe_condition(std::string_view s) {
  if (s == "standard") return QeCondition::standard;
  if (s == "reverse") return QeCondition::reverse;
  if (s == "back_translate") return QeCondition::back_translate;
  throw ValidationError("unknown QE condition \"" + std::string(s) + "\" (expected standard|reverse|back_translate)");
}

std::vector<QeScoreRecord> parse_qe_scores(std::string_view jsonl) {
  std::vector<QeScoreRecord> out;
  std::size_t line_no = 0;
  for (auto line : text::split_lines(jsonl)) {
    ++line_no;
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      QeScoreRecord r;
      r.sample_id = j.at("sample_id").get<std::string>();
      r.system_id = j.at("system_id").get<std::string>();
      r.metric_name = j.at("metric_name").get<std::string>();
      r.value = j.at("value").get<double>();
      r.condition = parse_qe_condition(j.at("condition").get<std::string>());
      if (!std::isfinite(r.value)) throw ValidationError("value is not finite");
      if (r.sample_id.empty() || r.metric_name.empty()) throw ValidationError("empty sample_id or metric_name");
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": bad QE record: " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<QeScoreRecord> read_qe_scores(const Path& path) {
  const auto bytes = text::read_file(path);
  try {
    return parse_qe_scores(bytes);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string serialize_qe_scores(std::span<const QeScoreRecord> records) {
  std::string out;
  for (const auto& r : records) {
    ordered_json j;
    j["sample_id"] = r.sample_id;
    j["system_id"] = r.system_id;
    j["metric_name"] = r.metric_name;
    j["value"] = r.value;
    j["condition"] = to_string(r.condition);
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<QeScoreRecord> qe_bleu(std::string_view jsonl) {
  std::vector<QeScoreRecord> out;
  std::size_t line_no = 0;
  for (auto line : text::split_lines(jsonl)) {
    ++line_no;
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      QeScoreRecord r;
      r.sample_id = j.at("sample_id").get<std::string>();
      r.system_id = j.at("system_id").get<std::string>();
      r.metric_name = "bleu";
      r.condition = parse_qe_condition(j.at("condition").get<std::string>());
      const auto hyp = features::tokenize(j.at("hypothesis").get<std::string>(), features::TokenizeMode::character);
      const auto ref = features::tokenize(j.at("reference").get<std::string>(), features::TokenizeMode::character);
      r.value = stats::sentence_bleu(hyp, ref);
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": bad BLEU input: " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

EvalReport cmd_qe_correlate(const QeCorrelateOptions& opt) {
  if (opt.qe_scores.empty()) throw ValidationError("give at least one --qe file");
  ConfigHash hash("qe-correlate");
  hash.file("scores", opt.tindex_scores);
  std::map<std::string, double, std::less<>> tindex;
  for (const auto& r : scoring::read_scores(opt.tindex_scores)) {
    if (r.method != scoring::Method::tindex) continue;
    if (!tindex.emplace(r.sample_id, r.value).second) {
      throw ValidationError("two tindex scores for sample \"" + r.sample_id + "\"");
    }
  }
  if (tindex.empty()) throw ValidationError(opt.tindex_scores.string() + " holds no tindex scores");

  using CellKey = std::pair<std::string, QeCondition>;
  std::map<CellKey, std::vector<QeScoreRecord>> cells;
  for (const auto& path : opt.qe_scores) {
    hash.file("qe", path);
    for (auto& r : read_qe_scores(path)) cells[{r.metric_name, r.condition}].push_back(std::move(r));
  }
  ordered_json out_cells = ordered_json::array();
  for (auto& [key, records] : cells) {
    std::set<std::string> seen;
    std::vector<double> x, y;
    ordered_json points = ordered_json::array();
    for (const auto& r : records) {
      if (!seen.insert(r.sample_id).second) {
        throw ValidationError(key.first + "/" + std::string(to_string(key.second)) + " has sample \"" + r.sample_id +
                              "\" twice");
      }
      const auto it = tindex.find(r.sample_id);
      if (it == tindex.end()) {
        throw ValidationError("misaligned ids: " + key.first + "/" + std::string(to_string(key.second)) +
                              " sample \"" + r.sample_id + "\" has no tindex score");
      }
      x.push_back(it->second);
      y.push_back(r.value);
      points.push_back({{"sample_id", r.sample_id},
                        {"system_id", r.system_id},
                        {"tindex", number(it->second)},
                        {"value", number(r.value)}});
    }
    std::optional<stats::Correlation> corr;
    try {
      corr = stats::pearson(x, y);
    } catch (const UndefinedScoreError&) {
    }
    out_cells.push_back({{"metric", key.first},
                         {"condition", to_string(key.second)},
                         {"pearson", correlation_json(corr)},
                         {"points", points}});
  }
  EvalReport report;
  report.kind = ReportKind::qe_correlation;
  report.payload = {{"cells", out_cells}};
  report.config_hash = hash.hex();
  return report;
}

}  // namespace ttk::cli
