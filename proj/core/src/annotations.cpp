#include "ttk/annotations.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <set>

#include "ttk/error.hpp"
#include "ttk/features.hpp"
#include "ttk/numeric.hpp"
#include "ttk/scoring.hpp"
#include "ttk/text.hpp"

namespace ttk::annotations {
namespace {

using json = nlohmann::json;

std::string required_string(const json& obj, const char* field) {
  const auto it = obj.find(field);
  if (it == obj.end()) throw ValidationError(std::string("missing field \"") + field + "\"");
  if (!it->is_string()) throw ValidationError(std::string("field \"") + field + "\" must be a string");
  auto s = it->get<std::string>();
  if (s.empty()) throw ValidationError(std::string("field \"") + field + "\" is empty");
  return s;
}

// Runs `fn` on every non-blank line as a parsed object, prefixing errors with
// the line number.
template <class Fn>
void for_each_object(std::string_view jsonl, Fn&& fn) {
  std::size_t line_no = 0;
  for (auto line : text::split_lines(jsonl)) {
    ++line_no;
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    try {
      const auto obj = json::parse(line);
      if (!obj.is_object()) throw ValidationError("expected a JSON object");
      fn(obj);
    } catch (const json::exception& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": malformed JSON: " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

template <class T>
std::vector<T> read_with(const std::filesystem::path& path, std::vector<T> (*parse)(std::string_view)) {
  const auto bytes = text::read_file(path);
  try {
    return parse(bytes);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::vector<int> bucket_range(int raters) {
  std::vector<int> out;
  for (int c = raters / 2 + 1; c <= raters; ++c) out.push_back(c);
  return out;
}

int common_raters(std::span<const PairJudgment> judgments) {
  if (judgments.empty()) throw ValidationError("no pair judgments");
  const int r = judgments.front().n_votes;
  for (const auto& j : judgments) {
    if (j.n_votes != r) {
      throw ValidationError("pair \"" + j.pair_id + "\" has " + std::to_string(j.n_votes) + " votes, expected " +
                            std::to_string(r));
    }
  }
  return r;
}

}  // namespace

std::vector<PointwiseRating> parse_pointwise(std::string_view jsonl) {
  std::vector<PointwiseRating> out;
  std::set<std::pair<std::string, std::string>> seen;
  for_each_object(jsonl, [&](const json& obj) {
    PointwiseRating r;
    r.item_id = required_string(obj, "item_id");
    r.annotator_id = required_string(obj, "annotator_id");
    const auto it = obj.find("rating");
    if (it == obj.end()) throw ValidationError("missing field \"rating\"");
    if (!it->is_number_integer()) throw ValidationError("field \"rating\" must be an integer");
    const auto v = it->get<long long>();
    if (v < 0 || v > 5) throw ValidationError("rating " + std::to_string(v) + " is outside 0..5");
    r.rating = static_cast<int>(v);
    if (!seen.emplace(r.item_id, r.annotator_id).second) {
      throw ValidationError("duplicate rating of item \"" + r.item_id + "\" by \"" + r.annotator_id + "\"");
    }
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<PairwiseVote> parse_pairwise(std::string_view jsonl) {
  std::vector<PairwiseVote> out;
  std::set<std::pair<std::string, std::string>> seen;
  for_each_object(jsonl, [&](const json& obj) {
    PairwiseVote v;
    v.pair_id = required_string(obj, "pair_id");
    v.annotator_id = required_string(obj, "annotator_id");
    v.choice = stats::parse_choice(required_string(obj, "choice"));
    if (!seen.emplace(v.pair_id, v.annotator_id).second) {
      throw ValidationError("duplicate vote on pair \"" + v.pair_id + "\" by \"" + v.annotator_id + "\"");
    }
    out.push_back(std::move(v));
  });
  return out;
}

std::vector<PairManifestEntry> parse_manifest(std::string_view jsonl) {
  std::vector<PairManifestEntry> out;
  std::set<std::string> seen;
  for_each_object(jsonl, [&](const json& obj) {
    PairManifestEntry e;
    e.pair_id = required_string(obj, "pair_id");
    e.source_id = required_string(obj, "source_id");
    e.translation_a = required_string(obj, "translation_a");
    e.translation_b = required_string(obj, "translation_b");
    if (e.translation_a == e.translation_b) {
      throw ValidationError("pair \"" + e.pair_id + "\" compares a translation with itself");
    }
    if (auto it = obj.find("spans"); it != obj.end() && !it->is_null()) e.spans = it->dump();
    if (!seen.insert(e.pair_id).second) throw ValidationError("duplicate pair_id \"" + e.pair_id + "\"");
    out.push_back(std::move(e));
  });
  return out;
}

std::vector<PointwiseRating> read_pointwise(const std::filesystem::path& path) {
  return read_with(path, &parse_pointwise);
}
std::vector<PairwiseVote> read_pairwise(const std::filesystem::path& path) { return read_with(path, &parse_pairwise); }
std::vector<PairManifestEntry> read_manifest(const std::filesystem::path& path) {
  return read_with(path, &parse_manifest);
}

std::vector<ItemRating> aggregate_pointwise(std::span<const PointwiseRating> ratings) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>, std::less<>> by_item;
  for (const auto& r : ratings) {
    if (r.rating < 0 || r.rating > 5) {
      throw ValidationError("rating " + std::to_string(r.rating) + " of item \"" + r.item_id + "\" is outside 0..5");
    }
    auto [it, inserted] = by_item.try_emplace(r.item_id);
    if (inserted) order.push_back(r.item_id);
    it->second.push_back(r.rating);
  }
  std::vector<ItemRating> out;
  for (const auto& id : order) {
    const auto& v = by_item.find(id)->second;
    ItemRating item{id, mean(v), 0.0, v.size()};
    if (v.size() > 1) {
      std::vector<double> sq;
      for (double x : v) sq.push_back((x - item.mean) * (x - item.mean));
      item.std = std::sqrt(pairwise_sum(sq) / static_cast<double>(v.size() - 1));
    }
    out.push_back(std::move(item));
  }
  return out;
}

std::vector<PairJudgment> aggregate_pairwise(std::span<const PairwiseVote> votes, int raters_per_pair) {
  if (raters_per_pair < 1 || raters_per_pair % 2 == 0) {
    throw ValidationError("raters per pair must be a positive odd number, got " + std::to_string(raters_per_pair));
  }
  std::vector<std::string> order;
  std::map<std::string, std::vector<Choice>, std::less<>> by_pair;
  for (const auto& v : votes) {
    auto [it, inserted] = by_pair.try_emplace(v.pair_id);
    if (inserted) order.push_back(v.pair_id);
    it->second.push_back(v.choice);
  }
  std::vector<PairJudgment> out;
  for (const auto& id : order) {
    const auto& v = by_pair.find(id)->second;
    if (static_cast<int>(v.size()) != raters_per_pair) {
      throw ValidationError("pair \"" + id + "\" has " + std::to_string(v.size()) + " votes, expected " +
                            std::to_string(raters_per_pair));
    }
    const auto m = stats::majority_vote(v);
    out.push_back({id, m.choice, m.agreement_count, raters_per_pair});
  }
  return out;
}

double pairwise_kappa(std::span<const PairwiseVote> votes, int raters_per_pair) {
  const auto judgments = aggregate_pairwise(votes, raters_per_pair);
  std::vector<std::vector<int>> counts;
  for (const auto& j : judgments) {
    const int majority = j.agreement_count, minority = j.n_votes - j.agreement_count;
    counts.push_back(j.majority == Choice::A ? std::vector<int>{majority, minority}
                                             : std::vector<int>{minority, majority});
  }
  return stats::fleiss_kappa(counts, raters_per_pair);
}

std::optional<Choice> choose_by_score(double score_a, double score_b) {
  if (score_a > score_b) return Choice::A;
  if (score_b > score_a) return Choice::B;
  return std::nullopt;
}

AgreementReport method_agreement_by_bucket(
    std::span<const PairJudgment> judgments,
    const std::map<std::string, std::optional<Choice>, std::less<>>& method_choices) {
  const int raters = common_raters(judgments);
  AgreementReport out;
  for (int c : bucket_range(raters)) out.buckets.push_back({c, 0, 0, 0, std::nullopt});
  const int first = raters / 2 + 1;
  for (const auto& j : judgments) {
    const auto it = method_choices.find(j.pair_id);
    if (it == method_choices.end()) throw ValidationError("no method choice for pair \"" + j.pair_id + "\"");
    if (j.agreement_count < first || j.agreement_count > raters) {
      throw ValidationError("pair \"" + j.pair_id + "\" has impossible agreement count " +
                            std::to_string(j.agreement_count));
    }
    auto& bucket = out.buckets[static_cast<std::size_t>(j.agreement_count - first)];
    ++bucket.n;
    ++out.n;
    if (!it->second) {
      ++bucket.ties;
      ++out.ties;
    } else if (*it->second == j.majority) {
      ++bucket.correct;
      ++out.correct;
    }
  }
  for (auto& b : out.buckets) {
    if (b.n > 0) b.accuracy = static_cast<double>(b.correct) / static_cast<double>(b.n);
  }
  out.accuracy = static_cast<double>(out.correct) / static_cast<double>(out.n);
  return out;
}

stats::Correlation pointwise_correlation(std::span<const double> item_scores,
                                         std::span<const double> item_mean_ratings) {
  return stats::pearson(item_scores, item_mean_ratings);
}

DisagreementReport disagreement_analysis(std::span<const DisagreementPair> pairs, int raters_per_pair) {
  if (raters_per_pair < 1 || raters_per_pair % 2 == 0) {
    throw ValidationError("raters per pair must be a positive odd number, got " + std::to_string(raters_per_pair));
  }
  if (pairs.empty()) throw ValidationError("disagreement analysis needs at least one pair");
  DisagreementReport out;
  std::vector<double> counts, bleus, deltas;
  for (const auto& p : pairs) {
    if (p.text_a.empty() || p.text_b.empty()) throw ValidationError("pair \"" + p.pair_id + "\" is missing a text");
    if (p.agreement_count <= raters_per_pair / 2 || p.agreement_count > raters_per_pair) {
      throw ValidationError("pair \"" + p.pair_id + "\" has impossible agreement count " +
                            std::to_string(p.agreement_count));
    }
    const auto hyp = features::tokenize(p.text_a, features::TokenizeMode::character);
    const auto ref = features::tokenize(p.text_b, features::TokenizeMode::character);
    if (hyp.empty() || ref.empty()) {
      throw ValidationError("pair \"" + p.pair_id + "\" has a translation without characters");
    }
    DisagreementRow row{p.pair_id, p.agreement_count, stats::sentence_bleu(hyp, ref),
                        scoring::delta_tindex(p.tindex_a, p.tindex_b)};
    counts.push_back(row.agreement_count);
    bleus.push_back(row.bleu);
    deltas.push_back(row.delta_tindex);
    out.rows.push_back(std::move(row));
  }
  for (int c : bucket_range(raters_per_pair)) {
    std::vector<double> b, d;
    for (const auto& row : out.rows) {
      if (row.agreement_count == c) {
        b.push_back(row.bleu);
        d.push_back(row.delta_tindex);
      }
    }
    DisagreementBucket bucket{c, b.size(), std::nullopt, std::nullopt};
    if (!b.empty()) {
      bucket.mean_bleu = mean(b);
      bucket.mean_delta_tindex = mean(d);
    }
    out.buckets.push_back(bucket);
  }
  auto try_spearman = [](const std::vector<double>& x, const std::vector<double>& y) -> std::optional<stats::Correlation> {
    try {
      return stats::spearman(x, y);
    } catch (const ValidationError&) {
      return std::nullopt;
    }
  };
  out.bleu_vs_agreement = try_spearman(bleus, counts);
  out.delta_vs_agreement = try_spearman(deltas, counts);
  return out;
}

}  // namespace ttk::annotations
