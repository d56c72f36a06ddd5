#include "ttk/corpus.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <set>

#include "ttk/error.hpp"
#include "ttk/random.hpp"
#include "ttk/resources.hpp"
#include "ttk/text.hpp"

namespace ttk::corpus {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string required_string(const json& obj, const char* field) {
  const auto it = obj.find(field);
  if (it == obj.end()) throw ValidationError(std::string("missing field \"") + field + "\"");
  if (!it->is_string()) throw ValidationError(std::string("field \"") + field + "\" must be a string");
  return it->get<std::string>();
}

std::string at_line(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

}  // namespace

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::low: return "low";
    case Condition::high: return "high";
    case Condition::wild: return "wild";
  }
  return "?";
}

Condition parse_condition(std::string_view s) {
  if (s == "low") return Condition::low;
  if (s == "high") return Condition::high;
  if (s == "wild") return Condition::wild;
  throw ValidationError("unknown condition \"" + std::string(s) + "\" (expected low|high|wild)");
}

Dataset::Dataset(std::vector<SourceText> sources, std::vector<TranslationRecord> translations)
    : sources_(std::move(sources)), translations_(std::move(translations)) {
  std::set<std::string, std::less<>> seen;
  for (std::size_t i = 0; i < sources_.size(); ++i) {
    const auto& s = sources_[i];
    if (s.id.empty()) throw ValidationError("source with empty id");
    if (!seen.insert(s.id).second) throw ValidationError("duplicate id \"" + s.id + "\"");
    if (s.text.empty()) throw ValidationError("source \"" + s.id + "\" has empty text");
    source_by_id_.emplace(s.id, i);
  }
  for (std::size_t i = 0; i < translations_.size(); ++i) {
    const auto& t = translations_[i];
    if (t.id.empty()) throw ValidationError("translation with empty id");
    if (!seen.insert(t.id).second) throw ValidationError("duplicate id \"" + t.id + "\"");
    if (t.text.empty()) throw ValidationError("translation \"" + t.id + "\" has empty text");
    if (!source_by_id_.contains(t.source_id))
      throw ValidationError("translation \"" + t.id + "\" refers to unknown source_id \"" + t.source_id + "\"");
    translation_by_id_.emplace(t.id, i);
  }
}

const SourceText& Dataset::source(std::string_view id) const {
  const auto it = source_by_id_.find(id);
  if (it == source_by_id_.end()) throw ValidationError("unknown source id \"" + std::string(id) + "\"");
  return sources_[it->second];
}

const TranslationRecord* Dataset::find_translation(std::string_view id) const {
  const auto it = translation_by_id_.find(id);
  return it == translation_by_id_.end() ? nullptr : &translations_[it->second];
}

std::size_t Dataset::source_index(std::string_view id) const {
  const auto it = source_by_id_.find(id);
  if (it == source_by_id_.end()) throw ValidationError("unknown source id \"" + std::string(id) + "\"");
  return it->second;
}

Dataset parse_dataset(std::string_view jsonl) {
  std::vector<SourceText> sources;
  std::vector<TranslationRecord> translations;
  std::map<std::string, std::size_t> line_of;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  for (auto line : text::split_lines(jsonl)) {
    ++line_no;
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    try {
      const auto obj = json::parse(line);
      if (!obj.is_object()) throw ValidationError("record must be a JSON object");
      const auto kind = required_string(obj, "kind");
      if (kind == "source") {
        sources.push_back({required_string(obj, "id"), required_string(obj, "genre"), required_string(obj, "text")});
        if (!ids.insert(sources.back().id).second)
          throw ValidationError("duplicate id \"" + sources.back().id + "\"");
        line_of.emplace(sources.back().id, line_no);
      } else if (kind == "translation") {
        TranslationRecord t;
        t.id = required_string(obj, "id");
        t.source_id = required_string(obj, "source_id");
        t.author = required_string(obj, "author");
        t.condition = parse_condition(required_string(obj, "condition"));
        t.text = required_string(obj, "text");
        if (!ids.insert(t.id).second) throw ValidationError("duplicate id \"" + t.id + "\"");
        line_of.emplace(t.id, line_no);
        translations.push_back(std::move(t));
      } else {
        throw ValidationError("unknown kind \"" + kind + "\"");
      }
    } catch (const json::exception& e) {
      throw ValidationError(at_line(line_no, std::string("malformed JSON: ") + e.what()));
    } catch (const ValidationError& e) {
      throw ValidationError(at_line(line_no, e.what()));
    }
  }
  // Cross-record checks happen after the whole file is read so that a
  // translation may precede its source.
  std::set<std::string, std::less<>> source_ids;
  for (const auto& s : sources) source_ids.insert(s.id);
  for (const auto& t : translations) {
    if (!source_ids.contains(t.source_id)) {
      const auto it = line_of.find(t.id);
      throw ValidationError(at_line(it == line_of.end() ? 0 : it->second,
                                    "translation \"" + t.id + "\" refers to unknown source_id \"" + t.source_id + "\""));
    }
  }
  return Dataset(std::move(sources), std::move(translations));
}

Dataset load_dataset(const std::filesystem::path& path) {
  const auto bytes = text::read_file(path);
  try {
    return parse_dataset(bytes);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string serialize_dataset(const Dataset& dataset) {
  std::string out;
  for (const auto& s : dataset.sources()) {
    ordered_json o;
    o["kind"] = "source";
    o["id"] = s.id;
    o["genre"] = s.genre;
    o["text"] = s.text;
    out += o.dump();
    out += '\n';
  }
  for (const auto& t : dataset.translations()) {
    ordered_json o;
    o["kind"] = "translation";
    o["id"] = t.id;
    o["source_id"] = t.source_id;
    o["author"] = t.author;
    o["condition"] = to_string(t.condition);
    o["text"] = t.text;
    out += o.dump();
    out += '\n';
  }
  return out;
}

std::string to_string(const DomainKey& key) { return key.genre + ":" + key.author; }

DomainKey parse_domain_key(std::string_view s) {
  const auto colon = s.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == s.size())
    throw ValidationError("domain key must look like genre:author, got \"" + std::string(s) + "\"");
  return {std::string(s.substr(0, colon)), std::string(s.substr(colon + 1))};
}

TripletBuild build_triplets(const Dataset& dataset) {
  struct Group {
    std::vector<const TranslationRecord*> low;
    std::vector<const TranslationRecord*> high;
    std::vector<std::string> ids;
  };
  // Keyed by (source position, author) so output order follows the file.
  std::map<std::pair<std::size_t, std::string>, Group> groups;
  for (const auto& t : dataset.translations()) {
    if (t.condition == Condition::wild) continue;
    auto& g = groups[{dataset.source_index(t.source_id), t.author}];
    (t.condition == Condition::low ? g.low : g.high).push_back(&t);
    g.ids.push_back(t.id);
  }

  TripletBuild out;
  for (const auto& [key, g] : groups) {
    const auto& source = dataset.sources()[key.first];
    if (g.low.size() > 1 || g.high.size() > 1) {
      throw ValidationError("ambiguous pairing for source \"" + source.id + "\", author \"" + key.second +
                            "\": " + std::to_string(g.low.size()) + " low and " + std::to_string(g.high.size()) +
                            " high records");
    }
    if (g.low.size() == 1 && g.high.size() == 1) {
      out.triplets.push_back({source, *g.low.front(), *g.high.front()});
    } else {
      out.orphans.push_back({source.id, key.second, g.ids,
                             g.low.empty() ? "missing low translation" : "missing high translation"});
    }
  }
  return out;
}

namespace {

std::map<DomainKey, std::vector<std::size_t>> group_by_domain(const std::vector<Triplet>& triplets) {
  std::map<DomainKey, std::vector<std::size_t>> by_domain;
  for (std::size_t i = 0; i < triplets.size(); ++i) by_domain[triplets[i].domain()].push_back(i);
  return by_domain;
}

std::uint64_t domain_seed(std::uint64_t seed, const DomainKey& key) {
  std::uint64_t s = seed ^ fnv1a64(key.genre + '\x1f' + key.author);
  return splitmix64(s);
}

}  // namespace

Splits split(const std::vector<Triplet>& triplets, const SplitSpec& spec) {
  const std::size_t need = spec.train_n + spec.valid_n + spec.test_n;
  std::vector<int> assignment(triplets.size(), -1);
  for (const auto& [key, members] : group_by_domain(triplets)) {
    if (members.size() < need) {
      throw ValidationError("domain " + to_string(key) + " has " + std::to_string(members.size()) +
                            " triplets, split needs " + std::to_string(need));
    }
    Xorshift64Star rng(domain_seed(spec.seed, key));
    const auto picked = rng.sample_indices(members.size(), need);
    for (std::size_t r = 0; r < picked.size(); ++r) {
      const int which = r < spec.train_n ? 0 : (r < spec.train_n + spec.valid_n ? 1 : 2);
      assignment[members[picked[r]]] = which;
    }
  }
  Splits out;
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    switch (assignment[i]) {
      case 0: out.train.push_back(triplets[i]); break;
      case 1: out.valid.push_back(triplets[i]); break;
      case 2: out.test.push_back(triplets[i]); break;
      default: break;
    }
  }
  return out;
}

std::string_view to_string(MixKind k) {
  switch (k) {
    case MixKind::unpaired: return "unpaired";
    case MixKind::single_domain: return "single_domain";
    case MixKind::mixed_domain: return "mixed_domain";
  }
  return "?";
}

MixKind parse_mix_kind(std::string_view s) {
  if (s == "unpaired") return MixKind::unpaired;
  if (s == "single_domain") return MixKind::single_domain;
  if (s == "mixed_domain") return MixKind::mixed_domain;
  throw ValidationError("unknown mix strategy \"" + std::string(s) + "\"");
}

std::vector<TrainingPair> select_training_pairs(const std::vector<Triplet>& triplets, const MixStrategy& strategy) {
  if (strategy.k < 1) throw ValidationError("mix strategy needs k >= 1");
  const auto by_domain = group_by_domain(triplets);
  auto members_of = [&](const DomainKey& key) -> const std::vector<std::size_t>& {
    const auto it = by_domain.find(key);
    if (it == by_domain.end()) throw ValidationError("no triplets for domain " + to_string(key));
    return it->second;
  };
  auto check_k = [&](std::size_t available, const std::string& where) {
    if (strategy.k > available) {
      throw ValidationError("k=" + std::to_string(strategy.k) + " exceeds the " + std::to_string(available) +
                            " pairs available in " + where);
    }
  };
  auto paired = [](const Triplet& t) { return TrainingPair{t.source, t.low.text, t.source, t.high.text}; };

  Xorshift64Star rng(strategy.seed);
  std::vector<TrainingPair> out;
  switch (strategy.kind) {
    case MixKind::single_domain: {
      if (strategy.domains.size() != 1) throw ValidationError("single_domain needs exactly one domain");
      const auto& members = members_of(strategy.domains.front());
      check_k(members.size(), to_string(strategy.domains.front()));
      for (auto r : rng.sample_indices(members.size(), strategy.k)) out.push_back(paired(triplets[members[r]]));
      break;
    }
    case MixKind::mixed_domain: {
      std::vector<std::size_t> pool;
      if (strategy.domains.empty()) {
        for (const auto& [key, members] : by_domain) pool.insert(pool.end(), members.begin(), members.end());
      } else {
        for (const auto& key : strategy.domains) {
          const auto& members = members_of(key);
          pool.insert(pool.end(), members.begin(), members.end());
        }
      }
      check_k(pool.size(), "the mixed pool");
      for (auto r : rng.sample_indices(pool.size(), strategy.k)) out.push_back(paired(triplets[pool[r]]));
      break;
    }
    case MixKind::unpaired: {
      if (strategy.domains.size() != 2 || strategy.domains[0] == strategy.domains[1])
        throw ValidationError("unpaired needs two distinct domains");
      const auto& a = members_of(strategy.domains[0]);
      const auto& b = members_of(strategy.domains[1]);
      check_k(a.size(), to_string(strategy.domains[0]));
      check_k(b.size(), to_string(strategy.domains[1]));
      const auto pick_a = rng.sample_indices(a.size(), strategy.k);
      const auto pick_b = rng.sample_indices(b.size(), strategy.k);
      for (std::size_t i = 0; i < strategy.k; ++i) {
        const auto& low = triplets[a[pick_a[i]]];
        const auto& high = triplets[b[pick_b[i]]];
        out.push_back({low.source, low.low.text, high.source, high.high.text});
      }
      break;
    }
  }
  return out;
}

std::string_view default_sft_template() { return resources::get("sft_template.txt"); }

std::string render_sft(const std::vector<TrainingPair>& pairs, Side side, std::string_view tmpl) {
  if (!text::has_source_placeholder(tmpl))
    throw ValidationError("SFT template has no " + std::string(text::kSourcePlaceholder) + " placeholder");
  std::string out;
  for (const auto& p : pairs) {
    const auto& src = side == Side::low ? p.low_source : p.high_source;
    ordered_json o;
    o["prompt"] = text::render_template(tmpl, src.text);
    o["completion"] = side == Side::low ? p.low_text : p.high_text;
    out += o.dump();
    out += '\n';
  }
  return out;
}

void export_sft(const std::vector<TrainingPair>& pairs, Side side, std::string_view tmpl,
                const std::filesystem::path& path) {
  text::write_file(path, render_sft(pairs, side, tmpl));
}

}  // namespace ttk::corpus
