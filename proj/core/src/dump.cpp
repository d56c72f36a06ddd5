#include <charconv>
#include <cmath>
#include <nlohmann/json.hpp>

#include "ttk/backend.hpp"
#include "ttk/error.hpp"
#include "ttk/text.hpp"

namespace ttk::backend {
namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& field, std::size_t index, const std::string& what) {
  throw ValidationError(field + "[" + std::to_string(index) + "] " + what);
}

void check_length(const std::optional<std::vector<double>>& xs, const char* field, std::size_t n) {
  if (xs && xs->size() != n) {
    throw ValidationError(std::string(field) + " has length " + std::to_string(xs->size()) +
                          " but n_tokens is " + std::to_string(n));
  }
}

template <class T>
void append_number(std::string& out, T x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  out.append(buf, res.ptr);
}

template <class T>
void append_array(std::string& out, const std::vector<T>& xs) {
  out.push_back('[');
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out.push_back(',');
    append_number(out, xs[i]);
  }
  out.push_back(']');
}

std::vector<double> read_array(const json& obj, const char* field) {
  const auto& v = obj.at(field);
  if (!v.is_array()) throw ValidationError(std::string(field) + " must be an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(field, i, "is not a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

}  // namespace

void validate(const TokenScores& ts) {
  const auto n = ts.n_tokens();
  if (n < 1) throw ValidationError("record \"" + ts.sample_id + "\": n_tokens must be >= 1");
  if (ts.sample_id.empty()) throw ValidationError("record has empty sample_id");
  for (std::size_t i = 0; i < n; ++i) {
    const double lp = ts.token_logprobs[i];
    if (!std::isfinite(lp)) fail("token_logprobs", i, "is not finite");
    if (lp > 0.0) fail("token_logprobs", i, "is positive (" + std::to_string(lp) + ")");
  }
  check_length(ts.token_entropies, "token_entropies", n);
  check_length(ts.logp_second_moments, "logp_second_moments", n);
  if (ts.token_entropies) {
    for (std::size_t i = 0; i < n; ++i) {
      const double h = (*ts.token_entropies)[i];
      if (!std::isfinite(h)) fail("token_entropies", i, "is not finite");
      if (h < 0.0) fail("token_entropies", i, "is negative");
    }
  }
  if (ts.logp_second_moments) {
    for (std::size_t i = 0; i < n; ++i) {
      const double m2 = (*ts.logp_second_moments)[i];
      if (!std::isfinite(m2)) fail("logp_second_moments", i, "is not finite");
      if (m2 < 0.0) fail("logp_second_moments", i, "is negative");
      if (ts.token_entropies) {
        const double h = (*ts.token_entropies)[i];
        // Var[log p] = M2 - H^2 >= 0, allowing float64 rounding of the producer.
        if (m2 < h * h * (1.0 - 1e-12) - 1e-12) fail("logp_second_moments", i, "is below token_entropies^2");
      }
    }
  }
  if (ts.layer_embeddings) {
    const auto& e = *ts.layer_embeddings;
    if (e.layers < 1 || e.dim < 1) throw ValidationError("layer_embeddings needs layers >= 1 and dim >= 1");
    if (e.data.size() != e.layers * e.dim) {
      throw ValidationError("layer_embeddings.data has " + std::to_string(e.data.size()) + " values, expected " +
                            std::to_string(e.layers) + "x" + std::to_string(e.dim));
    }
    for (std::size_t i = 0; i < e.data.size(); ++i) {
      if (!std::isfinite(e.data[i])) fail("layer_embeddings.data", i, "is not finite");
    }
  }
}

TokenScores parse_dump_record(std::string_view line) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ValidationError("dump record must be a JSON object");
  TokenScores ts;
  try {
    ts.sample_id = obj.at("sample_id").get<std::string>();
    ts.model_id = obj.at("model_id").get<std::string>();
    const auto n = obj.at("n_tokens").get<std::int64_t>();
    ts.token_logprobs = read_array(obj, "token_logprobs");
    if (n < 0 || static_cast<std::size_t>(n) != ts.token_logprobs.size()) {
      throw ValidationError("token_logprobs has length " + std::to_string(ts.token_logprobs.size()) +
                            " but n_tokens is " + std::to_string(n));
    }
    if (obj.contains("token_entropies") && !obj["token_entropies"].is_null())
      ts.token_entropies = read_array(obj, "token_entropies");
    if (obj.contains("logp_second_moments") && !obj["logp_second_moments"].is_null())
      ts.logp_second_moments = read_array(obj, "logp_second_moments");
    if (obj.contains("layer_embeddings") && !obj["layer_embeddings"].is_null()) {
      const auto& e = obj["layer_embeddings"];
      LayerEmbeddings emb;
      emb.layers = e.at("layers").get<std::size_t>();
      emb.dim = e.at("dim").get<std::size_t>();
      const auto values = read_array(e, "data");
      emb.data.reserve(values.size());
      for (double v : values) emb.data.push_back(static_cast<float>(v));
      ts.layer_embeddings = std::move(emb);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad dump record: ") + e.what());
  }
  if (!ts.sample_id.empty()) {
    try {
      validate(ts);
    } catch (const ValidationError& e) {
      throw ValidationError("record \"" + ts.sample_id + "\": " + e.what());
    }
  } else {
    validate(ts);
  }
  return ts;
}

std::string serialize_dump_record(const TokenScores& ts) {
  std::string out = "{\"sample_id\":";
  out += json(ts.sample_id).dump();
  out += ",\"model_id\":";
  out += json(ts.model_id).dump();
  out += ",\"n_tokens\":";
  append_number(out, ts.n_tokens());
  out += ",\"token_logprobs\":";
  append_array(out, ts.token_logprobs);
  if (ts.token_entropies) {
    out += ",\"token_entropies\":";
    append_array(out, *ts.token_entropies);
  }
  if (ts.logp_second_moments) {
    out += ",\"logp_second_moments\":";
    append_array(out, *ts.logp_second_moments);
  }
  if (ts.layer_embeddings) {
    const auto& e = *ts.layer_embeddings;
    out += ",\"layer_embeddings\":{\"layers\":";
    append_number(out, e.layers);
    out += ",\"dim\":";
    append_number(out, e.dim);
    out += ",\"data\":";
    append_array(out, e.data);
    out += '}';
  }
  out += '}';
  return out;
}

std::vector<TokenScores> parse_dump(std::string_view jsonl) {
  std::vector<TokenScores> out;
  std::size_t line_no = 0;
  for (auto line : text::split_lines(jsonl)) {
    ++line_no;
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    try {
      out.push_back(parse_dump_record(line));
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<TokenScores> read_dump(const std::filesystem::path& path) {
  const auto bytes = text::read_file(path);
  try {
    return parse_dump(bytes);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string serialize_dump(std::span<const TokenScores> records) {
  std::string out;
  for (const auto& r : records) {
    validate(r);
    out += serialize_dump_record(r);
    out += '\n';
  }
  return out;
}

void write_dump(std::span<const TokenScores> records, const std::filesystem::path& path) {
  text::write_file(path, serialize_dump(records));
}

}  // namespace ttk::backend
