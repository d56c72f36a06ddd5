#include <algorithm>
#include <atomic>
#include <exception>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>
#include <thread>

#include "ttk/backend.hpp"
#include "ttk/error.hpp"
#include "ttk/hash.hpp"
#include "ttk/random.hpp"
#include "ttk/resources.hpp"
#include "ttk/text.hpp"

namespace ttk::backend {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr const char* kCompletionsPath = "/v1/completions";
constexpr const char* kChatPath = "/v1/chat/completions";

bool retryable(const HttpResponse& r) { return r.status < 0 || r.status == 429 || r.status >= 500; }

std::chrono::milliseconds backoff_delay(const BackendConfig& cfg, std::size_t attempt) {
  thread_local Xorshift64Star jitter(std::random_device{}());
  double base = static_cast<double>(cfg.backoff_initial.count());
  for (std::size_t i = 0; i < attempt; ++i) base *= 2.0;
  base = std::min(base, static_cast<double>(cfg.backoff_max.count()));
  // "Equal jitter": half fixed, half uniform.
  return std::chrono::milliseconds(static_cast<std::int64_t>(base * (0.5 + 0.5 * jitter.uniform())));
}

std::string describe(const HttpResponse& r) {
  if (r.status < 0) return "transport error: " + (r.error.empty() ? std::string("no response") : r.error);
  std::string body = r.body.substr(0, 200);
  return "HTTP " + std::to_string(r.status) + (body.empty() ? "" : ": " + body);
}

void raise_for_status(const HttpResponse& r, const std::string& what) {
  if (r.status >= 200 && r.status < 300) return;
  if (r.status == 401 || r.status == 403) throw IoError(what + " was not authorised (" + describe(r) + ")");
  if (r.status >= 400 && r.status < 500)
    throw CapabilityError(what + " was rejected by the endpoint (" + describe(r) + ")");
  throw TransportError(what + " failed: " + describe(r));
}

json parse_body(const HttpResponse& r, const std::string& what) {
  try {
    return json::parse(r.body);
  } catch (const json::exception& e) {
    throw IoError(what + ": response is not JSON (" + e.what() + ")");
  }
}

}  // namespace

void BackendConfig::validate() const {
  if (max_parallel < 1) throw ValidationError("max_parallel must be >= 1");
  if (model_id.empty()) throw ValidationError("model_id must not be empty");
  if (!scoring_template.empty() && !text::has_source_placeholder(scoring_template))
    throw ValidationError("scoring template has no {source} placeholder");
}

ResponseCache::ResponseCache(std::filesystem::path directory) : directory_(std::move(directory)) {
  std::error_code ec;
  std::filesystem::create_directories(*directory_, ec);
  if (ec) throw IoError("cannot create cache directory " + directory_->string() + ": " + ec.message());
}

std::optional<std::vector<double>> ResponseCache::get(const std::string& key) {
  {
    std::lock_guard lock(mu_);
    if (auto it = memory_.find(key); it != memory_.end()) return it->second;
  }
  if (!directory_) return std::nullopt;
  const auto path = *directory_ / (key + ".json");
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  try {
    auto values = json::parse(text::read_file(path)).get<std::vector<double>>();
    std::lock_guard lock(mu_);
    memory_[key] = values;
    return values;
  } catch (const std::exception&) {
    return std::nullopt;  // torn or foreign file: treat as a miss
  }
}

void ResponseCache::put(const std::string& key, const std::vector<double>& value) {
  {
    std::lock_guard lock(mu_);
    memory_[key] = value;
  }
  if (!directory_) return;
  const auto final_path = *directory_ / (key + ".json");
  std::ostringstream tmp_name;
  tmp_name << key << ".tmp." << std::this_thread::get_id();
  const auto tmp = *directory_ / tmp_name.str();
  text::write_file(tmp, json(value).dump());
  std::error_code ec;
  std::filesystem::rename(tmp, final_path, ec);
  if (ec) throw IoError("cannot publish cache entry " + final_path.string() + ": " + ec.message());
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mu_);
  return memory_.size();
}

std::string cache_key(std::string_view model_id, std::string_view prompt, std::string_view translation) {
  std::string content(prompt);
  content.push_back('\0');
  content.append(translation);
  std::string outer(model_id);
  outer.push_back('\0');
  outer += sha256_hex(content);
  return sha256_hex(outer);
}

std::string_view to_string(PromptKind k) {
  switch (k) {
    case PromptKind::low_translationese: return "low_translationese";
    case PromptKind::high_translationese: return "high_translationese";
    case PromptKind::vanilla: return "vanilla";
  }
  return "?";
}

PromptKind parse_prompt_kind(std::string_view s) {
  if (s == "low_translationese" || s == "low") return PromptKind::low_translationese;
  if (s == "high_translationese" || s == "high") return PromptKind::high_translationese;
  if (s == "vanilla") return PromptKind::vanilla;
  throw ValidationError("unknown prompt kind \"" + std::string(s) + "\"");
}

GenerationPrompt bundled_prompt(PromptKind kind) {
  const std::string file = "prompts/" + std::string(to_string(kind)) + ".txt";
  return {kind, std::string(resources::get(file))};
}

ModelClient::ModelClient(BackendConfig config, std::shared_ptr<Transport> transport,
                         std::shared_ptr<ResponseCache> cache)
    : config_(std::move(config)), transport_(std::move(transport)), cache_(std::move(cache)) {
  config_.validate();
  if (!transport_) throw ValidationError("ModelClient needs a transport");
  if (!cache_) cache_ = std::make_shared<ResponseCache>();
}

std::string ModelClient::scoring_prompt(std::string_view source) const {
  const std::string_view tmpl =
      config_.scoring_template.empty() ? resources::get("sft_template.txt") : std::string_view(config_.scoring_template);
  return text::render_template(tmpl, source);
}

HttpResponse ModelClient::post_with_retry(const std::string& path, const std::string& body) {
  HttpResponse last;
  for (std::size_t attempt = 0; attempt <= config_.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(backoff_delay(config_, attempt - 1));
    last = transport_->post_json(path, body);
    if (!retryable(last)) return last;
  }
  throw TransportError("POST " + path + " failed after " + std::to_string(config_.retries + 1) +
                       " attempts: " + describe(last));
}

TokenScores ModelClient::fetch_logprobs(const std::string& sample_id, std::string_view source,
                                        std::string_view translation) {
  const auto prompt = scoring_prompt(source);
  const auto key = cache_key(config_.model_id, prompt, translation);
  if (auto hit = cache_->get(key)) return TokenScores{sample_id, config_.model_id, std::move(*hit), {}, {}, {}};

  ordered_json req;
  req["model"] = config_.model_id;
  req["prompt"] = prompt + std::string(translation);
  req["max_tokens"] = 0;
  req["echo"] = true;
  req["logprobs"] = 0;
  req["temperature"] = 0;
  const std::string what = "scoring request for \"" + sample_id + "\"";
  const auto resp = post_with_retry(kCompletionsPath, req.dump());
  raise_for_status(resp, what);
  const auto body = parse_body(resp, what);

  const json* lp = nullptr;
  if (body.contains("choices") && body["choices"].is_array() && !body["choices"].empty()) {
    const auto& choice = body["choices"][0];
    if (choice.contains("logprobs") && choice["logprobs"].is_object()) lp = &choice["logprobs"];
  }
  if (!lp || !lp->contains("token_logprobs") || !lp->contains("text_offset") ||
      !(*lp)["token_logprobs"].is_array() || !(*lp)["text_offset"].is_array()) {
    throw CapabilityError("endpoint returned no per-token logprobs for " + what +
                          " (needs echo + logprobs support on /v1/completions)");
  }
  const auto& lps = (*lp)["token_logprobs"];
  const auto& offsets = (*lp)["text_offset"];
  if (lps.size() != offsets.size()) throw CapabilityError(what + ": token_logprobs and text_offset differ in length");

  // Offsets are code-point indices into the echoed prompt+translation.
  const auto prompt_len = text::utf8_length(prompt);
  std::vector<double> values;
  for (std::size_t i = 0; i < lps.size(); ++i) {
    if (!offsets[i].is_number_integer()) throw CapabilityError(what + ": non-integer text_offset");
    if (offsets[i].get<std::int64_t>() < static_cast<std::int64_t>(prompt_len)) continue;
    if (!lps[i].is_number()) throw CapabilityError(what + ": missing logprob for continuation token " + std::to_string(i));
    double v = lps[i].get<double>();
    if (v > 0.0 && v <= 1e-6) v = 0.0;  // server-side rounding of log(1)
    values.push_back(v);
  }
  TokenScores ts{sample_id, config_.model_id, std::move(values), {}, {}, {}};
  validate(ts);
  cache_->put(key, ts.token_logprobs);
  return ts;
}

std::vector<TokenScores> ModelClient::fetch_batch(std::span<const ScoringRequest> requests) {
  std::vector<std::optional<TokenScores>> slots(requests.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mu;

  auto worker = [&] {
    while (!failed.load()) {
      const auto i = next.fetch_add(1);
      if (i >= requests.size()) return;
      try {
        const auto& r = requests[i];
        slots[i] = fetch_logprobs(r.sample_id, r.source, r.translation);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        failed = true;
      }
    }
  };
  const auto n_workers = std::min(config_.max_parallel, requests.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);

  std::vector<TokenScores> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::string ModelClient::generate_translation(const GenerationPrompt& prompt, std::string_view source) {
  ordered_json req;
  req["model"] = config_.model_id;
  req["messages"] = ordered_json::array({{{"role", "user"}, {"content", text::render_template(prompt.template_text, source)}}});
  if (config_.temperature) req["temperature"] = *config_.temperature;
  const std::string what = "generation request";
  const auto resp = post_with_retry(kChatPath, req.dump());
  raise_for_status(resp, what);
  const auto body = parse_body(resp, what);
  std::string content;
  try {
    content = body.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw CapabilityError("chat endpoint response lacks choices[0].message.content (" + std::string(e.what()) + ")");
  }
  if (content.empty()) throw ValidationError("chat endpoint returned an empty completion");
  return content;
}

}  // namespace ttk::backend
