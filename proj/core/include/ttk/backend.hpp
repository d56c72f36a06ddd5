#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Model outputs: the score-dump format, an HTTP client that fetches token
// logprobs from a completion endpoint, and chat-based translation synthesis.
namespace ttk::backend {

/// (L+1) x dim matrix of mean-pooled hidden states, row-major, float32.
/// Row 0 pools the input embeddings, rows 1..L the block outputs.
struct LayerEmbeddings {
  std::size_t layers = 0;
  std::size_t dim = 0;
  std::vector<float> data;

  std::span<const float> row(std::size_t l) const { return {data.data() + l * dim, dim}; }
  bool operator==(const LayerEmbeddings&) const = default;
};

/// Per-sample model output record. All log-probabilities are natural log.
struct TokenScores {
  std::string sample_id;
  std::string model_id;
  std::vector<double> token_logprobs;
  /// Full-distribution entropy at each position, nats.
  std::optional<std::vector<double>> token_entropies;
  /// E[(log p)^2] under the next-token distribution at each position.
  std::optional<std::vector<double>> logp_second_moments;
  std::optional<LayerEmbeddings> layer_embeddings;

  std::size_t n_tokens() const { return token_logprobs.size(); }
  bool operator==(const TokenScores&) const = default;
};

/// Throws ValidationError naming the offending field (and index) when a
/// record breaks an invariant: n_tokens >= 1, equal array lengths,
/// logprob <= 0, entropy >= 0, M2 >= H^2, finite values, embedding shape.
void validate(const TokenScores& ts);

TokenScores parse_dump_record(std::string_view line);
std::string serialize_dump_record(const TokenScores& ts);

/// Reads a dump JSONL file. Errors carry path and 1-based line number.
std::vector<TokenScores> read_dump(const std::filesystem::path& path);
std::vector<TokenScores> parse_dump(std::string_view jsonl);
std::string serialize_dump(std::span<const TokenScores> records);
void write_dump(std::span<const TokenScores> records, const std::filesystem::path& path);

struct BackendConfig {
  std::string base_url;
  std::string model_id;
  std::size_t max_parallel = 1;
  std::chrono::milliseconds timeout{30000};
  std::size_t retries = 2;
  std::chrono::milliseconds backoff_initial{200};
  std::chrono::milliseconds backoff_max{5000};
  /// Sent as "Authorization: Bearer ..." when non-empty.
  std::string api_key;
  /// Prompt rendered before the translation when scoring; must contain
  /// "{source}". Empty means the bundled SFT template.
  std::string scoring_template;
  std::optional<double> temperature;

  /// Throws ValidationError on max_parallel == 0 or empty model_id.
  void validate() const;
};

/// Environment variable read by the CLI for BackendConfig::api_key.
inline constexpr const char* kApiKeyEnv = "TTK_API_KEY";

struct HttpResponse {
  /// HTTP status, or -1 when the request never completed.
  int status = -1;
  std::string body;
  std::string error;
};

/// POSTs a JSON body to a path under the configured base URL.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post_json(const std::string& path, const std::string& body) = 0;
};

/// cpp-httplib backed transport. Safe for concurrent use (one client per call).
std::shared_ptr<Transport> make_http_transport(const BackendConfig& config);

/// Content-addressed cache of fetched logprob arrays. In-memory, optionally
/// mirrored to a directory (one file per key, written via rename so that
/// concurrent writers of the same key end with one complete value).
class ResponseCache {
 public:
  ResponseCache() = default;
  explicit ResponseCache(std::filesystem::path directory);

  std::optional<std::vector<double>> get(const std::string& key);
  void put(const std::string& key, const std::vector<double>& value);
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::vector<double>> memory_;
  std::optional<std::filesystem::path> directory_;
};

/// sha256(model_id \0 sha256(scoring_prompt \0 translation)).
std::string cache_key(std::string_view model_id, std::string_view prompt, std::string_view translation);

enum class PromptKind { low_translationese, high_translationese, vanilla };

std::string_view to_string(PromptKind k);
PromptKind parse_prompt_kind(std::string_view s);

struct GenerationPrompt {
  PromptKind kind = PromptKind::vanilla;
  std::string template_text;
};

/// The bundled prompt for `kind` (core/data/prompts/*.txt).
GenerationPrompt bundled_prompt(PromptKind kind);

struct ScoringRequest {
  std::string sample_id;
  std::string source;
  std::string translation;
};

class ModelClient {
 public:
  ModelClient(BackendConfig config, std::shared_ptr<Transport> transport,
              std::shared_ptr<ResponseCache> cache = std::make_shared<ResponseCache>());

  /// Token logprobs of `translation` given the rendered scoring prompt.
  /// Cached by content; a hit issues no request. Throws CapabilityError if
  /// the endpoint returns no per-token logprobs, TransportError once the
  /// retry budget is spent.
  backend::TokenScores fetch_logprobs(const std::string& sample_id, std::string_view source,
                                      std::string_view translation);

  /// Up to max_parallel requests in flight; results in input order.
  std::vector<backend::TokenScores> fetch_batch(std::span<const ScoringRequest> requests);

  /// Raw assistant text for the rendered prompt. Throws ValidationError on
  /// an empty completion.
  std::string generate_translation(const GenerationPrompt& prompt, std::string_view source);

  const BackendConfig& config() const { return config_; }

 private:
  HttpResponse post_with_retry(const std::string& path, const std::string& body);
  std::string scoring_prompt(std::string_view source) const;

  BackendConfig config_;
  std::shared_ptr<Transport> transport_;
  std::shared_ptr<ResponseCache> cache_;
};

}  // namespace ttk::backend
