#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <vector>

namespace ttk::cli {

using ordered_json = nlohmann::ordered_json;

inline constexpr std::string_view kToolVersion = "0.1.0";

enum class ReportKind { binary_eval, pairwise_eval, pointwise_eval, corpus_stats, shift_report, qe_correlation };

std::string_view to_string(ReportKind k);
ReportKind parse_report_kind(std::string_view s);

struct EvalReport {
  ReportKind kind = ReportKind::binary_eval;
  ordered_json payload = ordered_json::object();
  std::string config_hash;
  std::string tool_version{kToolVersion};
};

/// Pretty-printed JSON with a fixed key order and a trailing newline.
std::string serialize_report(const EvalReport& report);
EvalReport parse_report(std::string_view text);
EvalReport read_report(const std::filesystem::path& path);

/// JSON has no inf/nan; those become the strings "inf", "-inf", "nan".
ordered_json number(double v);
/// Inverse of number(); throws ValidationError for anything else.
double to_double(const ordered_json& j);

/// Accumulates every flag and input file of a run into one SHA-256.
class ConfigHash {
 public:
  explicit ConfigHash(std::string_view command);

  ConfigHash& flag(std::string_view name, std::string_view value);
  ConfigHash& flag(std::string_view name, const char* value) { return flag(name, std::string_view(value)); }
  ConfigHash& flag(std::string_view name, const std::string& value) { return flag(name, std::string_view(value)); }
  ConfigHash& flag(std::string_view name, double value);
  ConfigHash& flag(std::string_view name, std::int64_t value);
  ConfigHash& flag(std::string_view name, bool value);
  /// Records the path and the SHA-256 of its contents.
  ConfigHash& file(std::string_view name, const std::filesystem::path& path);

  std::string hex() const;

 private:
  std::string canonical_;
};

}  // namespace ttk::cli
