#include "ttk/cli/report.hpp"

#include <cmath>
#include <cstdio>

#include "ttk/error.hpp"
#include "ttk/hash.hpp"
#include "ttk/text.hpp"

namespace ttk::cli {

namespace {
constexpr std::string_view kKinds[] = {"binary_eval",  "pairwise_eval", "pointwise_eval",
                                       "corpus_stats", "shift_report",  "qe_correlation"};
}

std::string_view to_string(ReportKind k) { return kKinds[static_cast<int>(k)]; }

ReportKind parse_report_kind(std::string_view s) {
  for (std::size_t i = 0; i < std::size(kKinds); ++i) {
    if (kKinds[i] == s) return static_cast<ReportKind>(i);
  }
  throw ValidationError("unknown report kind \"" + std::string(s) + "\"");
}

std::string serialize_report(const EvalReport& report) {
  ordered_json j;
  j["kind"] = to_string(report.kind);
  j["tool_version"] = report.tool_version;
  j["config_hash"] = report.config_hash;
  j["payload"] = report.payload;
  return j.dump(2) + "\n";
}

EvalReport parse_report(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("report is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind") || !j.contains("payload") || !j["kind"].is_string()) {
    throw ValidationError("report needs \"kind\" and \"payload\"");
  }
  EvalReport r;
  r.kind = parse_report_kind(j["kind"].get<std::string>());
  r.payload = j["payload"];
  if (j.contains("config_hash")) r.config_hash = j["config_hash"].get<std::string>();
  if (j.contains("tool_version")) r.tool_version = j["tool_version"].get<std::string>();
  return r;
}

EvalReport read_report(const std::filesystem::path& path) {
  const auto bytes = text::read_file(path);
  try {
    return parse_report(bytes);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

ordered_json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double to_double(const ordered_json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
  }
  throw ValidationError("expected a number, got " + j.dump());
}

ConfigHash::ConfigHash(std::string_view command) {
  canonical_ = "ttk ";
  canonical_ += kToolVersion;
  canonical_ += '\n';
  canonical_ += command;
  canonical_ += '\n';
}

ConfigHash& ConfigHash::flag(std::string_view name, std::string_view value) {
  canonical_ += "--";
  canonical_ += name;
  canonical_ += '=';
  canonical_ += value;
  canonical_ += '\n';
  return *this;
}

ConfigHash& ConfigHash::flag(std::string_view name, double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return flag(name, std::string_view(buf));
}

ConfigHash& ConfigHash::flag(std::string_view name, std::int64_t value) {
  return flag(name, std::string_view(std::to_string(value)));
}

ConfigHash& ConfigHash::flag(std::string_view name, bool value) {
  return flag(name, std::string_view(value ? "bool:true" : "bool:false"));
}

ConfigHash& ConfigHash::file(std::string_view name, const std::filesystem::path& path) {
  flag(name, std::string_view(path.string()));
  canonical_ += "  sha256=" + sha256_file(path) + "\n";
  return *this;
}

std::string ConfigHash::hex() const { return sha256_hex(canonical_); }

}  // namespace ttk::cli
