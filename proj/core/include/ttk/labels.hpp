#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Binary ground truth for classification runs.
namespace ttk::labels {

struct LabelRecord {
  std::string sample_id;
  /// 1 = high translationese (positive), 0 = low.
  int label = 0;
  /// "genre:author"; "all" when the file does not say.
  std::string domain = "all";
  /// train | valid | test; "test" when absent.
  std::string split = "test";

  bool operator==(const LabelRecord&) const = default;
};

/// JSONL {"sample_id", "label", "domain"?, "split"?}. Sample ids must be
/// unique; labels 0 or 1.
std::vector<LabelRecord> parse_labels(std::string_view jsonl);
std::vector<LabelRecord> read_labels(const std::filesystem::path& path);
std::string serialize_labels(std::span<const LabelRecord> labels);

}  // namespace ttk::labels
