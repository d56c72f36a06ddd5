#include "ttk/labels.hpp"

#include <nlohmann/json.hpp>
#include <set>

#include "ttk/error.hpp"
#include "ttk/text.hpp"

namespace ttk::labels {

using json = nlohmann::json;

std::vector<LabelRecord> parse_labels(std::string_view jsonl) {
  std::vector<LabelRecord> out;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  for (auto line : text::split_lines(jsonl)) {
    ++line_no;
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    const auto where = "line " + std::to_string(line_no) + ": ";
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw ValidationError(where + "malformed JSON: " + e.what());
    }
    if (!obj.is_object()) throw ValidationError(where + "expected a JSON object");
    LabelRecord r;
    const auto id = obj.find("sample_id");
    if (id == obj.end() || !id->is_string() || id->get<std::string>().empty()) {
      throw ValidationError(where + "\"sample_id\" must be a non-empty string");
    }
    r.sample_id = id->get<std::string>();
    const auto lab = obj.find("label");
    if (lab == obj.end() || !lab->is_number_integer() || (lab->get<long long>() != 0 && lab->get<long long>() != 1)) {
      throw ValidationError(where + "\"label\" must be 0 or 1");
    }
    r.label = lab->get<int>();
    if (auto d = obj.find("domain"); d != obj.end()) {
      if (!d->is_string()) throw ValidationError(where + "\"domain\" must be a string");
      r.domain = d->get<std::string>();
    }
    if (auto s = obj.find("split"); s != obj.end()) {
      if (!s->is_string()) throw ValidationError(where + "\"split\" must be a string");
      r.split = s->get<std::string>();
      if (r.split != "train" && r.split != "valid" && r.split != "test") {
        throw ValidationError(where + "\"split\" must be train, valid or test");
      }
    }
    if (!seen.insert(r.sample_id).second) throw ValidationError(where + "duplicate sample_id \"" + r.sample_id + "\"");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<LabelRecord> read_labels(const std::filesystem::path& path) {
  const auto bytes = text::read_file(path);
  try {
    return parse_labels(bytes);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string serialize_labels(std::span<const LabelRecord> labels) {
  std::string out;
  for (const auto& r : labels) {
    nlohmann::ordered_json o;
    o["sample_id"] = r.sample_id;
    o["label"] = r.label;
    o["domain"] = r.domain;
    o["split"] = r.split;
    out += o.dump();
    out += '\n';
  }
  return out;
}

}  // namespace ttk::labels
