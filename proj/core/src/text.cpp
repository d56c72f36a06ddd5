#include "ttk/text.hpp"

#include <fstream>
#include <sstream>

#include "ttk/error.hpp"

namespace ttk::text {
namespace {

// Length of the UTF-8 sequence starting at s[i], or 1 for invalid input.
std::size_t sequence_length(std::string_view s, std::size_t i) {
  const auto lead = static_cast<unsigned char>(s[i]);
  std::size_t len = 1;
  if (lead >= 0xF0 && lead <= 0xF4) {
    len = 4;
  } else if (lead >= 0xE0) {
    len = lead <= 0xEF ? 3 : 1;
  } else if (lead >= 0xC2 && lead <= 0xDF) {
    len = 2;
  }
  if (i + len > s.size()) return 1;
  for (std::size_t k = 1; k < len; ++k) {
    if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return 1;
  }
  return len;
}

}  // namespace

std::vector<std::string> utf8_chars(std::string_view s) {
  std::vector<std::string> out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    const auto len = sequence_length(s, i);
    out.emplace_back(s.substr(i, len));
    i += len;
  }
  return out;
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.size(); i += sequence_length(s, i)) ++n;
  return n;
}

bool is_space(std::string_view cp) {
  if (cp.size() == 1) {
    const char c = cp[0];
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  }
  // U+00A0, U+3000, U+2000..U+200B
  if (cp == "\xC2\xA0" || cp == "\xE3\x80\x80") return true;
  if (cp.size() == 3 && static_cast<unsigned char>(cp[0]) == 0xE2 &&
      static_cast<unsigned char>(cp[1]) == 0x80) {
    const auto last = static_cast<unsigned char>(cp[2]);
    return last >= 0x80 && last <= 0x8B;
  }
  return false;
}

bool has_source_placeholder(std::string_view tmpl) {
  return tmpl.find(kSourcePlaceholder) != std::string_view::npos;
}

std::string render_template(std::string_view tmpl, std::string_view source) {
  if (!has_source_placeholder(tmpl))
    throw ValidationError("template has no " + std::string(kSourcePlaceholder) + " placeholder");
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const auto hit = tmpl.find(kSourcePlaceholder, pos);
    if (hit == std::string_view::npos) break;
    out.append(tmpl.substr(pos, hit - pos));
    out.append(source);
    pos = hit + kSourcePlaceholder.size();
  }
  out.append(tmpl.substr(pos));
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<std::string_view> split_lines(std::string_view bytes) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    auto nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) nl = bytes.size();
    auto line = bytes.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

}  // namespace ttk::text
