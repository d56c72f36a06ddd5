#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace ttk::text {

/// Splits UTF-8 into code-point substrings. Invalid bytes come back as
/// single-byte pieces rather than throwing.
std::vector<std::string> utf8_chars(std::string_view s);

/// Number of code points (invalid bytes count as one each).
std::size_t utf8_length(std::string_view s);

/// True for ASCII whitespace and the common Unicode spaces (U+00A0, U+3000,
/// U+2000..U+200B).
bool is_space(std::string_view code_point);

/// Placeholder substituted by render_template().
inline constexpr std::string_view kSourcePlaceholder = "{source}";

bool has_source_placeholder(std::string_view tmpl);

/// Replaces every "{source}" in `tmpl` with `source`. Throws ValidationError
/// when the placeholder is missing.
std::string render_template(std::string_view tmpl, std::string_view source);

/// Reads a whole file as bytes; throws IoError.
std::string read_file(const std::filesystem::path& path);

/// Writes bytes, replacing the file; throws IoError.
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// Splits on '\n' and strips one trailing '\r' per line. A trailing newline
/// does not produce an empty last line.
std::vector<std::string_view> split_lines(std::string_view bytes);
// Views into a temporary string would dangle.
template <typename S>
  requires std::is_same_v<S, std::string>
std::vector<std::string_view> split_lines(S&&) = delete;

}  // namespace ttk::text
