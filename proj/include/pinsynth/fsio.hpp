// Whole-file text I/O with uniform error reporting.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace pinsynth {

/// Entire file as bytes. Throws Error naming the path on failure.
std::string read_text_file(const std::filesystem::path& path);

/// Writes `content` verbatim (binary mode, so no newline translation),
/// creating parent directories as needed.
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace pinsynth
