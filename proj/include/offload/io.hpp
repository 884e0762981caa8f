#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace offload {

/// Writes content to a temp file next to `path`, then renames it into place,
/// so readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Reads a whole file; throws std::runtime_error if it cannot be opened.
std::string read_file(const std::filesystem::path& path);

}  // namespace offload
