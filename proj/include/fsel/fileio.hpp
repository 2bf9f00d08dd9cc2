#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace fsel {

// Reads a whole file as bytes; throws std::runtime_error on failure.
std::string read_file(const std::filesystem::path& path);

// Writes bytes to a sibling temp file and renames it over `path`, so a failed
// write never leaves a partial output behind.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view bytes);

}  // namespace fsel
