#pragma once

#include <filesystem>
#include <string>

namespace ddpn {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it into place, so a failed
// run never leaves a truncated output behind.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace ddpn
