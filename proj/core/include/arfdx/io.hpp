#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace arfdx {

std::string read_text_file(const std::filesystem::path& path);

// Writes to a sibling temporary then renames over the destination.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Drops leading lines that start with '#' (provenance headers).
std::string_view skip_comment_header(std::string_view text);

}  // namespace arfdx
