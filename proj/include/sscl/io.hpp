#pragma once

#include <filesystem>
#include <string>

namespace sscl {

// Whole-file read; throws Error{Io} if the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

// Writes to "<path>.tmp" and renames over `path`, so readers never observe a
// half-written artifact.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

// Hex SHA-256 of a byte string / file.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace sscl
