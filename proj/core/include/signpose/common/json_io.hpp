#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace signpose {

using json = nlohmann::json;

// Reads and parses a JSON file; parse failures are rethrown with the path in
// the message.
json load_json_file(const std::filesystem::path& path);

// Writes JSON to a file atomically (temp file in the same directory, then
// rename).
void save_json_file(const std::filesystem::path& path, const json& j, int indent = 2);

// Writes raw bytes atomically.
void save_bytes_atomic(const std::filesystem::path& path, const std::string& bytes);

// Reads a whole file into a string.
std::string load_bytes(const std::filesystem::path& path);

}  // namespace signpose
