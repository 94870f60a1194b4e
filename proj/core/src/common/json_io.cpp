#include "signpose/common/json_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace signpose {

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("JSON parse error in " + path.string() + ": " + e.what());
  }
}

void save_json_file(const std::filesystem::path& path, const json& j, int indent) {
  save_bytes_atomic(path, j.dump(indent) + "\n");
}

void save_bytes_atomic(const std::filesystem::path& path, const std::string& bytes) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open file for writing: " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string load_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace signpose
