#include "signpose/train/checkpoint.hpp"

#include <cstring>
#include <map>
#include <sstream>
#include <stdexcept>

#include "signpose/common/json_io.hpp"

namespace signpose {

namespace {

constexpr char kMagic[8] = {'S', 'P', 'P', 'A', 'R', 'M', '0', '1'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t& pos) {
  if (pos + 8 > in.size()) throw std::runtime_error("parameter file truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + static_cast<std::size_t>(i)])) << (8 * i);
  pos += 8;
  return v;
}

}  // namespace

void save_parameters(const std::filesystem::path& path, const std::vector<nn::Parameter*>& params) {
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put_u64(out, params.size());
  for (const nn::Parameter* p : params) {
    put_u64(out, p->name.size());
    out.append(p->name);
    put_u64(out, static_cast<std::uint64_t>(p->value.rows()));
    put_u64(out, static_cast<std::uint64_t>(p->value.cols()));
    for (Eigen::Index r = 0; r < p->value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p->value.cols(); ++c) {
        double d = p->value(r, c);
        std::uint64_t bits;
        std::memcpy(&bits, &d, sizeof(bits));
        put_u64(out, bits);
      }
    }
  }
  save_bytes_atomic(path, out);
}

void load_parameters(const std::filesystem::path& path, const std::vector<nn::Parameter*>& params,
                     bool allow_missing) {
  std::string in = load_bytes(path);
  if (in.size() < sizeof(kMagic) || std::memcmp(in.data(), kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a parameter file: " + path.string());
  }
  std::size_t pos = sizeof(kMagic);
  std::uint64_t count = get_u64(in, pos);

  std::map<std::string, nn::Parameter*> by_name;
  for (nn::Parameter* p : params) {
    if (!by_name.emplace(p->name, p).second) {
      throw std::runtime_error("duplicate parameter name: " + p->name);
    }
  }
  std::size_t loaded = 0;
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint64_t name_len = get_u64(in, pos);
    if (pos + name_len > in.size()) throw std::runtime_error("parameter file truncated");
    std::string name = in.substr(pos, name_len);
    pos += name_len;
    std::uint64_t rows = get_u64(in, pos), cols = get_u64(in, pos);
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw std::runtime_error("parameter file holds unknown tensor '" + name + "' (model/config mismatch)");
    }
    nn::Parameter& p = *it->second;
    if (static_cast<std::uint64_t>(p.value.rows()) != rows || static_cast<std::uint64_t>(p.value.cols()) != cols) {
      std::ostringstream ss;
      ss << "parameter '" << name << "' shape mismatch: file " << rows << "x" << cols << ", model "
         << p.value.rows() << "x" << p.value.cols();
      throw std::runtime_error(ss.str());
    }
    for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.value.cols(); ++c) {
        std::uint64_t bits = get_u64(in, pos);
        double d;
        std::memcpy(&d, &bits, sizeof(d));
        p.value(r, c) = d;
      }
    }
    ++loaded;
  }
  if (!allow_missing && loaded != params.size()) {
    throw std::runtime_error("parameter file " + path.string() + " holds " + std::to_string(loaded) + " of " +
                             std::to_string(params.size()) + " model tensors");
  }
}

std::vector<std::string> parameter_names_in_file(const std::filesystem::path& path) {
  std::string in = load_bytes(path);
  if (in.size() < sizeof(kMagic) || std::memcmp(in.data(), kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a parameter file: " + path.string());
  }
  std::size_t pos = sizeof(kMagic);
  std::uint64_t count = get_u64(in, pos);
  std::vector<std::string> names;
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint64_t name_len = get_u64(in, pos);
    names.push_back(in.substr(pos, name_len));
    pos += name_len;
    std::uint64_t rows = get_u64(in, pos), cols = get_u64(in, pos);
    pos += 8 * rows * cols;
  }
  return names;
}

void save_checkpoint_info(const std::filesystem::path& dir, const CheckpointInfo& info) {
  json j;
  j["schema_version"] = 1;
  j["kind"] = info.kind;
  j["step"] = info.step;
  j["config"] = info.config;
  save_json_file(dir / "config.json", j);
}

CheckpointInfo load_checkpoint_info(const std::filesystem::path& dir) {
  json j = load_json_file(dir / "config.json");
  int version = j.at("schema_version").get<int>();
  if (version != 1) {
    throw std::runtime_error("checkpoint " + dir.string() + ": unsupported schema_version " + std::to_string(version));
  }
  CheckpointInfo info;
  info.kind = j.at("kind").get<std::string>();
  info.step = j.at("step").get<long long>();
  info.config = j.at("config");
  return info;
}

}  // namespace signpose
