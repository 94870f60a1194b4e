#include "signpose/pose/pose_io.hpp"

#include <stdexcept>

#include "signpose/common/json_io.hpp"

namespace signpose {

namespace {

template <std::size_t N>
void parse_joint_array(const json& arr, std::array<Joint2D, N>& out, std::size_t frame_idx, const char* field) {
  if (!arr.is_array() || arr.size() != N) {
    throw std::runtime_error("pose file schema error: frame " + std::to_string(frame_idx) + " field '" + field +
                             "' must hold exactly " + std::to_string(N) + " joints, got " +
                             std::to_string(arr.is_array() ? arr.size() : 0));
  }
  for (std::size_t j = 0; j < N; ++j) {
    const json& e = arr[j];
    if (!e.is_array() || e.size() != 3) {
      throw std::runtime_error("pose file parse error: frame " + std::to_string(frame_idx) + " field '" + field +
                               "' joint " + std::to_string(j) + " must be [x, y, confidence]");
    }
    Joint2D joint{e[0].get<double>(), e[1].get<double>(), e[2].get<double>()};
    validate_joint(joint, "frame " + std::to_string(frame_idx) + " " + field + "[" + std::to_string(j) + "]");
    out[j] = joint;
  }
}

template <std::size_t N>
json joints_to_json(const std::array<Joint2D, N>& joints) {
  json arr = json::array();
  for (const Joint2D& j : joints) arr.push_back({j.x, j.y, j.confidence});
  return arr;
}

}  // namespace

PoseSequence load_pose_file(const std::filesystem::path& path) {
  json j = load_json_file(path);
  PoseSequence seq;
  try {
    int version = j.at("schema_version").get<int>();
    if (version != kPoseFileSchemaVersion) {
      throw std::runtime_error("unsupported schema_version " + std::to_string(version) + " (expected " +
                               std::to_string(kPoseFileSchemaVersion) + ")");
    }
    seq.source_id = j.at("source_id").get<std::string>();
    seq.image_width = j.at("image_width").get<double>();
    seq.image_height = j.at("image_height").get<double>();
    if (j.contains("fps") && !j["fps"].is_null()) seq.fps = j["fps"].get<double>();
    const json& frames = j.at("frames");
    if (!frames.is_array() || frames.empty()) throw std::runtime_error("'frames' must be a non-empty array");
    seq.frames.resize(frames.size());
    for (std::size_t t = 0; t < frames.size(); ++t) {
      const json& f = frames[t];
      parse_joint_array(f.at("left_hand"), seq.frames[t].left_hand, t, "left_hand");
      parse_joint_array(f.at("right_hand"), seq.frames[t].right_hand, t, "right_hand");
      parse_joint_array(f.at("arms"), seq.frames[t].arms, t, "arms");
    }
  } catch (const json::exception& e) {
    throw std::runtime_error("pose file parse error in " + path.string() + ": " + e.what());
  }
  validate_sequence(seq);
  return seq;
}

void save_pose_file(const std::filesystem::path& path, const PoseSequence& seq) {
  validate_sequence(seq);
  json j;
  j["schema_version"] = kPoseFileSchemaVersion;
  j["source_id"] = seq.source_id;
  j["image_width"] = seq.image_width;
  j["image_height"] = seq.image_height;
  if (seq.fps.has_value()) j["fps"] = *seq.fps;
  json frames = json::array();
  for (const PoseFrame& f : seq.frames) {
    json fr;
    fr["left_hand"] = joints_to_json(f.left_hand);
    fr["right_hand"] = joints_to_json(f.right_hand);
    fr["arms"] = joints_to_json(f.arms);
    frames.push_back(std::move(fr));
  }
  j["frames"] = std::move(frames);
  save_json_file(path, j, /*indent=*/-1);
}

CorpusManifest load_manifest(const std::filesystem::path& path) {
  json j = load_json_file(path);
  CorpusManifest m;
  try {
    int version = j.at("schema_version").get<int>();
    if (version != 1) throw std::runtime_error("unsupported manifest schema_version " + std::to_string(version));
    for (const json& e : j.at("samples")) {
      ManifestEntry entry;
      std::filesystem::path p = e.at("pose_file").get<std::string>();
      entry.pose_file = p.is_relative() ? path.parent_path() / p : p;
      if (e.contains("label") && !e["label"].is_null()) entry.label = e["label"].get<int>();
      if (e.contains("glosses") && !e["glosses"].is_null()) {
        entry.glosses = e["glosses"].get<std::vector<std::string>>();
      }
      if (e.contains("translation") && !e["translation"].is_null()) {
        entry.translation = e["translation"].get<std::vector<std::string>>();
      }
      m.entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw std::runtime_error("manifest parse error in " + path.string() + ": " + e.what());
  }
  return m;
}

void save_manifest(const std::filesystem::path& path, const CorpusManifest& manifest) {
  json samples = json::array();
  for (const ManifestEntry& e : manifest.entries) {
    json s;
    // store relative to the manifest directory when possible
    std::filesystem::path rel = e.pose_file.lexically_proximate(path.parent_path());
    s["pose_file"] = rel.generic_string();
    if (e.label.has_value()) s["label"] = *e.label;
    if (e.glosses.has_value()) s["glosses"] = *e.glosses;
    if (e.translation.has_value()) s["translation"] = *e.translation;
    samples.push_back(std::move(s));
  }
  json j;
  j["schema_version"] = 1;
  j["samples"] = std::move(samples);
  save_json_file(path, j);
}

SignSample load_sample(const ManifestEntry& entry) {
  SignSample s;
  s.poses = load_pose_file(entry.pose_file);
  s.label = entry.label;
  s.glosses = entry.glosses;
  s.translation = entry.translation;
  return s;
}

}  // namespace signpose
