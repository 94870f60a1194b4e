#pragma once

#include <filesystem>
#include <vector>

#include "signpose/pose/types.hpp"

namespace signpose {

inline constexpr int kPoseFileSchemaVersion = 1;

// Pose file: one record per video. Header {schema_version, source_id,
// image_width, image_height, fps?}; per frame, arrays `left_hand`,
// `right_hand` (21 x [x_px, y_px, confidence]) and `arms` (7 x [...]).
PoseSequence load_pose_file(const std::filesystem::path& path);
void save_pose_file(const std::filesystem::path& path, const PoseSequence& seq);

// Corpus manifest: {schema_version, samples: [{pose_file, label?, glosses?,
// translation?}]}. Relative pose_file paths resolve against the manifest
// directory.
struct ManifestEntry {
  std::filesystem::path pose_file;
  std::optional<int> label;
  std::optional<std::vector<std::string>> glosses;
  std::optional<std::vector<std::string>> translation;
};

struct CorpusManifest {
  std::vector<ManifestEntry> entries;
};

CorpusManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const CorpusManifest& manifest);

// Loads the pose file of one manifest entry into a SignSample.
SignSample load_sample(const ManifestEntry& entry);

}  // namespace signpose
