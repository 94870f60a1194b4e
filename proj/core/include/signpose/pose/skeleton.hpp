#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace signpose {

// Canonical skeleton layout: joint names, bone connectivity, symmetrical
// fingertip links and the finger/palm cluster assignment used by graph
// pooling. The same structure is shipped as a versioned JSON data asset
// (data/skeleton_layout.json); the embedded default is identical.
//
// Hand joints (21): 0 = wrist, then four joints per finger ordered
// root-to-tip: thumb 1-4, index 5-8, middle 9-12, ring 13-16, little 17-20.
// Arm joints (7): 0 neck, 1/2 left/right shoulder, 3/4 left/right elbow,
// 5/6 left/right wrist.
struct SkeletonLayout {
  int schema_version = 1;
  std::vector<std::string> hand_joint_names;              // 21
  std::vector<std::pair<int, int>> hand_bones;            // physical connection
  std::vector<std::pair<int, int>> symmetric_edges;       // fingertip-to-fingertip links
  std::vector<std::vector<int>> clusters;                 // 6 subsets: 5 fingers + palm
  std::vector<std::string> arm_joint_names;               // 7
  std::vector<std::pair<int, int>> arm_bones;
  int hand_root = 0;  // wrist
  int arm_root = 0;   // neck

  // Wrist-, neck-rooted hop distance per node; used to orient edges.
  std::vector<int> hand_hops() const;
  std::vector<int> arm_hops() const;

  void validate() const;
};

// Embedded default layout (see header comment).
const SkeletonLayout& default_skeleton();

SkeletonLayout load_skeleton_layout(const std::filesystem::path& path);
void save_skeleton_layout(const std::filesystem::path& path, const SkeletonLayout& layout);

}  // namespace signpose
