#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <vector>

#include "signpose/nn/graph.hpp"

namespace signpose {

inline constexpr int kModelJoints = 16;   // wrist + 3 per finger
inline constexpr int kFingers = 5;
inline constexpr int kPoseDim = 45;       // 15 joint axis-angles
inline constexpr int kThetaDim = 25;
inline constexpr int kBetaDim = 10;

// Parametric hand model: template mesh, skinning weights, joint regressor and
// blend bases driving linear blend skinning. Either built procedurally or
// loaded from a user-supplied asset archive.
struct HandModelSpec {
  bool from_asset = false;

  // kinematic tree; parents[0] == -1 (wrist)
  std::array<int, kModelJoints> parents{};
  // distal joint of each finger, in canonical finger order
  // (thumb, index, middle, ring, little)
  std::array<int, kFingers> distal_joint{};

  nn::Mat template_verts;   // V x 3
  std::vector<std::array<int, 3>> faces;
  nn::Mat skin_weights;     // V x 16, rows sum to 1
  nn::Mat joint_regressor;  // 16 x V
  nn::Mat shape_basis;      // 3V x 10 (vertex-major x,y,z rows)
  nn::Mat pose_blend_basis; // 3V x 135, or empty (no pose blend)
  nn::Mat pose_basis;       // 45 x 25: theta -> axis-angles
  nn::Mat pose_mean;        // 1 x 45 (zero when procedural)

  // fingertip rule: chain-end joints (procedural) or mesh vertices (asset)
  bool fingertips_from_vertices = false;
  std::array<int, kFingers> fingertip_vertices{};  // asset rule
  nn::Mat tip_regressor;                           // 5 x V: rest tip points (chain-end rule)

  int vertex_count() const { return static_cast<int>(template_verts.rows()); }
  int face_count() const { return static_cast<int>(faces.size()); }

  // Largest template vertex distance from the wrist; bounds projected extent.
  double max_template_radius() const;

  void validate() const;
};

// Low-poly procedural fallback model (deterministic). `vertex_count` >= 84.
std::shared_ptr<const HandModelSpec> make_procedural_hand(int vertex_count = 200);

// Loads a hand model asset from `dir`/model.json (layout documented in
// docs/file_formats.md). Enforces the asset invariants: 778 vertices, 1538
// faces, fingertip vertex set {333, 443, 555, 678, 734}.
std::shared_ptr<const HandModelSpec> load_hand_model_asset(const std::filesystem::path& dir);

// Parses "procedural" or "mano:<path>" into a loaded model.
std::shared_ptr<const HandModelSpec> resolve_hand_model(const std::string& selector, int procedural_vertices = 200);

}  // namespace signpose
