#pragma once

#include <filesystem>
#include <optional>

#include "signpose/hand/kinematics.hpp"
#include "signpose/nn/modules.hpp"

namespace signpose {

struct HandDecoderConfig {
  // camera activation: raw (softplus scale) or clamped (bounded tanh
  // translation, bounded sigmoid scale)
  bool clamp_camera = false;
  double trans_bound = 1.0;
  double scale_max = 1.0;
};

// Per-hand regressed state (graph nodes).
struct HandStateVars {
  nn::Var theta;       // (1 x 25)
  nn::Var beta;        // (1 x 10)
  nn::Var cam_rot;     // (1 x 3) axis-angle
  nn::Var cam_trans;   // (1 x 2), activated
  nn::Var cam_scale;   // (1 x 1), positive after activation
};

struct DecodedHandVars {
  HandStateVars state;
  nn::Var joints3d;  // (21 x 3)
  nn::Var joints2d;  // (21 x 2)
};

// Number of raw regressor outputs per hand: 25 + 10 + 3 + 2 + 1.
inline constexpr int kHandParamDim = kThetaDim + kBetaDim + 3 + 2 + 1;

// Model-aware decoder: one fully-connected map from latent tokens to both
// hands' compact parameters, followed by the differentiable hand model and
// weak-perspective reprojection.
struct HandDecoder {
  HandDecoderConfig cfg;
  std::shared_ptr<const HandModelSpec> spec;
  nn::Linear regressor;  // d_model -> 2 * kHandParamDim

  HandDecoder() = default;
  HandDecoder(const std::string& name, int d_model, std::shared_ptr<const HandModelSpec> model,
              const HandDecoderConfig& cfg, RandomStream& rng);

  // Raw parameter rows for all frames: (T x 82).
  nn::Var regress(nn::Graph& g, nn::Var tokens);

  // Slices + activates one hand's parameters out of one frame row of the
  // regressed matrix. Left hand occupies the first kHandParamDim columns.
  HandStateVars hand_state(nn::Graph& g, nn::Var params, int frame, HandSide side);

  // Full per-token decode: regress -> LBS -> project.
  DecodedHandVars decode_hand(nn::Graph& g, nn::Var params, int frame, HandSide side);

  void collect(std::vector<nn::Parameter*>& out);
};

// Mesh dump record for qualitative inspection.
struct MeshFrame {
  nn::Mat vertices;  // V x 3
  nn::Mat joints3d;  // 21 x 3
  nn::Mat joints2d;  // 21 x 2
};

struct DecodedSequence {
  PoseSequence reconstruction;              // normalized coordinates, confidence 1
  std::vector<std::array<MeshFrame, 2>> meshes;  // per frame, [left, right]; filled if want_meshes
};

// Evaluation decode of a whole latent sequence (no gradients). Arm joints in
// the reconstruction are zeroed: the decoder reconstructs hands only.
DecodedSequence decode_sequence(HandDecoder& decoder, const nn::Mat& latent_tokens, bool want_meshes);

// Writes meshes as a structured text dump: faces once, per-frame vertices.
void write_mesh_dump(const std::filesystem::path& path, const HandModelSpec& spec,
                     const std::vector<std::array<MeshFrame, 2>>& meshes);

}  // namespace signpose
