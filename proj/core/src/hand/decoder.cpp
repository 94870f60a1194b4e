#include "signpose/hand/decoder.hpp"

#include <fstream>
#include <stdexcept>

#include "signpose/common/json_io.hpp"

namespace signpose {

using nn::Graph;
using nn::Mat;
using nn::Var;

HandDecoder::HandDecoder(const std::string& name, int d_model, std::shared_ptr<const HandModelSpec> model,
                         const HandDecoderConfig& cfg_, RandomStream& rng)
    : cfg(cfg_), spec(std::move(model)), regressor(name + ".regress", d_model, 2 * kHandParamDim, rng) {}

Var HandDecoder::regress(Graph& g, Var tokens) { return regressor.forward(g, tokens); }

HandStateVars HandDecoder::hand_state(Graph& g, Var params, int frame, HandSide side) {
  int base = side == HandSide::Left ? 0 : kHandParamDim;
  Var row = g.slice_rows(params, frame, 1);
  HandStateVars s;
  s.theta = g.slice_cols(row, base, kThetaDim);
  s.beta = g.slice_cols(row, base + kThetaDim, kBetaDim);
  s.cam_rot = g.slice_cols(row, base + kThetaDim + kBetaDim, 3);
  Var trans_raw = g.slice_cols(row, base + kThetaDim + kBetaDim + 3, 2);
  Var scale_raw = g.slice_cols(row, base + kThetaDim + kBetaDim + 5, 1);
  if (cfg.clamp_camera) {
    s.cam_trans = g.scale(g.tanh_(trans_raw), cfg.trans_bound);
    s.cam_scale = g.scale(g.sigmoid(scale_raw), cfg.scale_max);
  } else {
    s.cam_trans = trans_raw;
    s.cam_scale = g.softplus(scale_raw);
  }
  return s;
}

DecodedHandVars HandDecoder::decode_hand(Graph& g, Var params, int frame, HandSide side) {
  DecodedHandVars out;
  out.state = hand_state(g, params, frame, side);
  out.joints3d = lbs_joints_graph(g, out.state.theta, out.state.beta, *spec, side == HandSide::Left);
  out.joints2d = project_weak_perspective_graph(g, out.joints3d, out.state.cam_rot, out.state.cam_trans,
                                                out.state.cam_scale);
  return out;
}

void HandDecoder::collect(std::vector<nn::Parameter*>& out) { regressor.collect(out); }

DecodedSequence decode_sequence(HandDecoder& decoder, const Mat& latent_tokens, bool want_meshes) {
  DecodedSequence out;
  const int T = static_cast<int>(latent_tokens.rows());
  out.reconstruction.frames.resize(static_cast<std::size_t>(T));
  out.reconstruction.image_width = 1.0;
  out.reconstruction.image_height = 1.0;
  if (want_meshes) out.meshes.resize(static_cast<std::size_t>(T));

  Graph g;
  Var params = decoder.regress(g, g.constant(latent_tokens));
  for (int t = 0; t < T; ++t) {
    for (HandSide side : {HandSide::Left, HandSide::Right}) {
      DecodedHandVars hand = decoder.decode_hand(g, params, t, side);
      const Mat& j2d = g.val(hand.joints2d);
      auto& joints = out.reconstruction.frames[static_cast<std::size_t>(t)].hand(side);
      for (int j = 0; j < kHandJoints; ++j) {
        joints[static_cast<std::size_t>(j)] = Joint2D{j2d(j, 0), j2d(j, 1), 1.0};
      }
      if (want_meshes) {
        Eigen::VectorXd theta = g.val(hand.state.theta).row(0).transpose();
        Eigen::VectorXd beta = g.val(hand.state.beta).row(0).transpose();
        LbsResult lbs = lbs_forward(theta, beta, *decoder.spec, side == HandSide::Left);
        MeshFrame mesh;
        Mat rot = rotation_from_axis_angle(g.val(hand.state.cam_rot).row(0).transpose());
        Eigen::Vector2d trans(g.val(hand.state.cam_trans)(0, 0), g.val(hand.state.cam_trans)(0, 1));
        double scale = g.val(hand.state.cam_scale)(0, 0);
        mesh.vertices = lbs.vertices;
        mesh.joints3d = lbs.joints3d;
        mesh.joints2d = project_weak_perspective(lbs.joints3d, rot, trans, scale);
        out.meshes[static_cast<std::size_t>(t)][side == HandSide::Left ? 0 : 1] = std::move(mesh);
      }
    }
  }
  return out;
}

void write_mesh_dump(const std::filesystem::path& path, const HandModelSpec& spec,
                     const std::vector<std::array<MeshFrame, 2>>& meshes) {
  json j;
  j["schema_version"] = 1;
  j["vertex_count"] = spec.vertex_count();
  json faces = json::array();
  for (const auto& f : spec.faces) faces.push_back({f[0], f[1], f[2]});
  j["faces"] = std::move(faces);
  json frames = json::array();
  for (const auto& pair : meshes) {
    json fr;
    const char* names[2] = {"left", "right"};
    for (int h = 0; h < 2; ++h) {
      const MeshFrame& m = pair[static_cast<std::size_t>(h)];
      json verts = json::array();
      for (Eigen::Index v = 0; v < m.vertices.rows(); ++v) {
        verts.push_back({m.vertices(v, 0), m.vertices(v, 1), m.vertices(v, 2)});
      }
      json joints = json::array();
      for (Eigen::Index v = 0; v < m.joints3d.rows(); ++v) {
        joints.push_back({m.joints3d(v, 0), m.joints3d(v, 1), m.joints3d(v, 2)});
      }
      fr[names[h]] = {{"vertices", std::move(verts)}, {"joints3d", std::move(joints)}};
    }
    frames.push_back(std::move(fr));
  }
  j["frames"] = std::move(frames);
  save_json_file(path, j, /*indent=*/-1);
}

}  // namespace signpose
