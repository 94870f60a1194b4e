#pragma once

#include "signpose/hand/model_spec.hpp"
#include "signpose/pose/types.hpp"

namespace signpose {

// Canonical 21-joint output order (matches the skeleton layout): wrist, then
// per finger root/mid/distal/tip for thumb, index, middle, ring, little.
// Assembled from the 16 model joints plus 5 fingertips.

// Chain joints (root, mid, distal) of finger f, derived from the tree.
std::array<int, 3> finger_chain(const HandModelSpec& spec, int finger);

// ----- evaluation path (plain Eigen; mesh dumps, oracles) -----

struct LbsResult {
  nn::Mat vertices;  // V x 3
  nn::Mat joints3d;  // 21 x 3, canonical order
};

// Full blend-shape + linear-blend-skinning forward pass.
// theta: 25 pose coefficients, beta: 10 shape coefficients.
LbsResult lbs_forward(const Eigen::VectorXd& theta, const Eigen::VectorXd& beta, const HandModelSpec& spec,
                      bool mirrored = false);

// Weak-perspective projection: scale * drop_z(R * J) + trans.
nn::Mat project_weak_perspective(const nn::Mat& joints3d, const nn::Mat& rotation, const Eigen::Vector2d& trans,
                                 double scale);

// Axis-angle to rotation matrix (plain).
nn::Mat rotation_from_axis_angle(const Eigen::Vector3d& axis_angle);

// ----- autograd path (training) -----

// Joints-only LBS: 21 x 3 node. Skips full vertex skinning; with a
// vertex-rule model only the five fingertip vertices are skinned.
nn::Var lbs_joints_graph(nn::Graph& g, nn::Var theta, nn::Var beta, const HandModelSpec& spec, bool mirrored);

// rot_aa: (1 x 3) axis-angle, trans: (1 x 2), scale: (1 x 1) positive.
nn::Var project_weak_perspective_graph(nn::Graph& g, nn::Var joints3d, nn::Var rot_aa, nn::Var trans, nn::Var scale);

}  // namespace signpose
