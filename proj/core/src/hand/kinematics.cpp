#include "signpose/hand/kinematics.hpp"

#include <cmath>
#include <stdexcept>

namespace signpose {

using nn::Graph;
using nn::Mat;
using nn::Var;

std::array<int, 3> finger_chain(const HandModelSpec& spec, int finger) {
  int distal = spec.distal_joint[static_cast<std::size_t>(finger)];
  int mid = spec.parents[static_cast<std::size_t>(distal)];
  int root = spec.parents[static_cast<std::size_t>(mid)];
  if (root <= 0 || spec.parents[static_cast<std::size_t>(root)] != 0) {
    throw std::runtime_error("hand model: finger " + std::to_string(finger) + " is not a 3-joint chain off the wrist");
  }
  return {root, mid, distal};
}

Mat rotation_from_axis_angle(const Eigen::Vector3d& v) {
  double th2 = v.squaredNorm();
  Eigen::Matrix3d K;
  K << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  Eigen::Matrix3d R;
  if (th2 < 1e-24) {
    R = Eigen::Matrix3d::Identity() + K + 0.5 * K * K;
  } else {
    double th = std::sqrt(th2);
    R = Eigen::Matrix3d::Identity() + (std::sin(th) / th) * K + ((1.0 - std::cos(th)) / th2) * K * K;
  }
  return R;
}

namespace {

struct FkEval {
  std::vector<Eigen::Matrix3d> rot_world;   // per model joint
  std::vector<Eigen::RowVector3d> t_world;
  Mat shaped;        // V x 3 (with shape blend, without pose blend)
  Mat rest_joints;   // 16 x 3
};

FkEval fk_eval(const Eigen::VectorXd& theta, const Eigen::VectorXd& beta, const HandModelSpec& spec) {
  if (theta.size() != kThetaDim) throw std::invalid_argument("lbs_forward: theta must have 25 components");
  if (beta.size() != kBetaDim) throw std::invalid_argument("lbs_forward: beta must have 10 components");
  FkEval out;
  Eigen::VectorXd pose = spec.pose_basis * theta + spec.pose_mean.transpose();  // 45

  const int v_count = spec.vertex_count();
  Eigen::VectorXd disp = spec.shape_basis * beta;  // 3V
  out.shaped = spec.template_verts;
  for (int v = 0; v < v_count; ++v) {
    out.shaped(v, 0) += disp(3 * v + 0);
    out.shaped(v, 1) += disp(3 * v + 1);
    out.shaped(v, 2) += disp(3 * v + 2);
  }
  out.rest_joints = spec.joint_regressor * out.shaped;

  out.rot_world.resize(kModelJoints);
  out.t_world.resize(kModelJoints);
  out.rot_world[0] = Eigen::Matrix3d::Identity();
  out.t_world[0] = out.rest_joints.row(0);
  for (int j = 1; j < kModelJoints; ++j) {
    int parent = spec.parents[static_cast<std::size_t>(j)];
    Eigen::Vector3d aa = pose.segment<3>(3 * (j - 1));
    Eigen::Matrix3d local = rotation_from_axis_angle(aa);
    out.rot_world[static_cast<std::size_t>(j)] = out.rot_world[static_cast<std::size_t>(parent)] * local;
    Eigen::RowVector3d offset = out.rest_joints.row(j) - out.rest_joints.row(parent);
    out.t_world[static_cast<std::size_t>(j)] =
        offset * out.rot_world[static_cast<std::size_t>(parent)].transpose() + out.t_world[static_cast<std::size_t>(parent)];
  }
  return out;
}

}  // namespace

LbsResult lbs_forward(const Eigen::VectorXd& theta, const Eigen::VectorXd& beta, const HandModelSpec& spec,
                      bool mirrored) {
  FkEval fk = fk_eval(theta, beta, spec);
  const int v_count = spec.vertex_count();

  // pose-corrective blend on vertices (rotation deviation from identity)
  Mat shaped = fk.shaped;
  if (spec.pose_blend_basis.size() != 0) {
    Eigen::VectorXd pose_feat(9 * (kModelJoints - 1));
    for (int j = 1; j < kModelJoints; ++j) {
      // local rotation of joint j
      Eigen::Matrix3d local =
          fk.rot_world[static_cast<std::size_t>(spec.parents[static_cast<std::size_t>(j)])].transpose() *
          fk.rot_world[static_cast<std::size_t>(j)];
      Eigen::Matrix3d dev = local - Eigen::Matrix3d::Identity();
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) pose_feat(9 * (j - 1) + 3 * r + c) = dev(r, c);
    }
    Eigen::VectorXd disp = spec.pose_blend_basis * pose_feat;
    for (int v = 0; v < v_count; ++v) {
      shaped(v, 0) += disp(3 * v + 0);
      shaped(v, 1) += disp(3 * v + 1);
      shaped(v, 2) += disp(3 * v + 2);
    }
  }

  LbsResult out;
  out.vertices.resize(v_count, 3);
  for (int v = 0; v < v_count; ++v) {
    Eigen::RowVector3d acc = Eigen::RowVector3d::Zero();
    for (int j = 0; j < kModelJoints; ++j) {
      double w = spec.skin_weights(v, j);
      if (w == 0.0) continue;
      Eigen::RowVector3d local = shaped.row(v) - fk.rest_joints.row(j);
      acc += w * (local * fk.rot_world[static_cast<std::size_t>(j)].transpose() + fk.t_world[static_cast<std::size_t>(j)]);
    }
    out.vertices.row(v) = acc;
  }

  // 21 joints in canonical order
  out.joints3d.resize(kHandJoints, 3);
  out.joints3d.row(0) = fk.t_world[0];
  Mat tip_rest;
  if (!spec.fingertips_from_vertices) tip_rest = spec.tip_regressor * fk.shaped;
  for (int f = 0; f < kFingers; ++f) {
    std::array<int, 3> chain = finger_chain(spec, f);
    for (int k = 0; k < 3; ++k) {
      out.joints3d.row(1 + 4 * f + k) = fk.t_world[static_cast<std::size_t>(chain[static_cast<std::size_t>(k)])];
    }
    if (spec.fingertips_from_vertices) {
      out.joints3d.row(1 + 4 * f + 3) = out.vertices.row(spec.fingertip_vertices[static_cast<std::size_t>(f)]);
    } else {
      int d = chain[2];
      Eigen::RowVector3d local = tip_rest.row(f) - fk.rest_joints.row(d);
      out.joints3d.row(1 + 4 * f + 3) =
          local * fk.rot_world[static_cast<std::size_t>(d)].transpose() + fk.t_world[static_cast<std::size_t>(d)];
    }
  }

  if (mirrored) {
    out.vertices.col(0) *= -1.0;
    out.joints3d.col(0) *= -1.0;
  }
  return out;
}

Mat project_weak_perspective(const Mat& joints3d, const Mat& rotation, const Eigen::Vector2d& trans, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("project_weak_perspective: scale must be positive");
  Mat rotated = joints3d * rotation.transpose();
  Mat out(joints3d.rows(), 2);
  out.col(0) = scale * rotated.col(0) + Mat::Constant(joints3d.rows(), 1, trans.x());
  out.col(1) = scale * rotated.col(1) + Mat::Constant(joints3d.rows(), 1, trans.y());
  return out;
}

Var lbs_joints_graph(Graph& g, Var theta, Var beta, const HandModelSpec& spec, bool mirrored) {
  if (g.val(theta).rows() != 1 || g.val(theta).cols() != kThetaDim) {
    throw std::invalid_argument("lbs_joints_graph: theta must be (1 x 25)");
  }
  if (g.val(beta).rows() != 1 || g.val(beta).cols() != kBetaDim) {
    throw std::invalid_argument("lbs_joints_graph: beta must be (1 x 10)");
  }
  const int v_count = spec.vertex_count();

  // axis-angles (15 x 3)
  Var pose = g.add(g.matmul(theta, g.constant(spec.pose_basis.transpose())), g.constant(spec.pose_mean));
  Var axis = g.reshape(pose, kModelJoints - 1, 3);
  Var rot = g.rodrigues(axis);  // (15 x 9)

  // shaped template and rest joints
  Var disp = g.reshape(g.matmul(beta, g.constant(spec.shape_basis.transpose())), v_count, 3);
  Var shaped = g.add(g.constant(spec.template_verts), disp);
  Var rest = g.matmul(g.constant(spec.joint_regressor), shaped);  // (16 x 3)

  // forward kinematics
  std::vector<Var> rot_world(kModelJoints), t_world(kModelJoints);
  rot_world[0] = g.constant(Mat::Identity(3, 3));
  t_world[0] = g.slice_rows(rest, 0, 1);
  for (int j = 1; j < kModelJoints; ++j) {
    int parent = spec.parents[static_cast<std::size_t>(j)];
    Var local = g.reshape(g.slice_rows(rot, j - 1, 1), 3, 3);
    rot_world[static_cast<std::size_t>(j)] = g.matmul(rot_world[static_cast<std::size_t>(parent)], local);
    Var offset = g.sub(g.slice_rows(rest, j, 1), g.slice_rows(rest, parent, 1));
    t_world[static_cast<std::size_t>(j)] =
        g.add(g.matmul(offset, g.transpose(rot_world[static_cast<std::size_t>(parent)])),
              t_world[static_cast<std::size_t>(parent)]);
  }

  // fingertips
  std::vector<Var> tips(kFingers);
  if (spec.fingertips_from_vertices) {
    // pose-corrective offsets for the five tip vertex rows
    Var pose_offsets{};
    if (spec.pose_blend_basis.size() != 0) {
      Mat sel(3 * kFingers, 9 * (kModelJoints - 1));
      for (int f = 0; f < kFingers; ++f) {
        int v = spec.fingertip_vertices[static_cast<std::size_t>(f)];
        sel.middleRows(3 * f, 3) = spec.pose_blend_basis.middleRows(3 * v, 3);
      }
      // local rotation deviation from identity; world rotations are chained
      // from locals, so recover locals from the rodrigues output directly
      Mat ident_rows(kModelJoints - 1, 9);
      for (int j = 0; j < kModelJoints - 1; ++j) {
        ident_rows.row(j) << 1, 0, 0, 0, 1, 0, 0, 0, 1;
      }
      Var dev = g.reshape(g.sub(rot, g.constant(ident_rows)), 1, 9 * (kModelJoints - 1));
      pose_offsets = g.reshape(g.matmul(dev, g.constant(sel.transpose())), kFingers, 3);
    }
    for (int f = 0; f < kFingers; ++f) {
      int v = spec.fingertip_vertices[static_cast<std::size_t>(f)];
      Var sv = g.slice_rows(shaped, v, 1);
      if (pose_offsets.valid()) sv = g.add(sv, g.slice_rows(pose_offsets, f, 1));
      Var acc{};
      for (int j = 0; j < kModelJoints; ++j) {
        double w = spec.skin_weights(v, j);
        if (w == 0.0) continue;
        Var local = g.sub(sv, g.slice_rows(rest, j, 1));
        Var part = g.scale(
            g.add(g.matmul(local, g.transpose(rot_world[static_cast<std::size_t>(j)])), t_world[static_cast<std::size_t>(j)]),
            w);
        acc = acc.valid() ? g.add(acc, part) : part;
      }
      tips[static_cast<std::size_t>(f)] = acc;
    }
  } else {
    Var tip_rest = g.matmul(g.constant(spec.tip_regressor), shaped);  // (5 x 3)
    for (int f = 0; f < kFingers; ++f) {
      int d = spec.distal_joint[static_cast<std::size_t>(f)];
      Var local = g.sub(g.slice_rows(tip_rest, f, 1), g.slice_rows(rest, d, 1));
      tips[static_cast<std::size_t>(f)] =
          g.add(g.matmul(local, g.transpose(rot_world[static_cast<std::size_t>(d)])), t_world[static_cast<std::size_t>(d)]);
    }
  }

  // canonical 21-joint assembly
  std::vector<Var> rows;
  rows.reserve(kHandJoints);
  rows.push_back(t_world[0]);
  for (int f = 0; f < kFingers; ++f) {
    std::array<int, 3> chain = finger_chain(spec, f);
    for (int k = 0; k < 3; ++k) rows.push_back(t_world[static_cast<std::size_t>(chain[static_cast<std::size_t>(k)])]);
    rows.push_back(tips[static_cast<std::size_t>(f)]);
  }
  Var joints = g.concat_rows(rows);

  if (mirrored) {
    Mat flip(kHandJoints, 3);
    for (int r = 0; r < kHandJoints; ++r) flip.row(r) << -1.0, 1.0, 1.0;
    joints = g.mul(joints, g.constant(flip));
  }
  return joints;
}

Var project_weak_perspective_graph(Graph& g, Var joints3d, Var rot_aa, Var trans, Var scale) {
  Var rot = g.reshape(g.rodrigues(rot_aa), 3, 3);
  Var rotated = g.matmul(joints3d, g.transpose(rot));
  Var planar = g.slice_cols(rotated, 0, 2);
  return g.add_rowvec(g.scale_by(planar, scale), trans);
}

}  // namespace signpose
