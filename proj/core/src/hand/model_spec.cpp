#include "signpose/hand/model_spec.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "signpose/common/json_io.hpp"
#include "signpose/common/random.hpp"

namespace signpose {

using nn::Mat;

double HandModelSpec::max_template_radius() const {
  double r = 0.0;
  for (Eigen::Index i = 0; i < template_verts.rows(); ++i) r = std::max(r, template_verts.row(i).norm());
  return r;
}

void HandModelSpec::validate() const {
  const int v = vertex_count();
  if (v < 4) throw std::runtime_error("hand model: too few vertices");
  if (parents[0] != -1) throw std::runtime_error("hand model: joint 0 must be the root (parent -1)");
  for (int j = 1; j < kModelJoints; ++j) {
    if (parents[static_cast<std::size_t>(j)] < 0 || parents[static_cast<std::size_t>(j)] >= j) {
      throw std::runtime_error("hand model: parents must be topologically ordered (parent index < joint index)");
    }
  }
  if (skin_weights.rows() != v || skin_weights.cols() != kModelJoints) {
    throw std::runtime_error("hand model: skinning weights must be (V x 16)");
  }
  for (Eigen::Index i = 0; i < skin_weights.rows(); ++i) {
    double row_sum = skin_weights.row(i).sum();
    if (std::abs(row_sum - 1.0) > 1e-6) {
      throw std::runtime_error("hand model: skinning weight row " + std::to_string(i) + " sums to " +
                               std::to_string(row_sum) + ", expected 1");
    }
    if (skin_weights.row(i).minCoeff() < -1e-12) {
      throw std::runtime_error("hand model: skinning weights must be nonnegative (row " + std::to_string(i) + ")");
    }
  }
  if (joint_regressor.rows() != kModelJoints || joint_regressor.cols() != v) {
    throw std::runtime_error("hand model: joint regressor must be (16 x V)");
  }
  if (shape_basis.rows() != 3 * v || shape_basis.cols() != kBetaDim) {
    throw std::runtime_error("hand model: shape basis must be (3V x 10)");
  }
  if (pose_blend_basis.size() != 0 &&
      (pose_blend_basis.rows() != 3 * v || pose_blend_basis.cols() != 9 * (kModelJoints - 1))) {
    throw std::runtime_error("hand model: pose blend basis must be (3V x 135)");
  }
  if (pose_basis.rows() != kPoseDim || pose_basis.cols() != kThetaDim) {
    throw std::runtime_error("hand model: pose basis must be (45 x 25)");
  }
  if (pose_mean.rows() != 1 || pose_mean.cols() != kPoseDim) {
    throw std::runtime_error("hand model: pose mean must be (1 x 45)");
  }
  if (fingertips_from_vertices) {
    for (int idx : fingertip_vertices) {
      if (idx < 0 || idx >= v) throw std::runtime_error("hand model: fingertip vertex index out of range");
    }
  } else if (tip_regressor.rows() != kFingers || tip_regressor.cols() != v) {
    throw std::runtime_error("hand model: tip regressor must be (5 x V)");
  }
  if (from_asset) {
    if (v != 778) throw std::runtime_error("hand model asset: expected 778 vertices, got " + std::to_string(v));
    if (face_count() != 1538) {
      throw std::runtime_error("hand model asset: expected 1538 faces, got " + std::to_string(face_count()));
    }
    std::set<int> tips(fingertip_vertices.begin(), fingertip_vertices.end());
    if (tips != std::set<int>{333, 443, 555, 678, 734}) {
      throw std::runtime_error("hand model asset: fingertip vertices must be {333, 443, 555, 678, 734}");
    }
  }
}

namespace {

// Deterministic orthonormal (45 x 25) basis via modified Gram-Schmidt over a
// fixed-seed Gaussian matrix.
Mat make_pose_basis() {
  RandomStream rng(derive_seed(0x5157ULL, "pose-embedding-basis"));
  Mat m(kPoseDim, kThetaDim);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.normal();
  for (int c = 0; c < m.cols(); ++c) {
    for (int k = 0; k < c; ++k) m.col(c) -= m.col(k).dot(m.col(c)) * m.col(k);
    m.col(c).normalize();
  }
  return m;
}

struct FingerLayout {
  double angle;                  // from +y axis in the x-y plane
  double base_dist;
  std::array<double, 3> seg_len;
  double tip_len;
};

const std::array<FingerLayout, kFingers> kFingerLayouts = {{
    {-0.90, 0.25, {0.18, 0.14, 0.12}, 0.06},  // thumb
    {-0.25, 0.42, {0.20, 0.13, 0.10}, 0.05},  // index
    {0.00, 0.44, {0.22, 0.14, 0.11}, 0.05},   // middle
    {0.25, 0.42, {0.20, 0.13, 0.10}, 0.05},   // ring
    {0.50, 0.38, {0.15, 0.10, 0.09}, 0.045},  // little
}};

}  // namespace

std::shared_ptr<const HandModelSpec> make_procedural_hand(int vertex_count) {
  if (vertex_count < 84) throw std::invalid_argument("procedural hand: need at least 84 vertices (4 per ring)");
  auto spec = std::make_shared<HandModelSpec>();
  spec->from_asset = false;

  // topology: wrist root, three joints per finger
  spec->parents[0] = -1;
  for (int f = 0; f < kFingers; ++f) {
    int base = 1 + 3 * f;
    spec->parents[static_cast<std::size_t>(base)] = 0;
    spec->parents[static_cast<std::size_t>(base + 1)] = base;
    spec->parents[static_cast<std::size_t>(base + 2)] = base + 1;
    spec->distal_joint[static_cast<std::size_t>(f)] = base + 2;
  }

  // rest joints and tips in the x-y plane with a slight z curl
  Mat joints(kModelJoints, 3);
  Mat tips(kFingers, 3);
  joints.row(0) << 0.0, 0.0, 0.0;
  for (int f = 0; f < kFingers; ++f) {
    const FingerLayout& lay = kFingerLayouts[static_cast<std::size_t>(f)];
    Eigen::RowVector3d dir(std::sin(lay.angle), std::cos(lay.angle), 0.0);
    Eigen::RowVector3d base = dir * lay.base_dist;
    double run = 0.0;
    for (int k = 0; k < 3; ++k) {
      joints.row(1 + 3 * f + k) = base + dir * run + Eigen::RowVector3d(0, 0, -0.015 * k);
      run += lay.seg_len[static_cast<std::size_t>(k)];
    }
    tips.row(f) = base + dir * (run + lay.tip_len) + Eigen::RowVector3d(0, 0, -0.03);
  }

  // vertex rings centered at joints and tips (21 rings)
  const int kRings = kModelJoints + kFingers;
  int ring_size = vertex_count / kRings;
  int wrist_extra = vertex_count - ring_size * kRings;
  std::vector<int> ring_counts(kRings, ring_size);
  ring_counts[0] += wrist_extra;

  auto ring_radius = [](int ring) {
    if (ring == 0) return 0.18;             // wrist
    if (ring >= kModelJoints) return 0.025; // tips
    int k = (ring - 1) % 3;
    return 0.06 - 0.012 * k;
  };
  auto ring_center = [&](int ring) -> Eigen::RowVector3d {
    if (ring < kModelJoints) return joints.row(ring);
    return tips.row(ring - kModelJoints);
  };

  spec->template_verts.resize(vertex_count, 3);
  spec->joint_regressor = Mat::Zero(kModelJoints, vertex_count);
  spec->tip_regressor = Mat::Zero(kFingers, vertex_count);
  spec->skin_weights = Mat::Zero(vertex_count, kModelJoints);

  std::vector<int> ring_start(kRings);
  int vi = 0;
  for (int ring = 0; ring < kRings; ++ring) {
    ring_start[static_cast<std::size_t>(ring)] = vi;
    int count = ring_counts[static_cast<std::size_t>(ring)];
    double radius = ring_radius(ring);
    Eigen::RowVector3d center = ring_center(ring);
    for (int k = 0; k < count; ++k, ++vi) {
      double a = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(count);
      // rings lie in the x-z plane (perpendicular to the mostly +y bones)
      spec->template_verts.row(vi) = center + Eigen::RowVector3d(radius * std::cos(a), 0.0, radius * std::sin(a));
      if (ring < kModelJoints) {
        spec->joint_regressor(ring, vi) = 1.0 / static_cast<double>(count);
        int parent = spec->parents[static_cast<std::size_t>(ring)];
        if (parent < 0) {
          spec->skin_weights(vi, ring) = 1.0;
        } else {
          spec->skin_weights(vi, ring) = 0.75;
          spec->skin_weights(vi, parent) = 0.25;
        }
      } else {
        int finger = ring - kModelJoints;
        spec->tip_regressor(finger, vi) = 1.0 / static_cast<double>(count);
        spec->skin_weights(vi, spec->distal_joint[static_cast<std::size_t>(finger)]) = 1.0;
      }
    }
  }

  // faces: tubes along each finger chain plus a fan cap on the wrist ring
  auto add_tube = [&](int ring_a, int ring_b) {
    int na = ring_counts[static_cast<std::size_t>(ring_a)], nb = ring_counts[static_cast<std::size_t>(ring_b)];
    int n = std::min(na, nb);
    int sa = ring_start[static_cast<std::size_t>(ring_a)], sb = ring_start[static_cast<std::size_t>(ring_b)];
    for (int k = 0; k < n; ++k) {
      int k1 = (k + 1) % n;
      spec->faces.push_back({sa + k, sb + k, sb + k1});
      spec->faces.push_back({sa + k, sb + k1, sa + k1});
    }
  };
  for (int f = 0; f < kFingers; ++f) {
    int base = 1 + 3 * f;
    add_tube(0, base);
    add_tube(base, base + 1);
    add_tube(base + 1, base + 2);
    add_tube(base + 2, kModelJoints + f);
  }
  {
    int s = ring_start[0], n = ring_counts[0];
    for (int k = 1; k + 1 < n; ++k) spec->faces.push_back({s, s + k, s + k + 1});
  }

  // shape basis: smooth deterministic displacement modes, each normalized to
  // RMS vertex displacement 0.05
  spec->shape_basis = Mat::Zero(3 * vertex_count, kBetaDim);
  for (int v = 0; v < vertex_count; ++v) {
    Eigen::RowVector3d p = spec->template_verts.row(v);
    auto set_mode = [&](int mode, const Eigen::RowVector3d& d) {
      spec->shape_basis(3 * v + 0, mode) = d.x();
      spec->shape_basis(3 * v + 1, mode) = d.y();
      spec->shape_basis(3 * v + 2, mode) = d.z();
    };
    set_mode(0, p);                                               // uniform scale
    set_mode(1, {p.x(), 0, 0});                                   // x stretch
    set_mode(2, {0, p.y(), 0});                                   // y stretch
    set_mode(3, {0, 0, p.z()});                                   // z stretch
    set_mode(4, {0, std::max(0.0, p.y() - 0.3), 0});              // finger length
    set_mode(5, {p.x(), 0, p.z()});                               // thickness
    set_mode(6, {0.1 * std::sin(2.0 * p.y()), 0, 0});             // lateral bend
    set_mode(7, {0, 0.1 * std::sin(2.0 * p.x()), 0});             // spread
    set_mode(8, {0, 0, 0.1 * std::cos(2.0 * p.y())});             // cup
    set_mode(9, {0.05 * p.y(), 0.05 * p.x(), 0});                 // shear
  }
  for (int mode = 0; mode < kBetaDim; ++mode) {
    double rms = std::sqrt(spec->shape_basis.col(mode).squaredNorm() / static_cast<double>(vertex_count));
    if (rms > 1e-12) spec->shape_basis.col(mode) *= 0.05 / rms;
  }

  spec->pose_blend_basis = Mat();  // none in the procedural model
  spec->pose_basis = make_pose_basis();
  spec->pose_mean = Mat::Zero(1, kPoseDim);
  spec->fingertips_from_vertices = false;
  spec->validate();
  return spec;
}

std::shared_ptr<const HandModelSpec> load_hand_model_asset(const std::filesystem::path& dir) {
  json j = load_json_file(dir / "model.json");
  auto spec = std::make_shared<HandModelSpec>();
  spec->from_asset = true;
  try {
    int version = j.at("schema_version").get<int>();
    if (version != 1) throw std::runtime_error("unsupported hand model schema_version " + std::to_string(version));

    auto to_mat = [](const json& arr, const char* what) {
      if (!arr.is_array() || arr.empty()) throw std::runtime_error(std::string("hand model asset: bad ") + what);
      Mat m(arr.size(), arr[0].size());
      for (std::size_t r = 0; r < arr.size(); ++r) {
        if (arr[r].size() != static_cast<std::size_t>(m.cols())) {
          throw std::runtime_error(std::string("hand model asset: ragged rows in ") + what);
        }
        for (std::size_t c = 0; c < arr[r].size(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = arr[r][c].get<double>();
      }
      return m;
    };

    spec->template_verts = to_mat(j.at("template_vertices"), "template_vertices");
    for (const auto& f : j.at("faces")) {
      spec->faces.push_back({f[0].get<int>(), f[1].get<int>(), f[2].get<int>()});
    }
    spec->skin_weights = to_mat(j.at("skinning_weights"), "skinning_weights");
    spec->joint_regressor = to_mat(j.at("joint_regressor"), "joint_regressor");
    spec->shape_basis = to_mat(j.at("shape_basis"), "shape_basis");
    if (j.contains("pose_blend_basis") && !j["pose_blend_basis"].is_null()) {
      spec->pose_blend_basis = to_mat(j["pose_blend_basis"], "pose_blend_basis");
    }
    Mat comps = to_mat(j.at("pose_components"), "pose_components");  // rows = components over 45 dims
    if (comps.cols() != kPoseDim || comps.rows() < kThetaDim) {
      throw std::runtime_error("hand model asset: pose_components must be (>=25 x 45)");
    }
    spec->pose_basis = comps.topRows(kThetaDim).transpose();
    if (j.contains("pose_mean") && !j["pose_mean"].is_null()) {
      std::vector<double> mean = j["pose_mean"].get<std::vector<double>>();
      if (mean.size() != kPoseDim) throw std::runtime_error("hand model asset: pose_mean must have 45 entries");
      spec->pose_mean.resize(1, kPoseDim);
      for (int i = 0; i < kPoseDim; ++i) spec->pose_mean(0, i) = mean[static_cast<std::size_t>(i)];
    } else {
      spec->pose_mean = Mat::Zero(1, kPoseDim);
    }
    std::vector<int> parents = j.at("parents").get<std::vector<int>>();
    if (parents.size() != kModelJoints) throw std::runtime_error("hand model asset: parents must have 16 entries");
    for (int i = 0; i < kModelJoints; ++i) spec->parents[static_cast<std::size_t>(i)] = parents[static_cast<std::size_t>(i)];
    std::vector<int> tips = j.at("fingertip_vertices").get<std::vector<int>>();
    if (tips.size() != kFingers) throw std::runtime_error("hand model asset: fingertip_vertices must have 5 entries");
    for (int i = 0; i < kFingers; ++i) spec->fingertip_vertices[static_cast<std::size_t>(i)] = tips[static_cast<std::size_t>(i)];
    spec->fingertips_from_vertices = true;
    // distal joints: last joint of each finger chain in canonical order
    std::vector<int> distal = j.at("distal_joints").get<std::vector<int>>();
    if (distal.size() != kFingers) throw std::runtime_error("hand model asset: distal_joints must have 5 entries");
    for (int i = 0; i < kFingers; ++i) spec->distal_joint[static_cast<std::size_t>(i)] = distal[static_cast<std::size_t>(i)];
  } catch (const json::exception& e) {
    throw std::runtime_error("hand model asset parse error in " + (dir / "model.json").string() + ": " + e.what());
  }
  spec->validate();
  return spec;
}

std::shared_ptr<const HandModelSpec> resolve_hand_model(const std::string& selector, int procedural_vertices) {
  if (selector == "procedural" || selector.empty()) return make_procedural_hand(procedural_vertices);
  const std::string prefix = "mano:";
  if (selector.rfind(prefix, 0) == 0) return load_hand_model_asset(selector.substr(prefix.size()));
  throw std::invalid_argument("hand model selector must be 'procedural' or 'mano:<path>', got '" + selector + "'");
}

}  // namespace signpose
