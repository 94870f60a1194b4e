#include "signpose/pose/skeleton.hpp"

#include <queue>
#include <stdexcept>

#include "signpose/common/json_io.hpp"
#include "signpose/pose/types.hpp"

namespace signpose {

namespace {

std::vector<int> hops_from(int n_nodes, const std::vector<std::pair<int, int>>& edges, int root) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n_nodes));
  for (auto [a, b] : edges) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  std::vector<int> dist(static_cast<std::size_t>(n_nodes), -1);
  std::queue<int> q;
  dist[static_cast<std::size_t>(root)] = 0;
  q.push(root);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (dist[static_cast<std::size_t>(v)] < 0) {
        dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
        q.push(v);
      }
    }
  }
  return dist;
}

SkeletonLayout build_default() {
  SkeletonLayout s;
  s.schema_version = 1;
  static const char* finger[5] = {"thumb", "index", "middle", "ring", "little"};
  s.hand_joint_names.push_back("wrist");
  for (int f = 0; f < 5; ++f) {
    for (int k = 1; k <= 4; ++k) {
      s.hand_joint_names.push_back(std::string(finger[f]) + "_" + std::to_string(k));
    }
  }
  // physical bones: wrist to each finger base, then along each finger
  for (int f = 0; f < 5; ++f) {
    int base = 1 + 4 * f;
    s.hand_bones.emplace_back(0, base);
    for (int k = 0; k < 3; ++k) s.hand_bones.emplace_back(base + k, base + k + 1);
  }
  // symmetrical links: joint k of finger f to joint k of the adjacent finger
  for (int f = 0; f + 1 < 5; ++f) {
    for (int k = 1; k <= 4; ++k) {
      s.symmetric_edges.emplace_back(4 * f + k, 4 * (f + 1) + k);
    }
  }
  // clusters: five fingers plus palm (wrist alone)
  for (int f = 0; f < 5; ++f) {
    std::vector<int> c;
    for (int k = 1; k <= 4; ++k) c.push_back(4 * f + k);
    s.clusters.push_back(std::move(c));
  }
  s.clusters.push_back({0});
  s.arm_joint_names = {"neck",       "left_shoulder", "right_shoulder", "left_elbow",
                       "right_elbow", "left_wrist",    "right_wrist"};
  s.arm_bones = {{0, 1}, {0, 2}, {1, 3}, {2, 4}, {3, 5}, {4, 6}};
  s.hand_root = 0;
  s.arm_root = 0;
  return s;
}

std::vector<std::pair<int, int>> pairs_from_json(const json& arr, const std::string& what) {
  std::vector<std::pair<int, int>> out;
  for (const auto& e : arr) {
    if (!e.is_array() || e.size() != 2) throw std::runtime_error("skeleton layout: bad edge entry in " + what);
    out.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  return out;
}

}  // namespace

std::vector<int> SkeletonLayout::hand_hops() const {
  return hops_from(static_cast<int>(hand_joint_names.size()), hand_bones, hand_root);
}

std::vector<int> SkeletonLayout::arm_hops() const {
  return hops_from(static_cast<int>(arm_joint_names.size()), arm_bones, arm_root);
}

void SkeletonLayout::validate() const {
  if (static_cast<int>(hand_joint_names.size()) != kHandJoints) {
    throw std::runtime_error("skeleton layout: expected 21 hand joints, got " +
                             std::to_string(hand_joint_names.size()));
  }
  if (static_cast<int>(arm_joint_names.size()) != kArmJoints) {
    throw std::runtime_error("skeleton layout: expected 7 arm joints, got " + std::to_string(arm_joint_names.size()));
  }
  auto check_edges = [](const std::vector<std::pair<int, int>>& edges, int n, const std::string& what) {
    for (auto [a, b] : edges) {
      if (a < 0 || a >= n || b < 0 || b >= n || a == b) throw std::runtime_error("skeleton layout: bad edge in " + what);
    }
  };
  check_edges(hand_bones, kHandJoints, "hand_bones");
  check_edges(symmetric_edges, kHandJoints, "symmetric_edges");
  check_edges(arm_bones, kArmJoints, "arm_bones");
  // connectivity
  for (int d : hand_hops()) {
    if (d < 0) throw std::runtime_error("skeleton layout: hand graph is not connected");
  }
  for (int d : arm_hops()) {
    if (d < 0) throw std::runtime_error("skeleton layout: arm graph is not connected");
  }
  // every node in exactly one cluster
  std::vector<int> seen(kHandJoints, 0);
  for (const auto& c : clusters) {
    for (int n : c) {
      if (n < 0 || n >= kHandJoints) throw std::runtime_error("skeleton layout: cluster node out of range");
      seen[static_cast<std::size_t>(n)]++;
    }
  }
  for (int n = 0; n < kHandJoints; ++n) {
    if (seen[static_cast<std::size_t>(n)] != 1) {
      throw std::runtime_error("skeleton layout: node " + std::to_string(n) + " must be in exactly one cluster");
    }
  }
  if (clusters.size() != 6) throw std::runtime_error("skeleton layout: expected 6 clusters");
}

const SkeletonLayout& default_skeleton() {
  static const SkeletonLayout layout = [] {
    SkeletonLayout s = build_default();
    s.validate();
    return s;
  }();
  return layout;
}

SkeletonLayout load_skeleton_layout(const std::filesystem::path& path) {
  json j = load_json_file(path);
  SkeletonLayout s;
  s.schema_version = j.at("schema_version").get<int>();
  if (s.schema_version != 1) {
    throw std::runtime_error("skeleton layout: unsupported schema_version " + std::to_string(s.schema_version));
  }
  s.hand_joint_names = j.at("hand_joint_names").get<std::vector<std::string>>();
  s.hand_bones = pairs_from_json(j.at("hand_bones"), "hand_bones");
  s.symmetric_edges = pairs_from_json(j.at("symmetric_edges"), "symmetric_edges");
  s.clusters = j.at("clusters").get<std::vector<std::vector<int>>>();
  s.arm_joint_names = j.at("arm_joint_names").get<std::vector<std::string>>();
  s.arm_bones = pairs_from_json(j.at("arm_bones"), "arm_bones");
  s.hand_root = j.value("hand_root", 0);
  s.arm_root = j.value("arm_root", 0);
  s.validate();
  return s;
}

void save_skeleton_layout(const std::filesystem::path& path, const SkeletonLayout& layout) {
  json j;
  j["schema_version"] = layout.schema_version;
  j["hand_joint_names"] = layout.hand_joint_names;
  json bones = json::array();
  for (auto [a, b] : layout.hand_bones) bones.push_back({a, b});
  j["hand_bones"] = bones;
  json sym = json::array();
  for (auto [a, b] : layout.symmetric_edges) sym.push_back({a, b});
  j["symmetric_edges"] = sym;
  j["clusters"] = layout.clusters;
  j["arm_joint_names"] = layout.arm_joint_names;
  json abones = json::array();
  for (auto [a, b] : layout.arm_bones) abones.push_back({a, b});
  j["arm_bones"] = abones;
  j["hand_root"] = layout.hand_root;
  j["arm_root"] = layout.arm_root;
  save_json_file(path, j);
}

}  // namespace signpose
