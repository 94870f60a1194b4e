#include "signpose/graph/hand_graph.hpp"

#include <cmath>

namespace signpose {

using nn::Mat;

Mat normalize_adjacency(const Mat& adj, GcnNormalization mode) {
  Eigen::Index n = adj.rows();
  Eigen::VectorXd deg = adj.rowwise().sum();
  Eigen::VectorXd d_neg(n), d_pos(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (deg(i) > 0.0) {
      d_neg(i) = 1.0 / std::sqrt(deg(i));
      d_pos(i) = std::sqrt(deg(i));
    } else {
      d_neg(i) = 0.0;
      d_pos(i) = 0.0;
    }
  }
  if (mode == GcnNormalization::Symmetric) {
    return d_neg.asDiagonal() * adj * d_neg.asDiagonal();
  }
  return d_neg.asDiagonal() * adj * d_pos.asDiagonal();
}

namespace {

GraphTopology build_partitions(int n, const std::vector<std::pair<int, int>>& directed_edges,
                               const std::vector<int>& hops, GcnNormalization mode) {
  Mat same = Mat::Identity(n, n);
  Mat centripetal = Mat::Zero(n, n);
  Mat centrifugal = Mat::Zero(n, n);
  for (auto [a, b] : directed_edges) {
    // row = receiving node, column = neighbor it aggregates from
    int ha = hops[static_cast<std::size_t>(a)], hb = hops[static_cast<std::size_t>(b)];
    if (ha == hb) {
      same(a, b) = 1.0;
      same(b, a) = 1.0;
    } else {
      // neighbor closer to the root is centripetal for the farther node
      int near = ha < hb ? a : b;
      int far = ha < hb ? b : a;
      centripetal(far, near) = 1.0;
      centrifugal(near, far) = 1.0;
    }
  }
  GraphTopology topo;
  topo.n_nodes = n;
  topo.norm_adj = {normalize_adjacency(same, mode), normalize_adjacency(centripetal, mode),
                   normalize_adjacency(centrifugal, mode)};
  return topo;
}

}  // namespace

GraphTopology make_hand_topology(const SkeletonLayout& layout, GcnNormalization mode) {
  std::vector<std::pair<int, int>> edges = layout.hand_bones;
  edges.insert(edges.end(), layout.symmetric_edges.begin(), layout.symmetric_edges.end());
  GraphTopology topo = build_partitions(kHandJoints, edges, layout.hand_hops(), mode);
  topo.clusters = layout.clusters;
  return topo;
}

GraphTopology make_arm_topology(const SkeletonLayout& layout, GcnNormalization mode) {
  GraphTopology topo = build_partitions(kArmJoints, layout.arm_bones, layout.arm_hops(), mode);
  std::vector<int> all(kArmJoints);
  for (int i = 0; i < kArmJoints; ++i) all[static_cast<std::size_t>(i)] = i;
  topo.clusters = {all};
  return topo;
}

}  // namespace signpose
