#pragma once

#include <vector>

#include "signpose/nn/graph.hpp"
#include "signpose/pose/skeleton.hpp"

namespace signpose {

enum class GcnNormalization {
  Symmetric,  // D^{-1/2} A D^{-1/2}
  AsPrinted,  // D^{-1/2} A D^{+1/2}
};

// Node graph with its edge set dismantled into neighbor partitions and
// pre-normalized per-partition adjacency matrices.
//
// Partitions follow the skeleton-GCN convention relative to the root joint:
//   0: the node itself plus equal-hop neighbors (symmetrical links),
//   1: centripetal neighbors (closer to the root),
//   2: centrifugal neighbors (farther from the root).
struct GraphTopology {
  int n_nodes = 0;
  std::vector<nn::Mat> norm_adj;           // one (n x n) matrix per partition
  std::vector<std::vector<int>> clusters;  // pooling subsets (may be empty)

  int n_partitions() const { return static_cast<int>(norm_adj.size()); }
};

// 21-node hand graph: physical bones plus symmetrical fingertip links,
// clusters = 5 fingers + palm.
GraphTopology make_hand_topology(const SkeletonLayout& layout, GcnNormalization mode);

// 7-node arm graph; single cluster covering all nodes (pooled to one vector).
GraphTopology make_arm_topology(const SkeletonLayout& layout, GcnNormalization mode);

// Normalizes a raw adjacency matrix per `mode`. Zero-degree rows stay zero.
nn::Mat normalize_adjacency(const nn::Mat& adj, GcnNormalization mode);

}  // namespace signpose
