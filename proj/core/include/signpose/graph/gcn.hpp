#pragma once

#include <string>
#include <vector>

#include "signpose/graph/hand_graph.hpp"
#include "signpose/nn/modules.hpp"

namespace signpose {

// One graph-convolution layer: f_out = sum_i norm(A_i) * f_in * W_i (+ bias),
// optionally followed by ReLU.
struct GcnLayer {
  std::vector<nn::Parameter> weights;  // one (in x out) map per partition
  nn::Parameter bias;                  // (1 x out)
  bool has_bias = true;
  bool relu = true;

  GcnLayer() = default;
  GcnLayer(const std::string& name, int in, int out, int n_partitions, RandomStream& rng, bool with_bias = true,
           bool with_relu = true);
  nn::Var forward(nn::Graph& g, nn::Var features, const GraphTopology& topo);
  void collect(std::vector<nn::Parameter*>& out);
};

// Stacked graph convolutions over a fixed topology.
struct GcnStack {
  std::vector<GcnLayer> layers;

  GcnStack() = default;
  // widths = {in, hidden..., out}; ReLU after every layer.
  GcnStack(const std::string& name, const std::vector<int>& widths, int n_partitions, RandomStream& rng);
  nn::Var forward(nn::Graph& g, nn::Var features, const GraphTopology& topo);
  void collect(std::vector<nn::Parameter*>& out);
};

// Two-stage hierarchical pooling: per-cluster elementwise max over member
// nodes, then elementwise max over the cluster vectors -> (1 x C).
nn::Var pool_clusters(nn::Graph& g, nn::Var features, const GraphTopology& topo);

}  // namespace signpose
