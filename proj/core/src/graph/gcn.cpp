#include "signpose/graph/gcn.hpp"

#include <stdexcept>

namespace signpose {

using nn::Graph;
using nn::Var;

GcnLayer::GcnLayer(const std::string& name, int in, int out, int n_partitions, RandomStream& rng, bool with_bias,
                   bool with_relu)
    : has_bias(with_bias), relu(with_relu) {
  weights.reserve(static_cast<std::size_t>(n_partitions));
  for (int i = 0; i < n_partitions; ++i) {
    weights.emplace_back(name + ".W" + std::to_string(i), nn::xavier_uniform(in, out, rng));
  }
  if (with_bias) bias = nn::Parameter(name + ".b", nn::Mat::Zero(1, out));
}

Var GcnLayer::forward(Graph& g, Var features, const GraphTopology& topo) {
  if (g.val(features).rows() != topo.n_nodes) {
    throw std::invalid_argument("gcn_layer: feature rows (" + std::to_string(g.val(features).rows()) +
                                ") do not match graph nodes (" + std::to_string(topo.n_nodes) + ")");
  }
  if (topo.n_partitions() != static_cast<int>(weights.size())) {
    throw std::invalid_argument("gcn_layer: partition count mismatch");
  }
  Var acc{};
  for (std::size_t i = 0; i < weights.size(); ++i) {
    Var term = g.matmul(g.matmul(g.constant(topo.norm_adj[i]), features), g.param(weights[i]));
    acc = (i == 0) ? term : g.add(acc, term);
  }
  if (has_bias) acc = g.add_rowvec(acc, g.param(bias));
  if (relu) acc = g.relu(acc);
  return acc;
}

void GcnLayer::collect(std::vector<nn::Parameter*>& out) {
  for (auto& w : weights) out.push_back(&w);
  if (has_bias) out.push_back(&bias);
}

GcnStack::GcnStack(const std::string& name, const std::vector<int>& widths, int n_partitions, RandomStream& rng) {
  if (widths.size() < 2) throw std::invalid_argument("gcn_stack: need at least {in, out} widths");
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    layers.emplace_back(name + ".gcn" + std::to_string(i), widths[i], widths[i + 1], n_partitions, rng);
  }
}

Var GcnStack::forward(Graph& g, Var features, const GraphTopology& topo) {
  for (auto& layer : layers) features = layer.forward(g, features, topo);
  return features;
}

void GcnStack::collect(std::vector<nn::Parameter*>& out) {
  for (auto& layer : layers) layer.collect(out);
}

Var pool_clusters(nn::Graph& g, nn::Var features, const GraphTopology& topo) {
  if (topo.clusters.empty()) throw std::invalid_argument("pool_clusters: topology has no clusters");
  Var per_cluster = g.rowgroup_max(features, topo.clusters);
  std::vector<int> all(topo.clusters.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return g.rowgroup_max(per_cluster, {all});
}

}  // namespace signpose
