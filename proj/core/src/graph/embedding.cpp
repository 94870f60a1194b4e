#include "signpose/graph/embedding.hpp"

#include <stdexcept>

namespace signpose {

using nn::Graph;
using nn::Mat;
using nn::Var;

Mat hand_node_features(const std::array<Joint2D, kHandJoints>& hand) {
  Mat f(kHandJoints, 3);
  for (int j = 0; j < kHandJoints; ++j) {
    const Joint2D& joint = hand[static_cast<std::size_t>(j)];
    f(j, 0) = joint.x;
    f(j, 1) = joint.y;
    f(j, 2) = joint.confidence;
  }
  return f;
}

Mat arm_node_features(const std::array<Joint2D, kArmJoints>& arms) {
  Mat f(kArmJoints, 3);
  for (int j = 0; j < kArmJoints; ++j) {
    const Joint2D& joint = arms[static_cast<std::size_t>(j)];
    f(j, 0) = joint.x;
    f(j, 1) = joint.y;
    f(j, 2) = joint.confidence;
  }
  return f;
}

namespace {

std::vector<int> full_widths(const std::vector<int>& hidden, int in, int out) {
  std::vector<int> w;
  w.push_back(in);
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(out);
  return w;
}

}  // namespace

GestureEmbedder::GestureEmbedder(const std::string& name, const EmbeddingConfig& cfg, const SkeletonLayout& layout,
                                 RandomStream& rng)
    : stack(name + ".hand", full_widths(cfg.hand_gcn_widths, 3, cfg.d_model / 2), 3, rng),
      out(name + ".merge", cfg.d_model, cfg.d_model, rng),
      topology(make_hand_topology(layout, cfg.normalization)) {
  if (cfg.d_model % 2 != 0) throw std::invalid_argument("embedding: d_model must be even");
}

Var GestureEmbedder::hand_state(Graph& g, const std::array<Joint2D, kHandJoints>& hand) {
  Var features = g.constant(hand_node_features(hand));
  return pool_clusters(g, stack.forward(g, features, topology), topology);
}

Var GestureEmbedder::forward(Graph& g, const PoseFrame& frame) {
  Var left = hand_state(g, frame.left_hand);
  Var right = hand_state(g, frame.right_hand);
  return out.forward(g, g.concat_cols({left, right}));
}

void GestureEmbedder::collect(std::vector<nn::Parameter*>& params) {
  stack.collect(params);
  out.collect(params);
}

SpatialEmbedder::SpatialEmbedder(const std::string& name, const EmbeddingConfig& cfg, const SkeletonLayout& layout,
                                 RandomStream& rng)
    : stack(name + ".arm", full_widths(cfg.arm_gcn_widths, 3, cfg.d_model), 3, rng),
      topology(make_arm_topology(layout, cfg.normalization)) {}

Var SpatialEmbedder::forward(Graph& g, const std::array<Joint2D, kArmJoints>& arms) {
  Var features = g.constant(arm_node_features(arms));
  return pool_clusters(g, stack.forward(g, features, topology), topology);
}

void SpatialEmbedder::collect(std::vector<nn::Parameter*>& params) { stack.collect(params); }

Mat temporal_position_encoding(int t, int d_model) {
  if (t < 0) throw std::invalid_argument("temporal_position_encoding: t must be >= 0");
  return nn::sinusoidal_encoding(1, d_model, t);
}

SequenceEmbedder::SequenceEmbedder(const std::string& name, const EmbeddingConfig& cfg_, const SkeletonLayout& layout,
                                   RandomStream& rng)
    : cfg(cfg_), gesture(name + ".gesture", cfg_, layout, rng), spatial(name + ".spatial", cfg_, layout, rng) {}

Var SequenceEmbedder::forward(Graph& g, const PoseSequence& seq) {
  if (seq.frames.empty()) throw std::invalid_argument("embed_sequence: empty sequence");
  std::vector<Var> rows;
  rows.reserve(seq.frames.size());
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    Var token = gesture.forward(g, seq.frames[t]);
    if (cfg.use_spatial_pe) token = g.add(token, spatial.forward(g, seq.frames[t].arms));
    if (cfg.use_temporal_pe) {
      token = g.add(token, g.constant(temporal_position_encoding(static_cast<int>(t), cfg.d_model)));
    }
    rows.push_back(token);
  }
  return g.concat_rows(rows);
}

void SequenceEmbedder::collect(std::vector<nn::Parameter*>& params) {
  gesture.collect(params);
  spatial.collect(params);
}

}  // namespace signpose
