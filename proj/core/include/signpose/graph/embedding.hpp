#pragma once

#include "signpose/graph/gcn.hpp"
#include "signpose/pose/types.hpp"

namespace signpose {

struct EmbeddingConfig {
  int d_model = 256;
  std::vector<int> hand_gcn_widths = {32, 64};  // hidden widths; d_model/2 is appended
  std::vector<int> arm_gcn_widths = {32};       // hidden widths; d_model is appended
  GcnNormalization normalization = GcnNormalization::Symmetric;
  bool use_spatial_pe = true;
  bool use_temporal_pe = true;
};

// Node features for one hand: rows are joints, columns (x, y, confidence).
nn::Mat hand_node_features(const std::array<Joint2D, kHandJoints>& hand);
nn::Mat arm_node_features(const std::array<Joint2D, kArmJoints>& arms);

// Frame-level gesture state: each hand passes through a shared GCN stack and
// hierarchical pooling; the two pooled halves are concatenated and mapped to
// d_model.
struct GestureEmbedder {
  GcnStack stack;           // shared between hands
  nn::Linear out;           // (2 * d_model/2) -> d_model
  GraphTopology topology;

  GestureEmbedder() = default;
  GestureEmbedder(const std::string& name, const EmbeddingConfig& cfg, const SkeletonLayout& layout,
                  RandomStream& rng);
  // Pooled half for one hand -> (1 x d_model/2).
  nn::Var hand_state(nn::Graph& g, const std::array<Joint2D, kHandJoints>& hand);
  // Full frame gesture embedding -> (1 x d_model).
  nn::Var forward(nn::Graph& g, const PoseFrame& frame);
  void collect(std::vector<nn::Parameter*>& out);
};

// Frame-level spatial position embedding from the 7 arm joints.
struct SpatialEmbedder {
  GcnStack stack;
  GraphTopology topology;

  SpatialEmbedder() = default;
  SpatialEmbedder(const std::string& name, const EmbeddingConfig& cfg, const SkeletonLayout& layout,
                  RandomStream& rng);
  nn::Var forward(nn::Graph& g, const std::array<Joint2D, kArmJoints>& arms);
  void collect(std::vector<nn::Parameter*>& out);
};

// Fixed sinusoidal temporal position encoding for frame index t -> (1 x d).
nn::Mat temporal_position_encoding(int t, int d_model);

// Whole-sequence token embedding F_0: per frame, f_p + f_s + f_e -> (T x d).
struct SequenceEmbedder {
  EmbeddingConfig cfg;
  GestureEmbedder gesture;
  SpatialEmbedder spatial;

  SequenceEmbedder() = default;
  SequenceEmbedder(const std::string& name, const EmbeddingConfig& cfg, const SkeletonLayout& layout,
                   RandomStream& rng);
  nn::Var forward(nn::Graph& g, const PoseSequence& seq);
  void collect(std::vector<nn::Parameter*>& out);
};

}  // namespace signpose
