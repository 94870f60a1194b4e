#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "signpose/nn/graph.hpp"

namespace signpose::nn {

// Shared forward-pass context. rng drives dropout; eval mode never touches it.
struct TrainContext {
  bool train = false;
  RandomStream* rng = nullptr;
};

// Xavier-uniform initialized matrix.
Mat xavier_uniform(int rows, int cols, RandomStream& rng);

// Standard sinusoidal position encoding table: row t holds the encoding of
// position t (sin on even dims, cos on odd dims).
Mat sinusoidal_encoding(int positions, int d_model, int offset = 0);

// Additive causal mask: 0 where key <= query position, large negative above.
Mat causal_mask(int n);

struct Linear {
  Parameter W;  // (in x out)
  Parameter b;  // (1 x out)
  bool has_bias = true;

  Linear() = default;
  Linear(const std::string& name, int in, int out, RandomStream& rng, bool bias = true);
  Var forward(Graph& g, Var x);
  void collect(std::vector<Parameter*>& out);
};

struct LayerNorm {
  Parameter gamma, beta;

  LayerNorm() = default;
  LayerNorm(const std::string& name, int d);
  Var forward(Graph& g, Var x);
  void collect(std::vector<Parameter*>& out);
};

struct MultiHeadAttention {
  int n_heads = 0;
  int d_model = 0;
  double dropout = 0.0;  // applied to attention weights
  Linear wq, wk, wv, wo;

  MultiHeadAttention() = default;
  MultiHeadAttention(const std::string& name, int d_model, int n_heads, double dropout, RandomStream& rng);
  // add_mask: optional additive mask (query x key), e.g. causal_mask().
  Var forward(Graph& g, Var q, Var k, Var v, const Mat* add_mask, const TrainContext& ctx);
  void collect(std::vector<Parameter*>& out);
};

struct FeedForward {
  double dropout = 0.0;
  Linear lin1, lin2;

  FeedForward() = default;
  FeedForward(const std::string& name, int d_model, int d_ff, double dropout, RandomStream& rng);
  Var forward(Graph& g, Var x, const TrainContext& ctx);
  void collect(std::vector<Parameter*>& out);
};

struct TransformerConfig {
  int n_layers = 3;
  int n_heads = 8;
  int d_model = 256;
  int d_ff = 1024;
  double dropout = 0.1;
};

// Post-norm encoder layer: x' = L(M(x) + x); out = L(C(x') + x').
struct EncoderLayer {
  MultiHeadAttention self_attn;
  FeedForward ff;
  LayerNorm ln1, ln2;
  double dropout = 0.0;

  EncoderLayer() = default;
  EncoderLayer(const std::string& name, const TransformerConfig& cfg, RandomStream& rng);
  Var forward(Graph& g, Var x, const Mat* mask, const TrainContext& ctx);
  void collect(std::vector<Parameter*>& out);
};

struct Encoder {
  TransformerConfig cfg;
  std::vector<EncoderLayer> layers;

  Encoder() = default;
  Encoder(const std::string& name, const TransformerConfig& cfg, RandomStream& rng);
  Var forward(Graph& g, Var x, const TrainContext& ctx, const Mat* mask = nullptr);
  void collect(std::vector<Parameter*>& out);
};

// Cascaded cross-attention for two-memory fusion: attends the primary memory
// first, then refines against the secondary one through a residual stage so a
// nulled second stage degrades to primary-only attention plus a constant.
Var cascaded_cross_attention(Graph& g, MultiHeadAttention& primary, MultiHeadAttention& secondary, Var q,
                             Var mem_primary, Var mem_secondary, const TrainContext& ctx);

// Post-norm decoder layer: q = L(Ms(x) + x); y = L(MHA(q, mem) + q);
// out = L(C(y) + y). With a secondary memory the cross stage is cascaded.
struct DecoderLayer {
  MultiHeadAttention self_attn;
  MultiHeadAttention cross_attn;
  std::optional<MultiHeadAttention> cross_attn_secondary;
  FeedForward ff;
  LayerNorm ln1, ln2, ln3;
  double dropout = 0.0;

  DecoderLayer() = default;
  DecoderLayer(const std::string& name, const TransformerConfig& cfg, RandomStream& rng, bool fused = false);
  Var forward(Graph& g, Var x, Var memory, const Mat* self_mask, const TrainContext& ctx,
              std::optional<Var> memory_secondary = std::nullopt);
  void collect(std::vector<Parameter*>& out);
};

struct Decoder {
  TransformerConfig cfg;
  bool fused = false;
  std::vector<DecoderLayer> layers;

  Decoder() = default;
  Decoder(const std::string& name, const TransformerConfig& cfg, RandomStream& rng, bool fused = false);
  Var forward(Graph& g, Var x, Var memory, const Mat* self_mask, const TrainContext& ctx,
              std::optional<Var> memory_secondary = std::nullopt);
  void collect(std::vector<Parameter*>& out);
};

}  // namespace signpose::nn
