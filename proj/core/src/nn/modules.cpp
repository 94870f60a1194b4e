#include "signpose/nn/modules.hpp"

#include <cmath>
#include <stdexcept>

namespace signpose::nn {

Mat xavier_uniform(int rows, int cols, RandomStream& rng) {
  double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-limit, limit);
  return m;
}

Mat sinusoidal_encoding(int positions, int d_model, int offset) {
  Mat pe(positions, d_model);
  for (int t = 0; t < positions; ++t) {
    for (int i = 0; i < d_model; ++i) {
      double exponent = static_cast<double>(2 * (i / 2)) / static_cast<double>(d_model);
      double angle = static_cast<double>(t + offset) / std::pow(10000.0, exponent);
      pe(t, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return pe;
}

Mat causal_mask(int n) {
  Mat m = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) m(i, j) = neg_inf();
  return m;
}

Linear::Linear(const std::string& name, int in, int out, RandomStream& rng, bool bias)
    : W(name + ".W", xavier_uniform(in, out, rng)), has_bias(bias) {
  if (bias) b = Parameter(name + ".b", Mat::Zero(1, out));
}

Var Linear::forward(Graph& g, Var x) {
  Var y = g.matmul(x, g.param(W));
  if (has_bias) y = g.add_rowvec(y, g.param(b));
  return y;
}

void Linear::collect(std::vector<Parameter*>& out) {
  out.push_back(&W);
  if (has_bias) out.push_back(&b);
}

LayerNorm::LayerNorm(const std::string& name, int d)
    : gamma(name + ".gamma", Mat::Ones(1, d)), beta(name + ".beta", Mat::Zero(1, d)) {}

Var LayerNorm::forward(Graph& g, Var x) { return g.layer_norm(x, g.param(gamma), g.param(beta)); }

void LayerNorm::collect(std::vector<Parameter*>& out) {
  out.push_back(&gamma);
  out.push_back(&beta);
}

MultiHeadAttention::MultiHeadAttention(const std::string& name, int d_model_, int n_heads_, double dropout_,
                                       RandomStream& rng)
    : n_heads(n_heads_),
      d_model(d_model_),
      dropout(dropout_),
      wq(name + ".wq", d_model_, d_model_, rng),
      wk(name + ".wk", d_model_, d_model_, rng),
      wv(name + ".wv", d_model_, d_model_, rng),
      wo(name + ".wo", d_model_, d_model_, rng) {
  if (d_model_ % n_heads_ != 0) throw std::invalid_argument("attention: d_model must be divisible by n_heads");
}

Var MultiHeadAttention::forward(Graph& g, Var q, Var k, Var v, const Mat* add_mask, const TrainContext& ctx) {
  if (g.val(k).rows() != g.val(v).rows()) throw std::invalid_argument("attention: key/value lengths differ");
  if (g.val(q).cols() != d_model || g.val(k).cols() != d_model || g.val(v).cols() != d_model) {
    throw std::invalid_argument("attention: input dimension must equal d_model");
  }
  const int dk = d_model / n_heads;
  Var Q = wq.forward(g, q);
  Var K = wk.forward(g, k);
  Var V = wv.forward(g, v);
  std::vector<Var> heads;
  heads.reserve(static_cast<std::size_t>(n_heads));
  for (int h = 0; h < n_heads; ++h) {
    Var Qh = g.slice_cols(Q, h * dk, dk);
    Var Kh = g.slice_cols(K, h * dk, dk);
    Var Vh = g.slice_cols(V, h * dk, dk);
    Var scores = g.scale(g.matmul(Qh, g.transpose(Kh)), 1.0 / std::sqrt(static_cast<double>(dk)));
    if (add_mask != nullptr) {
      if (add_mask->rows() != g.val(scores).rows() || add_mask->cols() != g.val(scores).cols()) {
        throw std::invalid_argument("attention: mask shape mismatch");
      }
      scores = g.add(scores, g.constant(*add_mask));
    }
    Var weights = g.rowwise_softmax(scores);
    if (ctx.train && dropout > 0.0) weights = g.dropout(weights, dropout, *ctx.rng, true);
    heads.push_back(g.matmul(weights, Vh));
  }
  return wo.forward(g, g.concat_cols(heads));
}

void MultiHeadAttention::collect(std::vector<Parameter*>& out) {
  wq.collect(out);
  wk.collect(out);
  wv.collect(out);
  wo.collect(out);
}

FeedForward::FeedForward(const std::string& name, int d_model, int d_ff, double dropout_, RandomStream& rng)
    : dropout(dropout_), lin1(name + ".lin1", d_model, d_ff, rng), lin2(name + ".lin2", d_ff, d_model, rng) {}

Var FeedForward::forward(Graph& g, Var x, const TrainContext& ctx) {
  Var h = g.relu(lin1.forward(g, x));
  if (ctx.train && dropout > 0.0) h = g.dropout(h, dropout, *ctx.rng, true);
  return lin2.forward(g, h);
}

void FeedForward::collect(std::vector<Parameter*>& out) {
  lin1.collect(out);
  lin2.collect(out);
}

EncoderLayer::EncoderLayer(const std::string& name, const TransformerConfig& cfg, RandomStream& rng)
    : self_attn(name + ".attn", cfg.d_model, cfg.n_heads, cfg.dropout, rng),
      ff(name + ".ff", cfg.d_model, cfg.d_ff, cfg.dropout, rng),
      ln1(name + ".ln1", cfg.d_model),
      ln2(name + ".ln2", cfg.d_model),
      dropout(cfg.dropout) {}

Var EncoderLayer::forward(Graph& g, Var x, const Mat* mask, const TrainContext& ctx) {
  Var a = self_attn.forward(g, x, x, x, mask, ctx);
  if (ctx.train && dropout > 0.0) a = g.dropout(a, dropout, *ctx.rng, true);
  Var x1 = ln1.forward(g, g.add(a, x));
  Var f = ff.forward(g, x1, ctx);
  if (ctx.train && dropout > 0.0) f = g.dropout(f, dropout, *ctx.rng, true);
  return ln2.forward(g, g.add(f, x1));
}

void EncoderLayer::collect(std::vector<Parameter*>& out) {
  self_attn.collect(out);
  ff.collect(out);
  ln1.collect(out);
  ln2.collect(out);
}

Encoder::Encoder(const std::string& name, const TransformerConfig& cfg_, RandomStream& rng) : cfg(cfg_) {
  layers.reserve(static_cast<std::size_t>(cfg.n_layers));
  for (int i = 0; i < cfg.n_layers; ++i) layers.emplace_back(name + ".layer" + std::to_string(i), cfg, rng);
}

Var Encoder::forward(Graph& g, Var x, const TrainContext& ctx, const Mat* mask) {
  for (auto& layer : layers) x = layer.forward(g, x, mask, ctx);
  return x;
}

void Encoder::collect(std::vector<Parameter*>& out) {
  for (auto& layer : layers) layer.collect(out);
}

Var cascaded_cross_attention(Graph& g, MultiHeadAttention& primary, MultiHeadAttention& secondary, Var q,
                             Var mem_primary, Var mem_secondary, const TrainContext& ctx) {
  if (!mem_primary.valid() || !mem_secondary.valid()) {
    throw std::invalid_argument("cascaded_cross_attention: both memories are required");
  }
  Var u = primary.forward(g, q, mem_primary, mem_primary, nullptr, ctx);
  Var r = secondary.forward(g, u, mem_secondary, mem_secondary, nullptr, ctx);
  return g.add(u, r);
}

DecoderLayer::DecoderLayer(const std::string& name, const TransformerConfig& cfg, RandomStream& rng, bool fused)
    : self_attn(name + ".self_attn", cfg.d_model, cfg.n_heads, cfg.dropout, rng),
      cross_attn(name + ".cross_attn", cfg.d_model, cfg.n_heads, cfg.dropout, rng),
      ff(name + ".ff", cfg.d_model, cfg.d_ff, cfg.dropout, rng),
      ln1(name + ".ln1", cfg.d_model),
      ln2(name + ".ln2", cfg.d_model),
      ln3(name + ".ln3", cfg.d_model),
      dropout(cfg.dropout) {
  if (fused) cross_attn_secondary.emplace(name + ".cross_attn2", cfg.d_model, cfg.n_heads, cfg.dropout, rng);
}

Var DecoderLayer::forward(Graph& g, Var x, Var memory, const Mat* self_mask, const TrainContext& ctx,
                          std::optional<Var> memory_secondary) {
  Var a = self_attn.forward(g, x, x, x, self_mask, ctx);
  if (ctx.train && dropout > 0.0) a = g.dropout(a, dropout, *ctx.rng, true);
  Var q = ln1.forward(g, g.add(a, x));

  Var c{};
  if (memory_secondary.has_value()) {
    if (!cross_attn_secondary.has_value()) {
      throw std::invalid_argument("decoder layer: secondary memory given but layer built without fusion");
    }
    c = cascaded_cross_attention(g, cross_attn, *cross_attn_secondary, q, memory, *memory_secondary, ctx);
  } else {
    if (cross_attn_secondary.has_value()) {
      throw std::invalid_argument("decoder layer: fusion layer requires both memories");
    }
    c = cross_attn.forward(g, q, memory, memory, nullptr, ctx);
  }
  if (ctx.train && dropout > 0.0) c = g.dropout(c, dropout, *ctx.rng, true);
  Var y = ln2.forward(g, g.add(c, q));

  Var f = ff.forward(g, y, ctx);
  if (ctx.train && dropout > 0.0) f = g.dropout(f, dropout, *ctx.rng, true);
  return ln3.forward(g, g.add(f, y));
}

void DecoderLayer::collect(std::vector<Parameter*>& out) {
  self_attn.collect(out);
  cross_attn.collect(out);
  if (cross_attn_secondary.has_value()) cross_attn_secondary->collect(out);
  ff.collect(out);
  ln1.collect(out);
  ln2.collect(out);
  ln3.collect(out);
}

Decoder::Decoder(const std::string& name, const TransformerConfig& cfg_, RandomStream& rng, bool fused_)
    : cfg(cfg_), fused(fused_) {
  layers.reserve(static_cast<std::size_t>(cfg.n_layers));
  for (int i = 0; i < cfg.n_layers; ++i) layers.emplace_back(name + ".layer" + std::to_string(i), cfg, rng, fused);
}

Var Decoder::forward(Graph& g, Var x, Var memory, const Mat* self_mask, const TrainContext& ctx,
                     std::optional<Var> memory_secondary) {
  for (auto& layer : layers) x = layer.forward(g, x, memory, self_mask, ctx, memory_secondary);
  return x;
}

void Decoder::collect(std::vector<Parameter*>& out) {
  for (auto& layer : layers) layer.collect(out);
}

}  // namespace signpose::nn
