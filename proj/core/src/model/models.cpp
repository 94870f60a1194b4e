#include "signpose/model/models.hpp"

#include <stdexcept>

namespace signpose {

using nn::Graph;
using nn::Mat;
using nn::Var;

EmbeddingConfig ModelConfig::embedding_config() const {
  EmbeddingConfig e;
  e.d_model = d_model;
  e.hand_gcn_widths = hand_gcn_widths;
  e.arm_gcn_widths = arm_gcn_widths;
  if (normalization_mode == "symmetric") {
    e.normalization = GcnNormalization::Symmetric;
  } else if (normalization_mode == "as_printed") {
    e.normalization = GcnNormalization::AsPrinted;
  } else {
    throw std::invalid_argument("normalization_mode must be 'symmetric' or 'as_printed', got '" +
                                normalization_mode + "'");
  }
  e.use_spatial_pe = use_spatial_pe;
  e.use_temporal_pe = use_temporal_pe;
  return e;
}

nn::TransformerConfig ModelConfig::encoder_config() const {
  nn::TransformerConfig t;
  t.n_layers = n_layers;
  t.n_heads = n_heads;
  t.d_model = d_model;
  t.d_ff = ff_width > 0 ? ff_width : 4 * d_model;
  t.dropout = dropout;
  return t;
}

HandDecoderConfig ModelConfig::hand_decoder_config() const {
  HandDecoderConfig h;
  h.clamp_camera = clamp_camera;
  h.trans_bound = trans_bound;
  h.scale_max = scale_max;
  return h;
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"d_model", c.d_model},
                     {"gcn_widths", c.hand_gcn_widths},
                     {"arm_gcn_widths", c.arm_gcn_widths},
                     {"normalization_mode", c.normalization_mode},
                     {"use_spatial_pe", c.use_spatial_pe},
                     {"use_temporal_pe", c.use_temporal_pe},
                     {"n_layers", c.n_layers},
                     {"n_heads", c.n_heads},
                     {"ff_width", c.ff_width},
                     {"dropout", c.dropout},
                     {"hand_model", c.hand_model},
                     {"procedural_vertices", c.procedural_vertices},
                     {"clamp_camera", c.clamp_camera},
                     {"trans_bound", c.trans_bound},
                     {"scale_max", c.scale_max}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  ModelConfig d;
  c.d_model = j.value("d_model", d.d_model);
  c.hand_gcn_widths = j.value("gcn_widths", d.hand_gcn_widths);
  c.arm_gcn_widths = j.value("arm_gcn_widths", d.arm_gcn_widths);
  c.normalization_mode = j.value("normalization_mode", d.normalization_mode);
  c.use_spatial_pe = j.value("use_spatial_pe", d.use_spatial_pe);
  c.use_temporal_pe = j.value("use_temporal_pe", d.use_temporal_pe);
  c.n_layers = j.value("n_layers", d.n_layers);
  c.n_heads = j.value("n_heads", d.n_heads);
  c.ff_width = j.value("ff_width", d.ff_width);
  c.dropout = j.value("dropout", d.dropout);
  c.hand_model = j.value("hand_model", d.hand_model);
  c.procedural_vertices = j.value("procedural_vertices", d.procedural_vertices);
  c.clamp_camera = j.value("clamp_camera", d.clamp_camera);
  c.trans_bound = j.value("trans_bound", d.trans_bound);
  c.scale_max = j.value("scale_max", d.scale_max);
}

Backbone::Backbone(const ModelConfig& cfg_, const SkeletonLayout& layout_, RandomStream& rng)
    : cfg(cfg_),
      layout(layout_),
      embedder("embed", cfg_.embedding_config(), layout_, rng),
      encoder("encoder", cfg_.encoder_config(), rng) {}

Var Backbone::encode(Graph& g, const PoseSequence& seq, const nn::TrainContext& ctx) {
  return encoder.forward(g, embedder.forward(g, seq), ctx);
}

void Backbone::collect(std::vector<nn::Parameter*>& out) {
  embedder.collect(out);
  encoder.collect(out);
}

PretrainModel::PretrainModel(const ModelConfig& cfg_, const SkeletonLayout& layout, std::uint64_t init_seed)
    : PretrainModel(cfg_, layout, RandomStream(derive_seed(init_seed, "model-init"))) {}

PretrainModel::PretrainModel(const ModelConfig& cfg_, const SkeletonLayout& layout, RandomStream rng)
    : cfg(cfg_),
      backbone(cfg_, layout, rng),
      decoder("decoder", cfg_.d_model, resolve_hand_model(cfg_.hand_model, cfg_.procedural_vertices),
              cfg_.hand_decoder_config(), rng) {}

std::vector<nn::Parameter*> PretrainModel::parameters() {
  std::vector<nn::Parameter*> out;
  backbone.collect(out);
  decoder.collect(out);
  return out;
}

IslrModel::IslrModel(const ModelConfig& cfg_, const IslrConfig& head, const SkeletonLayout& layout,
                     std::uint64_t init_seed)
    : IslrModel(cfg_, head, layout, RandomStream(derive_seed(init_seed, "model-init"))) {}

IslrModel::IslrModel(const ModelConfig& cfg_, const IslrConfig& head, const SkeletonLayout& layout, RandomStream rng)
    : cfg(cfg_),
      head_cfg(head),
      backbone(cfg_, layout, rng),
      merge("islr.merge", cfg_.d_model, 1, rng),
      mlp_hidden("islr.mlp_hidden", cfg_.d_model, head.mlp_hidden > 0 ? head.mlp_hidden : cfg_.d_model, rng),
      mlp_out("islr.mlp_out", head.mlp_hidden > 0 ? head.mlp_hidden : cfg_.d_model, head.num_classes, rng) {
  if (head.num_classes < 2) throw std::invalid_argument("islr model: num_classes must be >= 2");
}

Var IslrModel::attention_merge(Graph& g, Var features) {
  // o = Softmax(F W + b) . F, softmax over the temporal axis
  Var logits = merge.forward(g, features);                                  // (T x 1)
  Var weights = g.rowwise_softmax(g.transpose(logits));                     // (1 x T)
  return g.matmul(weights, features);                                       // (1 x d)
}

Var IslrModel::logits(Graph& g, const PoseSequence& seq, const nn::TrainContext& ctx) {
  Var merged = attention_merge(g, backbone.encode(g, seq, ctx));
  return mlp_out.forward(g, g.relu(mlp_hidden.forward(g, merged)));
}

std::vector<nn::Parameter*> IslrModel::parameters() {
  std::vector<nn::Parameter*> out;
  backbone.collect(out);
  merge.collect(out);
  mlp_hidden.collect(out);
  mlp_out.collect(out);
  return out;
}

CslrModel::CslrModel(const ModelConfig& cfg_, const CslrConfig& head, const SkeletonLayout& layout,
                     std::uint64_t init_seed)
    : CslrModel(cfg_, head, layout, RandomStream(derive_seed(init_seed, "model-init"))) {}

CslrModel::CslrModel(const ModelConfig& cfg_, const CslrConfig& head, const SkeletonLayout& layout, RandomStream rng)
    : cfg(cfg_),
      head_cfg(head),
      backbone(cfg_, layout, rng),
      conv_pool("cslr.conv_pool", head.pool_window * cfg_.d_model, cfg_.d_model, rng),
      gloss_out("cslr.gloss_out", cfg_.d_model, head.vocab_size, rng) {
  if (head.vocab_size <= Vocabulary::kFirstToken) throw std::invalid_argument("cslr model: empty gloss vocabulary");
  if (head.pooling != "avg" && head.pooling != "conv") {
    throw std::invalid_argument("cslr model: pooling must be 'avg' or 'conv'");
  }
}

Var CslrModel::pooled_features(Graph& g, const PoseSequence& seq, const nn::TrainContext& ctx) {
  Var encoded = backbone.encode(g, seq, ctx);
  const int T = static_cast<int>(g.val(encoded).rows());
  const int w = head_cfg.pool_window;
  if (head_cfg.pooling == "avg") {
    return g.matmul(g.constant(avg_pool_matrix(T, w)), encoded);
  }
  // learned strided window map; the tail window repeats the last frame
  const int pooled = (T + w - 1) / w;
  std::vector<Var> rows;
  rows.reserve(static_cast<std::size_t>(pooled));
  for (int i = 0; i < pooled; ++i) {
    std::vector<Var> window;
    for (int k = 0; k < w; ++k) {
      int t = std::min(i * w + k, T - 1);
      window.push_back(g.slice_rows(encoded, t, 1));
    }
    rows.push_back(conv_pool.forward(g, g.concat_cols(window)));
  }
  return g.concat_rows(rows);
}

Var CslrModel::gloss_log_probs(Graph& g, const PoseSequence& seq, const nn::TrainContext& ctx) {
  return g.rowwise_log_softmax(gloss_out.forward(g, pooled_features(g, seq, ctx)));
}

std::vector<nn::Parameter*> CslrModel::parameters() {
  std::vector<nn::Parameter*> out;
  backbone.collect(out);
  if (head_cfg.pooling == "conv") conv_pool.collect(out);
  gloss_out.collect(out);
  return out;
}

SltModel::SltModel(const ModelConfig& cfg_, const SltConfig& head, const SkeletonLayout& layout,
                   std::uint64_t init_seed)
    : SltModel(cfg_, head, layout, RandomStream(derive_seed(init_seed, "model-init"))) {}

namespace {

nn::Mat embedding_init(int vocab, int d_model, RandomStream& rng) {
  nn::Mat m(vocab, d_model);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.normal(0.0, 0.02);
  return m;
}

nn::TransformerConfig sized(nn::TransformerConfig base, int layers) {
  base.n_layers = layers;
  return base;
}

}  // namespace

SltModel::SltModel(const ModelConfig& cfg_, const SltConfig& head, const SkeletonLayout& layout, RandomStream rng)
    : cfg(cfg_),
      head_cfg(head),
      backbone(cfg_, layout, rng),
      modulator("slt.modulator", sized(cfg_.encoder_config(), head.modulator_layers), rng),
      word_embedding("slt.word_embedding", embedding_init(head.vocab_size, cfg_.d_model, rng)),
      decoder("slt.decoder", sized(cfg_.encoder_config(), head.decoder_layers), rng, head.fused),
      out("slt.out", cfg_.d_model, head.vocab_size, rng),
      rgb_proj("slt.rgb_proj", head.fused ? head.rgb_feature_dim : 1, cfg_.d_model, rng) {
  if (head.vocab_size <= Vocabulary::kFirstToken) throw std::invalid_argument("slt model: empty word vocabulary");
  if (head.fused && head.rgb_feature_dim <= 0) {
    throw std::invalid_argument("slt model: fused decoding requires rgb_feature_dim");
  }
}

Var SltModel::memory(Graph& g, const PoseSequence& seq, const nn::TrainContext& ctx) {
  Var encoded = backbone.encode(g, seq, ctx);
  const int T = static_cast<int>(g.val(encoded).rows());
  Var pooled = g.matmul(g.constant(avg_pool_matrix(T, head_cfg.pool_window)), encoded);
  return modulator.forward(g, pooled, ctx);
}

Var SltModel::rgb_memory(Graph& g, const nn::Mat& rgb_features, const nn::TrainContext& ctx) {
  (void)ctx;
  if (!head_cfg.fused) throw std::invalid_argument("slt model: rgb_memory requires a fused model");
  if (rgb_features.cols() != head_cfg.rgb_feature_dim) {
    throw std::invalid_argument("slt model: rgb feature dimension mismatch");
  }
  const int T = static_cast<int>(rgb_features.rows());
  Var pooled = g.matmul(g.constant(avg_pool_matrix(T, head_cfg.pool_window)), g.constant(rgb_features));
  return rgb_proj.forward(g, pooled);
}

Var SltModel::decode_log_probs(Graph& g, Var mem, const std::vector<int>& input_ids, const nn::TrainContext& ctx,
                               std::optional<nn::Var> rgb_mem) {
  if (input_ids.empty() || input_ids.front() != Vocabulary::kBos) {
    throw std::invalid_argument("slt decode: target ids must start with [bos]");
  }
  Var emb = g.gather_rows(g.param(word_embedding), input_ids);
  emb = g.add(emb, g.constant(nn::sinusoidal_encoding(static_cast<int>(input_ids.size()), cfg.d_model)));
  nn::Mat mask = nn::causal_mask(static_cast<int>(input_ids.size()));
  Var hidden = decoder.forward(g, emb, mem, &mask, ctx, rgb_mem);
  return g.rowwise_log_softmax(out.forward(g, hidden));
}

std::vector<nn::Parameter*> SltModel::parameters() {
  std::vector<nn::Parameter*> out_params;
  backbone.collect(out_params);
  modulator.collect(out_params);
  out_params.push_back(&word_embedding);
  decoder.collect(out_params);
  out.collect(out_params);
  if (head_cfg.fused) rgb_proj.collect(out_params);
  return out_params;
}

void to_json(nlohmann::json& j, const IslrConfig& c) {
  j = nlohmann::json{{"num_classes", c.num_classes}, {"mlp_hidden", c.mlp_hidden}};
}

void from_json(const nlohmann::json& j, IslrConfig& c) {
  c.num_classes = j.at("num_classes").get<int>();
  c.mlp_hidden = j.value("mlp_hidden", 0);
}

void to_json(nlohmann::json& j, const CslrConfig& c) {
  j = nlohmann::json{{"vocab_size", c.vocab_size}, {"pool_window", c.pool_window}, {"pooling", c.pooling}};
}

void from_json(const nlohmann::json& j, CslrConfig& c) {
  c.vocab_size = j.at("vocab_size").get<int>();
  c.pool_window = j.value("pool_window", 4);
  c.pooling = j.value("pooling", std::string("avg"));
}

void to_json(nlohmann::json& j, const SltConfig& c) {
  j = nlohmann::json{{"vocab_size", c.vocab_size},     {"modulator_layers", c.modulator_layers},
                     {"decoder_layers", c.decoder_layers}, {"pool_window", c.pool_window},
                     {"max_len", c.max_len},           {"length_norm", c.length_norm},
                     {"fused", c.fused},               {"rgb_feature_dim", c.rgb_feature_dim}};
}

void from_json(const nlohmann::json& j, SltConfig& c) {
  c.vocab_size = j.at("vocab_size").get<int>();
  c.modulator_layers = j.value("modulator_layers", 2);
  c.decoder_layers = j.value("decoder_layers", 3);
  c.pool_window = j.value("pool_window", 4);
  c.max_len = j.value("max_len", 32);
  c.length_norm = j.value("length_norm", 0.6);
  c.fused = j.value("fused", false);
  c.rgb_feature_dim = j.value("rgb_feature_dim", 0);
}

Mat avg_pool_matrix(int frames, int window) {
  if (frames < 1 || window < 1) throw std::invalid_argument("avg_pool_matrix: frames and window must be >= 1");
  int pooled = (frames + window - 1) / window;
  Mat p = Mat::Zero(pooled, frames);
  for (int i = 0; i < pooled; ++i) {
    int begin = i * window;
    int end = std::min(frames, begin + window);
    for (int t = begin; t < end; ++t) p(i, t) = 1.0 / static_cast<double>(end - begin);
  }
  return p;
}

}  // namespace signpose
