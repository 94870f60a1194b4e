#pragma once

#include <json.hpp>

#include "signpose/graph/embedding.hpp"
#include "signpose/hand/decoder.hpp"
#include "signpose/nn/modules.hpp"
#include "signpose/pose/vocabulary.hpp"

namespace signpose {

// Flat model hyperparameter block; serialized into every checkpoint so a
// model can be rebuilt from its config.json alone.
struct ModelConfig {
  int d_model = 256;
  std::vector<int> hand_gcn_widths = {32, 64};
  std::vector<int> arm_gcn_widths = {32};
  std::string normalization_mode = "symmetric";  // or "as_printed"
  bool use_spatial_pe = true;
  bool use_temporal_pe = true;
  int n_layers = 3;
  int n_heads = 8;
  int ff_width = 0;  // 0 -> 4 * d_model
  double dropout = 0.1;
  std::string hand_model = "procedural";  // or "mano:<path>"
  int procedural_vertices = 200;
  bool clamp_camera = false;
  double trans_bound = 1.0;
  double scale_max = 1.0;

  EmbeddingConfig embedding_config() const;
  nn::TransformerConfig encoder_config() const;
  HandDecoderConfig hand_decoder_config() const;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

// Input embedding + Transformer encoder; shared by pretraining and all heads.
struct Backbone {
  ModelConfig cfg;
  SkeletonLayout layout;
  SequenceEmbedder embedder;
  nn::Encoder encoder;

  Backbone(const ModelConfig& cfg, const SkeletonLayout& layout, RandomStream& rng);
  nn::Var encode(nn::Graph& g, const PoseSequence& seq, const nn::TrainContext& ctx);
  void collect(std::vector<nn::Parameter*>& out);
};

struct PretrainModel {
  ModelConfig cfg;
  Backbone backbone;
  HandDecoder decoder;

  PretrainModel(const ModelConfig& cfg, const SkeletonLayout& layout, std::uint64_t init_seed);
  std::vector<nn::Parameter*> parameters();

 private:
  PretrainModel(const ModelConfig& cfg, const SkeletonLayout& layout, RandomStream rng);
};

// ----- isolated recognition -----

struct IslrConfig {
  int num_classes = 0;
  int mlp_hidden = 0;  // 0 -> d_model
};

void to_json(nlohmann::json& j, const IslrConfig& c);
void from_json(const nlohmann::json& j, IslrConfig& c);

struct IslrModel {
  ModelConfig cfg;
  IslrConfig head_cfg;
  Backbone backbone;
  nn::Linear merge;       // d_model -> 1 (temporal attention logits)
  nn::Linear mlp_hidden;  // d_model -> hidden
  nn::Linear mlp_out;     // hidden -> classes

  IslrModel(const ModelConfig& cfg, const IslrConfig& head, const SkeletonLayout& layout, std::uint64_t init_seed);
  // attention-merged feature (1 x d_model) from frame features (T x d_model)
  nn::Var attention_merge(nn::Graph& g, nn::Var features);
  // class logits from a pose sequence
  nn::Var logits(nn::Graph& g, const PoseSequence& seq, const nn::TrainContext& ctx);
  std::vector<nn::Parameter*> parameters();

 private:
  IslrModel(const ModelConfig& cfg, const IslrConfig& head, const SkeletonLayout& layout, RandomStream rng);
};

// ----- continuous recognition -----

struct CslrConfig {
  int vocab_size = 0;     // full Vocabulary size (blank at id 0)
  int pool_window = 4;
  std::string pooling = "avg";  // or "conv" (learned strided window map)
};

void to_json(nlohmann::json& j, const CslrConfig& c);
void from_json(const nlohmann::json& j, CslrConfig& c);

struct CslrModel {
  ModelConfig cfg;
  CslrConfig head_cfg;
  Backbone backbone;
  nn::Linear conv_pool;  // (window * d_model) -> d_model, used when pooling == "conv"
  nn::Linear gloss_out;  // d_model -> vocab_size

  CslrModel(const ModelConfig& cfg, const CslrConfig& head, const SkeletonLayout& layout, std::uint64_t init_seed);
  // pooled frame features (ceil(T/window) x d_model)
  nn::Var pooled_features(nn::Graph& g, const PoseSequence& seq, const nn::TrainContext& ctx);
  // per-step log-probabilities over vocab (ceil(T/4) x vocab)
  nn::Var gloss_log_probs(nn::Graph& g, const PoseSequence& seq, const nn::TrainContext& ctx);
  std::vector<nn::Parameter*> parameters();

 private:
  CslrModel(const ModelConfig& cfg, const CslrConfig& head, const SkeletonLayout& layout, RandomStream rng);
};

// ----- translation -----

struct SltConfig {
  int vocab_size = 0;
  int modulator_layers = 2;
  int decoder_layers = 3;
  int pool_window = 4;
  int max_len = 32;
  double length_norm = 0.6;
  bool fused = false;      // cascaded cross-attention against an RGB memory
  int rgb_feature_dim = 0; // required when fused
};

void to_json(nlohmann::json& j, const SltConfig& c);
void from_json(const nlohmann::json& j, SltConfig& c);

struct SltModel {
  ModelConfig cfg;
  SltConfig head_cfg;
  Backbone backbone;
  nn::Encoder modulator;
  nn::Parameter word_embedding;  // vocab x d_model
  nn::Decoder decoder;
  nn::Linear out;                // d_model -> vocab
  nn::Linear rgb_proj;           // rgb_feature_dim -> d_model (fused only)

  SltModel(const ModelConfig& cfg, const SltConfig& head, const SkeletonLayout& layout, std::uint64_t init_seed);
  // semantic memory M (ceil(T/4) x d_model)
  nn::Var memory(nn::Graph& g, const PoseSequence& seq, const nn::TrainContext& ctx);
  // pooled + projected RGB memory (fused decoding)
  nn::Var rgb_memory(nn::Graph& g, const nn::Mat& rgb_features, const nn::TrainContext& ctx);
  // teacher-forced per-position log-probs over the vocab; input ids start
  // with [bos]
  nn::Var decode_log_probs(nn::Graph& g, nn::Var mem, const std::vector<int>& input_ids, const nn::TrainContext& ctx,
                           std::optional<nn::Var> rgb_mem = std::nullopt);
  std::vector<nn::Parameter*> parameters();

 private:
  SltModel(const ModelConfig& cfg, const SltConfig& head, const SkeletonLayout& layout, RandomStream rng);
};

// Average-pooling matrix (ceil(T/window) x T); tail window averages the
// remaining frames.
nn::Mat avg_pool_matrix(int frames, int window);

}  // namespace signpose
