#pragma once

#include <map>

#include "signpose/heads/ctc.hpp"
#include "signpose/metrics/metrics.hpp"
#include "signpose/model/models.hpp"
#include "signpose/train/loop.hpp"

namespace signpose {

struct CslrFinetuneConfig {
  int epochs = 30;
  double lr = 1e-4;
  double warmup_frac = 0.1;
  double weight_decay = 0.01;
  int batch_size = 16;
  std::uint64_t seed = 42;
  int threads = 1;
  double train_frame_fraction = 0.8;  // random frame subset during training
  double augment_strength = 1.0;
  int beam_width = 10;
};

void to_json(nlohmann::json& j, const CslrFinetuneConfig& c);
void from_json(const nlohmann::json& j, CslrFinetuneConfig& c);

struct CslrTrainResult {
  std::vector<double> epoch_losses;
};

// CTC fine-tuning over gloss sequences. Samples need glosses; targets are
// encoded through `vocab` (blank = id 0).
CslrTrainResult finetune_cslr(CslrModel& model, const std::vector<SignSample>& train, const Vocabulary& vocab,
                              const CslrFinetuneConfig& cfg, MetricLogger* logger);

// Beam decode of one sequence (all frames) into gloss tokens.
std::vector<std::string> cslr_decode(CslrModel& model, const PoseSequence& seq, const Vocabulary& vocab,
                                     int beam_width);

// WER over a split, with operation counts.
metrics::MetricReport evaluate_cslr(CslrModel& model, const std::vector<SignSample>& samples, const Vocabulary& vocab,
                                    int beam_width);

// ----- concat fusion (pose + RGB features -> BLSTM -> CTC) -----

struct LstmCell {
  nn::Linear x2g;  // in -> 4H
  nn::Linear h2g;  // H -> 4H (no bias)
  int hidden = 0;

  LstmCell() = default;
  LstmCell(const std::string& name, int in, int hidden, RandomStream& rng);
  // returns (h', c'); all vectors are (1 x H)
  std::pair<nn::Var, nn::Var> step(nn::Graph& g, nn::Var x, nn::Var h, nn::Var c);
  void collect(std::vector<nn::Parameter*>& out);
};

struct CslrFusionConfig {
  int pose_dim = 0;  // pooled pose feature dim (d_model)
  int rgb_dim = 0;   // per-step RGB feature dim after pooling
  int hidden = 128;
  int vocab_size = 0;
  int pool_window = 4;
};

void to_json(nlohmann::json& j, const CslrFusionConfig& c);
void from_json(const nlohmann::json& j, CslrFusionConfig& c);

// Bidirectional recurrent head over concatenated pose/RGB feature steps.
struct CslrFusionHead {
  CslrFusionConfig cfg;
  LstmCell forward_cell, backward_cell;
  nn::Linear out;  // 2H -> vocab

  CslrFusionHead(const CslrFusionConfig& cfg, std::uint64_t init_seed);
  // pose_feats: (S x pose_dim) node; rgb_feats: (S x rgb_dim) constant rows.
  nn::Var gloss_log_probs(nn::Graph& g, nn::Var pose_feats, const nn::Mat& rgb_feats);
  std::vector<nn::Parameter*> parameters();
};

}  // namespace signpose
