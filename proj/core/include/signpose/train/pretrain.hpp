#pragma once

#include <memory>

#include "signpose/mask/mask.hpp"
#include "signpose/model/models.hpp"
#include "signpose/train/loop.hpp"

namespace signpose {

struct PretrainConfig {
  ModelConfig model;
  MaskConfig mask;
  double epsilon = 0.5;   // confidence filter threshold
  double lambda = 0.01;   // regularizer weight
  double w_beta = 10.0;
  double w_delta = 100.0;
  // divide L_rec by the counted-joint total and L_reg by the frame count
  // (per-sample mean instead of the plain sums)
  bool loss_mean_normalize = false;
  int epochs = 60;
  double peak_lr = 1e-4;
  double warmup_frac = 0.1;
  double weight_decay = 0.01;
  int batch_size = 32;
  std::uint64_t seed = 42;
  int max_frames = 512;  // hard cap; longer sequences get a random crop
  int threads = 1;
  double val_fraction = 0.05;
  double pck_threshold_frac = 0.05;  // of the normalized-plane diagonal
};

void to_json(nlohmann::json& j, const PretrainConfig& c);
void from_json(const nlohmann::json& j, PretrainConfig& c);

// Builds the pretraining loss for one (already normalized) sequence:
// L = L_rec + lambda * L_reg, reconstruction only over the plan's target
// tokens.
struct SampleLossParts {
  nn::Var total;
  double rec_value = 0.0;
  double reg_value = 0.0;
  std::size_t target_tokens = 0;
};
SampleLossParts pretrain_sample_loss(nn::Graph& g, PretrainModel& model, const PoseSequence& seq,
                                     const PretrainConfig& cfg, RandomStream& rng, const nn::TrainContext& ctx);

struct PretrainResult {
  double final_val_pck = 0.0;
  std::vector<double> epoch_losses;
  long long steps = 0;
};

// Full pretraining run over a normalized-pose corpus. The model is updated in
// place; per-epoch records go to the logger when given.
PretrainResult pretrain(PretrainModel& model, const std::vector<PoseSequence>& corpus, const PretrainConfig& cfg,
                        MetricLogger* logger);

// Masked-token reconstruction quality under a masking config: PCK (percent)
// over the corrupted joints for both the corrupted input and the decoded
// output against the ground truth.
struct ReconstructionEval {
  double input_pck = 0.0;
  double output_pck = 0.0;
  std::size_t corrupted_joints = 0;
};
ReconstructionEval evaluate_reconstruction(PretrainModel& model, const std::vector<PoseSequence>& seqs,
                                           const MaskConfig& mask_cfg, double pck_threshold, std::uint64_t seed);

}  // namespace signpose
