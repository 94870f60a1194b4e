#pragma once

#include "signpose/metrics/metrics.hpp"
#include "signpose/model/models.hpp"
#include "signpose/train/loop.hpp"

namespace signpose {

// Late score fusion: argmax of the elementwise sum of two score vectors.
int late_fuse_scores(const Eigen::RowVectorXd& score_pose, const Eigen::RowVectorXd& score_rgb);

struct IslrFinetuneConfig {
  int epochs = 30;
  double lr = 1e-4;
  double warmup_frac = 0.1;
  double weight_decay = 0.01;
  int batch_size = 32;
  std::uint64_t seed = 42;
  int threads = 1;
  int frames = 32;                 // segment sampling target
  double augment_strength = 1.0;   // random moving augmentation during training
};

void to_json(nlohmann::json& j, const IslrFinetuneConfig& c);
void from_json(const nlohmann::json& j, IslrFinetuneConfig& c);

struct IslrTrainResult {
  std::vector<double> epoch_losses;
  double final_train_accuracy = 0.0;
};

// Cross-entropy fine-tuning; the backbone is fully unfrozen. Samples must
// carry labels and normalized poses.
IslrTrainResult finetune_islr(IslrModel& model, const std::vector<SignSample>& train, const IslrFinetuneConfig& cfg,
                              MetricLogger* logger);

// Class probabilities (softmax over logits) for one sequence; center-frame
// segment sampling at cfg.frames.
Eigen::RowVectorXd islr_probabilities(IslrModel& model, const PoseSequence& seq, int frames);

// Raw scores for every sample (N x classes), test-time center sampling.
nn::Mat islr_scores(IslrModel& model, const std::vector<SignSample>& samples, int frames);

// Top-1/Top-5 per-instance and per-class accuracy; optional per-sample RGB
// scores are late-fused by summation.
metrics::MetricReport evaluate_islr(IslrModel& model, const std::vector<SignSample>& samples, int frames,
                                    const nn::Mat* rgb_scores = nullptr);

}  // namespace signpose
