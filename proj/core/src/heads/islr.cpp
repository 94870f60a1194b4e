#include "signpose/heads/islr.hpp"

#include <stdexcept>

#include "signpose/pose/augment.hpp"
#include "signpose/pose/sampling.hpp"

namespace signpose {

using nn::Graph;
using nn::Mat;
using nn::Var;

int late_fuse_scores(const Eigen::RowVectorXd& score_pose, const Eigen::RowVectorXd& score_rgb) {
  if (score_pose.size() != score_rgb.size()) {
    throw std::invalid_argument("late_fuse_scores: class dimensionality differs (" +
                                std::to_string(score_pose.size()) + " vs " + std::to_string(score_rgb.size()) + ")");
  }
  Eigen::Index best;
  (score_pose + score_rgb).maxCoeff(&best);
  return static_cast<int>(best);
}

void to_json(nlohmann::json& j, const IslrFinetuneConfig& c) {
  j = nlohmann::json{{"epochs", c.epochs},         {"lr", c.lr},
                     {"warmup_frac", c.warmup_frac}, {"weight_decay", c.weight_decay},
                     {"batch_size", c.batch_size},  {"seed", c.seed},
                     {"threads", c.threads},        {"frames", c.frames},
                     {"augment_strength", c.augment_strength}};
}

void from_json(const nlohmann::json& j, IslrFinetuneConfig& c) {
  IslrFinetuneConfig d;
  c.epochs = j.value("epochs", d.epochs);
  c.lr = j.value("lr", d.lr);
  c.warmup_frac = j.value("warmup_frac", d.warmup_frac);
  c.weight_decay = j.value("weight_decay", d.weight_decay);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.seed = j.value("seed", d.seed);
  c.threads = j.value("threads", d.threads);
  c.frames = j.value("frames", d.frames);
  c.augment_strength = j.value("augment_strength", d.augment_strength);
}

IslrTrainResult finetune_islr(IslrModel& model, const std::vector<SignSample>& train, const IslrFinetuneConfig& cfg,
                              MetricLogger* logger) {
  if (train.empty()) throw std::invalid_argument("finetune_islr: empty training set");
  for (const SignSample& s : train) {
    if (!s.label.has_value()) throw std::invalid_argument("finetune_islr: every sample needs a label");
    if (*s.label < 0 || *s.label >= model.head_cfg.num_classes) {
      throw std::invalid_argument("finetune_islr: label " + std::to_string(*s.label) + " out of range");
    }
  }

  Adam optimizer(model.parameters(), AdamConfig{0.9, 0.999, 1e-8, cfg.weight_decay});
  const long long steps_per_epoch =
      static_cast<long long>((train.size() + static_cast<std::size_t>(cfg.batch_size) - 1) /
                             static_cast<std::size_t>(cfg.batch_size));
  WarmupLinearSchedule schedule{cfg.lr, cfg.warmup_frac, steps_per_epoch * cfg.epochs};

  IslrTrainResult result;
  long long global_step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochConfig ecfg;
    ecfg.n_samples = train.size();
    ecfg.batch_size = cfg.batch_size;
    ecfg.threads = cfg.threads;
    ecfg.seed = cfg.seed;
    ecfg.epoch = epoch;
    EpochStats stats = run_epoch(
        ecfg,
        [&](Graph& g, std::size_t idx, RandomStream& rng, const nn::TrainContext& ctx) {
          const SignSample& sample = train[idx];
          PoseSequence seq = temporal_sample(sample.poses, SampleMode::SegmentRandom, cfg.frames, rng);
          if (cfg.augment_strength > 0.0) seq = random_moving_augment(seq, cfg.augment_strength, rng);
          Var lp = g.rowwise_log_softmax(model.logits(g, seq, ctx));
          return g.neg(g.gather_per_row(lp, {*sample.label}));
        },
        optimizer, schedule, global_step);
    result.epoch_losses.push_back(stats.mean_loss);
    if (logger != nullptr) {
      logger->log({{"event", "epoch"}, {"task", "islr"}, {"epoch", epoch}, {"loss", stats.mean_loss}});
    }
  }

  // training accuracy for quick feedback
  Mat scores = islr_scores(model, train, cfg.frames);
  std::vector<int> labels;
  labels.reserve(train.size());
  for (const SignSample& s : train) labels.push_back(*s.label);
  result.final_train_accuracy = metrics::topk_accuracy(scores, labels, 1, metrics::AccuracyMode::PerInstance).percent;
  return result;
}

Eigen::RowVectorXd islr_probabilities(IslrModel& model, const PoseSequence& seq, int frames) {
  RandomStream rng(0);  // center sampling draws nothing
  PoseSequence sampled = temporal_sample(seq, SampleMode::SegmentCenter, frames, rng);
  Graph g;
  nn::TrainContext ctx{false, nullptr};
  Var probs = g.rowwise_softmax(model.logits(g, sampled, ctx));
  return g.val(probs).row(0);
}

Mat islr_scores(IslrModel& model, const std::vector<SignSample>& samples, int frames) {
  Mat scores(static_cast<Eigen::Index>(samples.size()), model.head_cfg.num_classes);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    scores.row(static_cast<Eigen::Index>(i)) = islr_probabilities(model, samples[i].poses, frames);
  }
  return scores;
}

metrics::MetricReport evaluate_islr(IslrModel& model, const std::vector<SignSample>& samples, int frames,
                                    const Mat* rgb_scores) {
  if (samples.empty()) throw std::invalid_argument("evaluate_islr: empty sample set");
  Mat scores = islr_scores(model, samples, frames);
  if (rgb_scores != nullptr) {
    if (rgb_scores->rows() != scores.rows() || rgb_scores->cols() != scores.cols()) {
      throw std::invalid_argument("evaluate_islr: RGB score matrix shape mismatch");
    }
    scores += *rgb_scores;
  }
  std::vector<int> labels;
  labels.reserve(samples.size());
  for (const SignSample& s : samples) {
    if (!s.label.has_value()) throw std::invalid_argument("evaluate_islr: every sample needs a label");
    labels.push_back(*s.label);
  }

  metrics::MetricReport report;
  auto pi1 = metrics::topk_accuracy(scores, labels, 1, metrics::AccuracyMode::PerInstance);
  auto pc1 = metrics::topk_accuracy(scores, labels, 1, metrics::AccuracyMode::PerClass);
  auto pi5 = metrics::topk_accuracy(scores, labels, 5, metrics::AccuracyMode::PerInstance);
  auto pc5 = metrics::topk_accuracy(scores, labels, 5, metrics::AccuracyMode::PerClass);
  report.add("top1_per_instance", pi1.percent);
  report.add("top1_per_class", pc1.percent);
  report.add("top5_per_instance", pi5.percent);
  report.add("top5_per_class", pc5.percent);
  report.extra["unit"] = "percent";
  if (!pc1.excluded_classes.empty()) report.extra["classes_absent_from_split"] = pc1.excluded_classes;
  nlohmann::json per_class = nlohmann::json::object();
  for (auto& [cls, pct] : pc1.per_class_percent) per_class[std::to_string(cls)] = pct;
  report.extra["top1_per_class_breakdown"] = std::move(per_class);
  return report;
}

}  // namespace signpose
