#include "signpose/train/pretrain.hpp"

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

#include "signpose/metrics/metrics.hpp"
#include "signpose/train/losses.hpp"

namespace signpose {

using nn::Graph;
using nn::Mat;
using nn::Var;

void to_json(nlohmann::json& j, const PretrainConfig& c) {
  j = nlohmann::json{{"model", c.model},
                     {"mask_ratio", c.mask.mask_ratio},
                     {"clip_span", c.mask.clip_span},
                     {"joints_per_token", c.mask.joints_per_token},
                     {"disturbance_scale", c.mask.disturbance_scale},
                     {"loss_on_identity", c.mask.loss_on_identity},
                     {"epsilon", c.epsilon},
                     {"lambda", c.lambda},
                     {"w_beta", c.w_beta},
                     {"w_delta", c.w_delta},
                     {"loss_mean_normalize", c.loss_mean_normalize},
                     {"epochs", c.epochs},
                     {"peak_lr", c.peak_lr},
                     {"warmup_frac", c.warmup_frac},
                     {"weight_decay", c.weight_decay},
                     {"batch_size", c.batch_size},
                     {"seed", c.seed},
                     {"max_frames", c.max_frames},
                     {"threads", c.threads},
                     {"val_fraction", c.val_fraction},
                     {"pck_threshold_frac", c.pck_threshold_frac}};
}

void from_json(const nlohmann::json& j, PretrainConfig& c) {
  PretrainConfig d;
  c.model = j.value("model", d.model);
  c.mask.mask_ratio = j.value("mask_ratio", d.mask.mask_ratio);
  c.mask.clip_span = j.value("clip_span", d.mask.clip_span);
  c.mask.joints_per_token = j.value("joints_per_token", d.mask.joints_per_token);
  c.mask.disturbance_scale = j.value("disturbance_scale", d.mask.disturbance_scale);
  c.mask.loss_on_identity = j.value("loss_on_identity", d.mask.loss_on_identity);
  c.epsilon = j.value("epsilon", d.epsilon);
  c.lambda = j.value("lambda", d.lambda);
  c.w_beta = j.value("w_beta", d.w_beta);
  c.w_delta = j.value("w_delta", d.w_delta);
  c.loss_mean_normalize = j.value("loss_mean_normalize", d.loss_mean_normalize);
  c.epochs = j.value("epochs", d.epochs);
  c.peak_lr = j.value("peak_lr", d.peak_lr);
  c.warmup_frac = j.value("warmup_frac", d.warmup_frac);
  c.weight_decay = j.value("weight_decay", d.weight_decay);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.seed = j.value("seed", d.seed);
  c.max_frames = j.value("max_frames", d.max_frames);
  c.threads = j.value("threads", d.threads);
  c.val_fraction = j.value("val_fraction", d.val_fraction);
  c.pck_threshold_frac = j.value("pck_threshold_frac", d.pck_threshold_frac);
}

namespace {

PoseSequence crop_to_cap(const PoseSequence& seq, int max_frames, RandomStream& rng) {
  if (max_frames <= 0 || static_cast<int>(seq.frames.size()) <= max_frames) return seq;
  std::size_t start = static_cast<std::size_t>(
      rng.uniform_index(seq.frames.size() - static_cast<std::size_t>(max_frames) + 1));
  PoseSequence out = seq;
  out.frames.assign(seq.frames.begin() + static_cast<std::ptrdiff_t>(start),
                    seq.frames.begin() + static_cast<std::ptrdiff_t>(start + static_cast<std::size_t>(max_frames)));
  return out;
}

Eigen::VectorXd hand_confidences(const PoseFrame& frame, HandSide side) {
  Eigen::VectorXd conf(kHandJoints);
  const auto& hand = frame.hand(side);
  for (int j = 0; j < kHandJoints; ++j) conf(j) = hand[static_cast<std::size_t>(j)].confidence;
  return conf;
}

Mat hand_coordinates(const PoseFrame& frame, HandSide side) {
  Mat m(kHandJoints, 2);
  const auto& hand = frame.hand(side);
  for (int j = 0; j < kHandJoints; ++j) {
    m(j, 0) = hand[static_cast<std::size_t>(j)].x;
    m(j, 1) = hand[static_cast<std::size_t>(j)].y;
  }
  return m;
}

}  // namespace

SampleLossParts pretrain_sample_loss(Graph& g, PretrainModel& model, const PoseSequence& seq,
                                     const PretrainConfig& cfg, RandomStream& rng, const nn::TrainContext& ctx) {
  PoseSequence capped = crop_to_cap(seq, cfg.max_frames, rng);
  const std::size_t T = capped.frames.size();

  MaskPlan plan = sample_mask_plan(T, cfg.mask, rng);
  PoseSequence corrupted = apply_mask_plan(capped, plan, cfg.mask, rng);

  Var tokens = model.backbone.encode(g, corrupted, ctx);
  Var params = model.decoder.regress(g, tokens);

  // reconstruction over target tokens only
  Var rec{};
  std::size_t n_targets = 0;
  std::size_t counted_joints = 0;
  for (std::size_t t = 0; t < T; ++t) {
    for (HandSide side : {HandSide::Left, HandSide::Right}) {
      if (!plan.is_target(t, side)) continue;
      ++n_targets;
      DecodedHandVars hand = model.decoder.decode_hand(g, params, static_cast<int>(t), side);
      Eigen::VectorXd conf = hand_confidences(capped.frames[t], side);
      for (Eigen::Index j = 0; j < conf.size(); ++j) counted_joints += conf(j) >= cfg.epsilon ? 1 : 0;
      Var term = reconstruction_loss_token(g, hand.joints2d, hand_coordinates(capped.frames[t], side), conf,
                                           cfg.epsilon);
      rec = rec.valid() ? g.add(rec, term) : term;
    }
  }
  if (!rec.valid()) rec = g.constant(Mat::Zero(1, 1));

  // regularizer over both hands, all frames
  Var theta_l = g.slice_cols(params, 0, kThetaDim);
  Var beta_l = g.slice_cols(params, kThetaDim, kBetaDim);
  Var theta_r = g.slice_cols(params, kHandParamDim, kThetaDim);
  Var beta_r = g.slice_cols(params, kHandParamDim + kThetaDim, kBetaDim);
  Var reg = g.add(regularization_loss(g, theta_l, beta_l, cfg.w_beta, cfg.w_delta),
                  regularization_loss(g, theta_r, beta_r, cfg.w_beta, cfg.w_delta));

  if (cfg.loss_mean_normalize) {
    rec = g.scale(rec, 1.0 / static_cast<double>(std::max<std::size_t>(1, counted_joints)));
    reg = g.scale(reg, 1.0 / static_cast<double>(T));
  }

  SampleLossParts parts;
  parts.rec_value = g.val(rec)(0, 0);
  parts.reg_value = g.val(reg)(0, 0);
  parts.target_tokens = n_targets;
  parts.total = g.add(rec, g.scale(reg, cfg.lambda));
  return parts;
}

ReconstructionEval evaluate_reconstruction(PretrainModel& model, const std::vector<PoseSequence>& seqs,
                                           const MaskConfig& mask_cfg, double pck_threshold, std::uint64_t seed) {
  std::vector<double> in_x, in_y, out_x, out_y, gt_x, gt_y;
  nn::TrainContext ctx{false, nullptr};
  for (std::size_t s = 0; s < seqs.size(); ++s) {
    const PoseSequence& seq = seqs[s];
    RandomStream rng(derive_seed(seed, "recon-eval", s));
    MaskPlan plan = sample_mask_plan(seq.frames.size(), mask_cfg, rng);
    CorruptionRecord record;
    PoseSequence corrupted = apply_mask_plan(seq, plan, mask_cfg, rng, &record);
    if (record.items.empty()) continue;

    Graph g;
    Var tokens = model.backbone.encode(g, corrupted, ctx);
    Var params = model.decoder.regress(g, tokens);

    std::set<std::pair<std::size_t, HandSide>> tokens_needed;
    for (const auto& item : record.items) tokens_needed.insert({item.frame, item.hand});
    std::map<std::pair<std::size_t, HandSide>, Mat> decoded;
    for (const auto& [frame, side] : tokens_needed) {
      DecodedHandVars hand = model.decoder.decode_hand(g, params, static_cast<int>(frame), side);
      decoded[{frame, side}] = g.val(hand.joints2d);
    }

    std::set<std::tuple<std::size_t, HandSide, int>> seen;
    for (const auto& item : record.items) {
      if (!seen.insert({item.frame, item.hand, item.joint}).second) continue;
      const Joint2D& gt = seq.frames[item.frame].hand(item.hand)[static_cast<std::size_t>(item.joint)];
      const Joint2D& corr = corrupted.frames[item.frame].hand(item.hand)[static_cast<std::size_t>(item.joint)];
      const Mat& rec = decoded[{item.frame, item.hand}];
      gt_x.push_back(gt.x);
      gt_y.push_back(gt.y);
      in_x.push_back(corr.x);
      in_y.push_back(corr.y);
      out_x.push_back(rec(item.joint, 0));
      out_y.push_back(rec(item.joint, 1));
    }
  }

  ReconstructionEval eval;
  eval.corrupted_joints = gt_x.size();
  if (gt_x.empty()) return eval;
  auto to_mat = [](const std::vector<double>& xs, const std::vector<double>& ys) {
    Mat m(static_cast<Eigen::Index>(xs.size()), 2);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      m(static_cast<Eigen::Index>(i), 0) = xs[i];
      m(static_cast<Eigen::Index>(i), 1) = ys[i];
    }
    return m;
  };
  Mat gt = to_mat(gt_x, gt_y);
  eval.input_pck = metrics::pck(to_mat(in_x, in_y), gt, pck_threshold);
  eval.output_pck = metrics::pck(to_mat(out_x, out_y), gt, pck_threshold);
  return eval;
}

PretrainResult pretrain(PretrainModel& model, const std::vector<PoseSequence>& corpus, const PretrainConfig& cfg,
                        MetricLogger* logger) {
  if (corpus.empty()) throw std::invalid_argument("pretrain: empty corpus");

  // deterministic train/validation split
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) order[i] = i;
  RandomStream split_rng(derive_seed(cfg.seed, "val-split"));
  split_rng.shuffle(order);
  std::size_t n_val = std::min(corpus.size() - 1,
                               static_cast<std::size_t>(std::llround(cfg.val_fraction * static_cast<double>(corpus.size()))));
  std::vector<PoseSequence> val_set;
  std::vector<const PoseSequence*> train_set;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i < n_val) {
      val_set.push_back(corpus[order[i]]);
    } else {
      train_set.push_back(&corpus[order[i]]);
    }
  }
  if (train_set.empty()) throw std::invalid_argument("pretrain: no training sequences after validation split");

  Adam optimizer(model.parameters(), AdamConfig{0.9, 0.999, 1e-8, cfg.weight_decay});
  const long long steps_per_epoch =
      static_cast<long long>((train_set.size() + static_cast<std::size_t>(cfg.batch_size) - 1) /
                             static_cast<std::size_t>(cfg.batch_size));
  WarmupLinearSchedule schedule{cfg.peak_lr, cfg.warmup_frac, steps_per_epoch * cfg.epochs};

  const double pck_threshold = cfg.pck_threshold_frac * std::sqrt(2.0);  // normalized-plane diagonal

  PretrainResult result;
  long long global_step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochConfig ecfg;
    ecfg.n_samples = train_set.size();
    ecfg.batch_size = cfg.batch_size;
    ecfg.threads = cfg.threads;
    ecfg.seed = cfg.seed;
    ecfg.epoch = epoch;
    EpochStats stats = run_epoch(
        ecfg,
        [&](Graph& g, std::size_t idx, RandomStream& rng, const nn::TrainContext& ctx) {
          return pretrain_sample_loss(g, model, *train_set[idx], cfg, rng, ctx).total;
        },
        optimizer, schedule, global_step);

    double val_pck = 0.0;
    if (!val_set.empty()) {
      val_pck = evaluate_reconstruction(model, val_set, cfg.mask, pck_threshold, derive_seed(cfg.seed, "val"))
                    .output_pck;
    }
    result.epoch_losses.push_back(stats.mean_loss);
    result.final_val_pck = val_pck;
    if (logger != nullptr) {
      logger->log({{"event", "epoch"},
                   {"epoch", epoch},
                   {"loss", stats.mean_loss},
                   {"lr", schedule.lr_at(global_step > 0 ? global_step - 1 : 0)},
                   {"val_pck", val_pck},
                   {"step", global_step}});
    }
  }
  result.steps = global_step;
  return result;
}

}  // namespace signpose
