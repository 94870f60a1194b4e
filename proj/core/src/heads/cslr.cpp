#include "signpose/heads/cslr.hpp"

#include <stdexcept>

#include "signpose/pose/augment.hpp"
#include "signpose/pose/sampling.hpp"

namespace signpose {

using nn::Graph;
using nn::Mat;
using nn::Var;

void to_json(nlohmann::json& j, const CslrFinetuneConfig& c) {
  j = nlohmann::json{{"epochs", c.epochs},
                     {"lr", c.lr},
                     {"warmup_frac", c.warmup_frac},
                     {"weight_decay", c.weight_decay},
                     {"batch_size", c.batch_size},
                     {"seed", c.seed},
                     {"threads", c.threads},
                     {"train_frame_fraction", c.train_frame_fraction},
                     {"augment_strength", c.augment_strength},
                     {"beam_width", c.beam_width}};
}

void from_json(const nlohmann::json& j, CslrFinetuneConfig& c) {
  CslrFinetuneConfig d;
  c.epochs = j.value("epochs", d.epochs);
  c.lr = j.value("lr", d.lr);
  c.warmup_frac = j.value("warmup_frac", d.warmup_frac);
  c.weight_decay = j.value("weight_decay", d.weight_decay);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.seed = j.value("seed", d.seed);
  c.threads = j.value("threads", d.threads);
  c.train_frame_fraction = j.value("train_frame_fraction", d.train_frame_fraction);
  c.augment_strength = j.value("augment_strength", d.augment_strength);
  c.beam_width = j.value("beam_width", d.beam_width);
}

CslrTrainResult finetune_cslr(CslrModel& model, const std::vector<SignSample>& train, const Vocabulary& vocab,
                              const CslrFinetuneConfig& cfg, MetricLogger* logger) {
  if (train.empty()) throw std::invalid_argument("finetune_cslr: empty training set");
  std::vector<std::vector<int>> targets;
  targets.reserve(train.size());
  for (const SignSample& s : train) {
    if (!s.glosses.has_value() || s.glosses->empty()) {
      throw std::invalid_argument("finetune_cslr: every sample needs a gloss sequence");
    }
    targets.push_back(vocab.encode(*s.glosses));
  }

  Adam optimizer(model.parameters(), AdamConfig{0.9, 0.999, 1e-8, cfg.weight_decay});
  const long long steps_per_epoch =
      static_cast<long long>((train.size() + static_cast<std::size_t>(cfg.batch_size) - 1) /
                             static_cast<std::size_t>(cfg.batch_size));
  WarmupLinearSchedule schedule{cfg.lr, cfg.warmup_frac, steps_per_epoch * cfg.epochs};

  CslrTrainResult result;
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
          PoseSequence seq = sample.poses;
          // keep a random frame subset, but never drop below CTC feasibility
          if (cfg.train_frame_fraction < 1.0) {
            PoseSequence sub = temporal_sample(seq, SampleMode::FractionRandom, cfg.train_frame_fraction, rng);
            std::size_t pooled = (sub.frames.size() + static_cast<std::size_t>(model.head_cfg.pool_window) - 1) /
                                 static_cast<std::size_t>(model.head_cfg.pool_window);
            if (ctc_target_feasible(pooled, targets[idx])) seq = std::move(sub);
          }
          if (cfg.augment_strength > 0.0) seq = random_moving_augment(seq, cfg.augment_strength, rng);
          Var log_probs = model.gloss_log_probs(g, seq, ctx);
          return ctc_loss(g, log_probs, targets[idx], Vocabulary::kBlank);
        },
        optimizer, schedule, global_step);
    result.epoch_losses.push_back(stats.mean_loss);
    if (logger != nullptr) {
      logger->log({{"event", "epoch"}, {"task", "cslr"}, {"epoch", epoch}, {"loss", stats.mean_loss}});
    }
  }
  return result;
}

std::vector<std::string> cslr_decode(CslrModel& model, const PoseSequence& seq, const Vocabulary& vocab,
                                     int beam_width) {
  Graph g;
  nn::TrainContext ctx{false, nullptr};
  Mat log_probs = g.val(model.gloss_log_probs(g, seq, ctx));
  return vocab.decode(ctc_beam_decode(log_probs, beam_width, Vocabulary::kBlank));
}

metrics::MetricReport evaluate_cslr(CslrModel& model, const std::vector<SignSample>& samples, const Vocabulary& vocab,
                                    int beam_width) {
  if (samples.empty()) throw std::invalid_argument("evaluate_cslr: empty sample set");
  long long edits = 0, ref_len = 0, subs = 0, dels = 0, inss = 0;
  for (const SignSample& s : samples) {
    if (!s.glosses.has_value() || s.glosses->empty()) {
      throw std::invalid_argument("evaluate_cslr: every sample needs a gloss sequence");
    }
    std::vector<std::string> hyp = cslr_decode(model, s.poses, vocab, beam_width);
    metrics::WerResult w = metrics::wer(hyp, *s.glosses);
    edits += w.edits();
    subs += w.substitutions;
    dels += w.deletions;
    inss += w.insertions;
    ref_len += static_cast<long long>(w.ref_len);
  }
  metrics::MetricReport report;
  report.add("wer", 100.0 * static_cast<double>(edits) / static_cast<double>(ref_len));
  report.add("substitutions", static_cast<double>(subs));
  report.add("deletions", static_cast<double>(dels));
  report.add("insertions", static_cast<double>(inss));
  report.add("reference_length", static_cast<double>(ref_len));
  report.extra["unit"] = "wer percent; counts absolute";
  return report;
}

LstmCell::LstmCell(const std::string& name, int in, int hidden_, RandomStream& rng)
    : x2g(name + ".x2g", in, 4 * hidden_, rng), h2g(name + ".h2g", hidden_, 4 * hidden_, rng, /*bias=*/false),
      hidden(hidden_) {}

std::pair<Var, Var> LstmCell::step(Graph& g, Var x, Var h, Var c) {
  Var gates = g.add(x2g.forward(g, x), h2g.forward(g, h));
  Var i = g.sigmoid(g.slice_cols(gates, 0, hidden));
  Var f = g.sigmoid(g.slice_cols(gates, hidden, hidden));
  Var o = g.sigmoid(g.slice_cols(gates, 2 * hidden, hidden));
  Var u = g.tanh_(g.slice_cols(gates, 3 * hidden, hidden));
  Var c_new = g.add(g.mul(f, c), g.mul(i, u));
  Var h_new = g.mul(o, g.tanh_(c_new));
  return {h_new, c_new};
}

void LstmCell::collect(std::vector<nn::Parameter*>& out) {
  x2g.collect(out);
  h2g.collect(out);
}

void to_json(nlohmann::json& j, const CslrFusionConfig& c) {
  j = nlohmann::json{{"pose_dim", c.pose_dim},
                     {"rgb_dim", c.rgb_dim},
                     {"hidden", c.hidden},
                     {"vocab_size", c.vocab_size},
                     {"pool_window", c.pool_window}};
}

void from_json(const nlohmann::json& j, CslrFusionConfig& c) {
  c.pose_dim = j.at("pose_dim").get<int>();
  c.rgb_dim = j.at("rgb_dim").get<int>();
  c.hidden = j.value("hidden", 128);
  c.vocab_size = j.at("vocab_size").get<int>();
  c.pool_window = j.value("pool_window", 4);
}

namespace {

RandomStream fusion_rng(std::uint64_t seed) { return RandomStream(derive_seed(seed, "fusion-init")); }

}  // namespace

CslrFusionHead::CslrFusionHead(const CslrFusionConfig& cfg_, std::uint64_t init_seed) : cfg(cfg_) {
  RandomStream rng = fusion_rng(init_seed);
  forward_cell = LstmCell("fusion.fwd", cfg.pose_dim + cfg.rgb_dim, cfg.hidden, rng);
  backward_cell = LstmCell("fusion.bwd", cfg.pose_dim + cfg.rgb_dim, cfg.hidden, rng);
  out = nn::Linear("fusion.out", 2 * cfg.hidden, cfg.vocab_size, rng);
}

Var CslrFusionHead::gloss_log_probs(Graph& g, Var pose_feats, const Mat& rgb_feats) {
  const int S = static_cast<int>(g.val(pose_feats).rows());
  if (rgb_feats.rows() != S) {
    throw std::invalid_argument("cslr fusion: pose and RGB feature lengths differ (" + std::to_string(S) + " vs " +
                                std::to_string(rgb_feats.rows()) + ")");
  }
  if (rgb_feats.cols() != cfg.rgb_dim) throw std::invalid_argument("cslr fusion: RGB feature dimension mismatch");

  std::vector<Var> steps;
  steps.reserve(static_cast<std::size_t>(S));
  for (int t = 0; t < S; ++t) {
    steps.push_back(g.concat_cols({g.slice_rows(pose_feats, t, 1), g.constant(rgb_feats.row(t))}));
  }

  Mat zero = Mat::Zero(1, cfg.hidden);
  std::vector<Var> fwd(static_cast<std::size_t>(S)), bwd(static_cast<std::size_t>(S));
  Var h = g.constant(zero), c = g.constant(zero);
  for (int t = 0; t < S; ++t) {
    std::tie(h, c) = forward_cell.step(g, steps[static_cast<std::size_t>(t)], h, c);
    fwd[static_cast<std::size_t>(t)] = h;
  }
  h = g.constant(zero);
  c = g.constant(zero);
  for (int t = S - 1; t >= 0; --t) {
    std::tie(h, c) = backward_cell.step(g, steps[static_cast<std::size_t>(t)], h, c);
    bwd[static_cast<std::size_t>(t)] = h;
  }
  std::vector<Var> rows;
  rows.reserve(static_cast<std::size_t>(S));
  for (int t = 0; t < S; ++t) {
    rows.push_back(g.concat_cols({fwd[static_cast<std::size_t>(t)], bwd[static_cast<std::size_t>(t)]}));
  }
  return g.rowwise_log_softmax(out.forward(g, g.concat_rows(rows)));
}

std::vector<nn::Parameter*> CslrFusionHead::parameters() {
  std::vector<nn::Parameter*> params;
  forward_cell.collect(params);
  backward_cell.collect(params);
  out.collect(params);
  return params;
}

}  // namespace signpose
