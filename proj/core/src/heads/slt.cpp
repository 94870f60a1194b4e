#include "signpose/heads/slt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "signpose/pose/augment.hpp"
#include "signpose/pose/sampling.hpp"

namespace signpose {

using nn::Graph;
using nn::Mat;
using nn::Var;

void to_json(nlohmann::json& j, const SltFinetuneConfig& c) {
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

void from_json(const nlohmann::json& j, SltFinetuneConfig& c) {
  SltFinetuneConfig d;
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

namespace {

// [bos] w1 .. wn as decoder input; w1 .. wn [eos] as prediction targets
std::pair<std::vector<int>, std::vector<int>> teacher_forcing_ids(const std::vector<std::string>& words,
                                                                  const Vocabulary& vocab) {
  std::vector<int> input{Vocabulary::kBos};
  for (const std::string& w : words) input.push_back(vocab.id(w));
  std::vector<int> target(input.begin() + 1, input.end());
  target.push_back(Vocabulary::kEos);
  return {input, target};
}

}  // namespace

Var slt_loss(Graph& g, SltModel& model, const PoseSequence& seq, const std::vector<std::string>& words,
             const Vocabulary& vocab, const nn::TrainContext& ctx, const Mat* rgb_features) {
  if (words.empty()) throw std::invalid_argument("slt_loss: empty word sequence");
  auto [input_ids, target_ids] = teacher_forcing_ids(words, vocab);
  Var mem = model.memory(g, seq, ctx);
  std::optional<Var> rgb_mem;
  if (rgb_features != nullptr) rgb_mem = model.rgb_memory(g, *rgb_features, ctx);
  Var log_probs = model.decode_log_probs(g, mem, input_ids, ctx, rgb_mem);
  return g.neg(g.sum(g.gather_per_row(log_probs, target_ids)));
}

SltTrainResult finetune_slt(SltModel& model, const std::vector<SignSample>& train, const Vocabulary& vocab,
                            const SltFinetuneConfig& cfg, MetricLogger* logger,
                            const std::map<std::string, Mat>* rgb_features) {
  if (train.empty()) throw std::invalid_argument("finetune_slt: empty training set");
  for (const SignSample& s : train) {
    if (!s.translation.has_value() || s.translation->empty()) {
      throw std::invalid_argument("finetune_slt: every sample needs a translation");
    }
    if (model.head_cfg.fused &&
        (rgb_features == nullptr || rgb_features->find(s.poses.source_id) == rgb_features->end())) {
      throw std::invalid_argument("finetune_slt: fused model but no RGB features for '" + s.poses.source_id + "'");
    }
  }

  Adam optimizer(model.parameters(), AdamConfig{0.9, 0.999, 1e-8, cfg.weight_decay});
  const long long steps_per_epoch =
      static_cast<long long>((train.size() + static_cast<std::size_t>(cfg.batch_size) - 1) /
                             static_cast<std::size_t>(cfg.batch_size));
  WarmupLinearSchedule schedule{cfg.lr, cfg.warmup_frac, steps_per_epoch * cfg.epochs};

  SltTrainResult result;
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
          if (cfg.train_frame_fraction < 1.0 && seq.frames.size() > 4) {
            seq = temporal_sample(seq, SampleMode::FractionRandom, cfg.train_frame_fraction, rng);
          }
          if (cfg.augment_strength > 0.0) seq = random_moving_augment(seq, cfg.augment_strength, rng);
          const Mat* rgb = nullptr;
          if (model.head_cfg.fused) rgb = &rgb_features->at(sample.poses.source_id);
          return slt_loss(g, model, seq, *sample.translation, vocab, ctx, rgb);
        },
        optimizer, schedule, global_step);
    result.epoch_losses.push_back(stats.mean_loss);
    if (logger != nullptr) {
      logger->log({{"event", "epoch"}, {"task", "slt"}, {"epoch", epoch}, {"loss", stats.mean_loss}});
    }
  }
  result.final_nats_per_word = slt_nats_per_word(model, train, vocab, rgb_features);
  return result;
}

std::vector<std::string> slt_beam_search(SltModel& model, const PoseSequence& seq, const Vocabulary& vocab,
                                         int beam_width, int max_len, const Mat* rgb_features) {
  if (beam_width < 1) throw std::invalid_argument("slt_beam_search: beam width must be >= 1");
  nn::TrainContext ctx{false, nullptr};

  struct Hypothesis {
    std::vector<int> ids;  // starts with [bos]
    double log_prob = 0.0;
    bool finished = false;
  };
  auto normalized = [&](const Hypothesis& h) {
    std::size_t words = h.ids.size() - 1;  // exclude [bos]
    return h.log_prob / std::pow(static_cast<double>(std::max<std::size_t>(1, words)), model.head_cfg.length_norm);
  };

  std::vector<Hypothesis> beams{{{Vocabulary::kBos}, 0.0, false}};
  for (int step = 0; step < max_len; ++step) {
    bool all_done = true;
    for (const Hypothesis& h : beams) all_done = all_done && h.finished;
    if (all_done) break;

    std::vector<Hypothesis> candidates;
    for (const Hypothesis& h : beams) {
      if (h.finished) {
        candidates.push_back(h);
        continue;
      }
      Graph g;
      Var mem = model.memory(g, seq, ctx);
      std::optional<Var> rgb_mem;
      if (rgb_features != nullptr) rgb_mem = model.rgb_memory(g, *rgb_features, ctx);
      Var log_probs = model.decode_log_probs(g, mem, h.ids, ctx, rgb_mem);
      Eigen::RowVectorXd last = g.val(log_probs).row(g.val(log_probs).rows() - 1);
      // expand with the top beam_width continuations
      std::vector<int> idx(static_cast<std::size_t>(last.size()));
      for (int i = 0; i < last.size(); ++i) idx[static_cast<std::size_t>(i)] = i;
      std::partial_sort(idx.begin(), idx.begin() + std::min<std::ptrdiff_t>(beam_width, idx.size()), idx.end(),
                        [&](int a, int b) { return last(a) > last(b); });
      for (int k = 0; k < beam_width && k < static_cast<int>(idx.size()); ++k) {
        int token = idx[static_cast<std::size_t>(k)];
        if (token == Vocabulary::kPad || token == Vocabulary::kBos || token == Vocabulary::kBlank) continue;
        Hypothesis next = h;
        next.ids.push_back(token);
        next.log_prob += last(token);
        next.finished = token == Vocabulary::kEos;
        candidates.push_back(std::move(next));
      }
    }
    std::sort(candidates.begin(), candidates.end(), [&](const Hypothesis& a, const Hypothesis& b) {
      double na = normalized(a), nb = normalized(b);
      if (na != nb) return na > nb;
      return a.ids < b.ids;
    });
    if (candidates.size() > static_cast<std::size_t>(beam_width)) candidates.resize(static_cast<std::size_t>(beam_width));
    beams = std::move(candidates);
  }

  const Hypothesis* best = &beams.front();
  for (const Hypothesis& h : beams) {
    if (normalized(h) > normalized(*best)) best = &h;
  }
  std::vector<std::string> words;
  for (std::size_t i = 1; i < best->ids.size(); ++i) {
    if (best->ids[i] == Vocabulary::kEos) break;
    words.push_back(vocab.token(best->ids[i]));
  }
  return words;
}

double slt_nats_per_word(SltModel& model, const std::vector<SignSample>& samples, const Vocabulary& vocab,
                         const std::map<std::string, Mat>* rgb_features) {
  nn::TrainContext ctx{false, nullptr};
  double total = 0.0;
  long long words = 0;
  for (const SignSample& s : samples) {
    Graph g;
    const Mat* rgb = nullptr;
    if (model.head_cfg.fused) rgb = &rgb_features->at(s.poses.source_id);
    Var loss = slt_loss(g, model, s.poses, *s.translation, vocab, ctx, rgb);
    total += g.val(loss)(0, 0);
    words += static_cast<long long>(s.translation->size()) + 1;  // + [eos]
  }
  return total / static_cast<double>(words);
}

metrics::MetricReport evaluate_slt(SltModel& model, const std::vector<SignSample>& samples, const Vocabulary& vocab,
                                   int beam_width, bool bleu_smooth, const std::map<std::string, Mat>* rgb_features) {
  if (samples.empty()) throw std::invalid_argument("evaluate_slt: empty sample set");
  std::vector<std::vector<std::string>> hyps;
  std::vector<std::vector<std::vector<std::string>>> refs;
  double rouge_sum = 0.0;
  int exact = 0;
  for (const SignSample& s : samples) {
    if (!s.translation.has_value()) throw std::invalid_argument("evaluate_slt: every sample needs a translation");
    const Mat* rgb = nullptr;
    if (model.head_cfg.fused) rgb = &rgb_features->at(s.poses.source_id);
    std::vector<std::string> hyp =
        slt_beam_search(model, s.poses, vocab, beam_width, model.head_cfg.max_len, rgb);
    rouge_sum += metrics::rouge_l_f1(hyp, *s.translation);
    if (hyp == *s.translation) ++exact;
    hyps.push_back(std::move(hyp));
    refs.push_back({*s.translation});
  }
  metrics::MetricReport report;
  for (int n = 1; n <= 4; ++n) {
    report.add("bleu" + std::to_string(n), metrics::bleu(hyps, refs, n, bleu_smooth));
  }
  report.add("rouge_l_f1", rouge_sum / static_cast<double>(samples.size()));
  report.add("exact_match_rate", static_cast<double>(exact) / static_cast<double>(samples.size()));
  report.extra["unit"] = "bleu/rouge in [0,1]";
  return report;
}

}  // namespace signpose
