#pragma once

#include "signpose/metrics/metrics.hpp"
#include "signpose/model/models.hpp"
#include "signpose/train/loop.hpp"

namespace signpose {

struct SltFinetuneConfig {
  int epochs = 40;
  double lr = 5e-5;
  double warmup_frac = 0.1;
  double weight_decay = 0.01;
  int batch_size = 16;
  std::uint64_t seed = 42;
  int threads = 1;
  double train_frame_fraction = 0.8;
  double augment_strength = 1.0;
  int beam_width = 3;
};

void to_json(nlohmann::json& j, const SltFinetuneConfig& c);
void from_json(const nlohmann::json& j, SltFinetuneConfig& c);

// Teacher-forced sequence loss: -ln p(s | V) = sum of per-word
// cross-entropies over `words` + [eos]. rgb features enable cascaded fusion.
nn::Var slt_loss(nn::Graph& g, SltModel& model, const PoseSequence& seq, const std::vector<std::string>& words,
                 const Vocabulary& vocab, const nn::TrainContext& ctx, const nn::Mat* rgb_features = nullptr);

struct SltTrainResult {
  std::vector<double> epoch_losses;
  double final_nats_per_word = 0.0;
};

SltTrainResult finetune_slt(SltModel& model, const std::vector<SignSample>& train, const Vocabulary& vocab,
                            const SltFinetuneConfig& cfg, MetricLogger* logger,
                            const std::map<std::string, nn::Mat>* rgb_features = nullptr);

// Length-normalized beam search from [bos] until [eos] or max length.
std::vector<std::string> slt_beam_search(SltModel& model, const PoseSequence& seq, const Vocabulary& vocab,
                                         int beam_width, int max_len, const nn::Mat* rgb_features = nullptr);

// Teacher-forced mean nats/word over a split.
double slt_nats_per_word(SltModel& model, const std::vector<SignSample>& samples, const Vocabulary& vocab,
                         const std::map<std::string, nn::Mat>* rgb_features = nullptr);

// BLEU-1..4 and ROUGE-L F1 over a split.
metrics::MetricReport evaluate_slt(SltModel& model, const std::vector<SignSample>& samples, const Vocabulary& vocab,
                                   int beam_width, bool bleu_smooth = false,
                                   const std::map<std::string, nn::Mat>* rgb_features = nullptr);

}  // namespace signpose
