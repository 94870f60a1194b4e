#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "signpose/train/adam.hpp"

namespace signpose {

// Appends line-delimited JSON records to a metric log.
class MetricLogger {
 public:
  MetricLogger() = default;
  explicit MetricLogger(std::filesystem::path path) : path_(std::move(path)) {}
  void log(const nlohmann::json& record);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Builds the loss graph for one sample; `rng` is the sample's derived stream
// (drives corruption, sampling and dropout in a fixed order, so results do
// not depend on the thread count).
using SampleLossFn =
    std::function<nn::Var(nn::Graph& g, std::size_t sample_index, RandomStream& rng, const nn::TrainContext& ctx)>;

struct EpochConfig {
  std::size_t n_samples = 0;
  int batch_size = 32;
  int threads = 1;
  std::uint64_t seed = 42;
  int epoch = 0;
  bool shuffle = true;
  // divide accumulated gradients by the batch size before the optimizer step
  bool mean_over_batch = true;
};

struct EpochStats {
  double mean_loss = 0.0;
  double first_batch_loss = 0.0;
  long long steps = 0;
};

// One epoch of gradient-accumulation training. Gradients are reduced in
// deterministic chunk order (bitwise reproducible for a fixed thread count;
// single-threaded runs are bitwise reproducible unconditionally). Throws on
// non-finite loss.
EpochStats run_epoch(const EpochConfig& cfg, const SampleLossFn& loss_fn, Adam& optimizer,
                     const WarmupLinearSchedule& schedule, long long& global_step);

}  // namespace signpose
