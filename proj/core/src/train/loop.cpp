#include "signpose/train/loop.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace signpose {

void MetricLogger::log(const nlohmann::json& record) {
  if (path_.empty()) return;
  std::ofstream out(path_, std::ios::app);
  if (!out) throw std::runtime_error("cannot append to metric log: " + path_.string());
  out << record.dump() << "\n";
}

EpochStats run_epoch(const EpochConfig& cfg, const SampleLossFn& loss_fn, Adam& optimizer,
                     const WarmupLinearSchedule& schedule, long long& global_step) {
  if (cfg.n_samples == 0) throw std::invalid_argument("run_epoch: no samples");
  std::vector<std::size_t> order(cfg.n_samples);
  for (std::size_t i = 0; i < cfg.n_samples; ++i) order[i] = i;
  if (cfg.shuffle) {
    RandomStream shuffle_rng(derive_seed(cfg.seed, "epoch-shuffle", static_cast<std::uint64_t>(cfg.epoch)));
    shuffle_rng.shuffle(order);
  }

  const int threads = std::max(1, cfg.threads);
  EpochStats stats;
  double loss_sum = 0.0;

  for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(cfg.batch_size)) {
    std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
    const std::size_t batch = end - begin;

    std::vector<nn::Graph> graphs(static_cast<std::size_t>(threads));
    std::vector<double> chunk_loss(static_cast<std::size_t>(threads), 0.0);
    std::vector<std::string> chunk_error(static_cast<std::size_t>(threads));

    auto work = [&](int worker) {
      // contiguous chunk per worker keeps the gradient reduction order fixed
      std::size_t per = (batch + static_cast<std::size_t>(threads) - 1) / static_cast<std::size_t>(threads);
      std::size_t lo = begin + static_cast<std::size_t>(worker) * per;
      std::size_t hi = std::min(end, lo + per);
      nn::Graph& g = graphs[static_cast<std::size_t>(worker)];
      for (std::size_t k = lo; k < hi; ++k) {
        std::size_t sample = order[k];
        RandomStream rng(derive_seed(cfg.seed, "sample",
                                     static_cast<std::uint64_t>(cfg.epoch) * cfg.n_samples + sample));
        nn::TrainContext ctx{true, &rng};
        g.clear();
        nn::Var loss = loss_fn(g, sample, rng, ctx);
        double value = g.val(loss)(0, 0);
        if (!std::isfinite(value)) {
          chunk_error[static_cast<std::size_t>(worker)] =
              "non-finite loss (" + std::to_string(value) + ") at sample " + std::to_string(sample) + ", epoch " +
              std::to_string(cfg.epoch);
          return;
        }
        chunk_loss[static_cast<std::size_t>(worker)] += value;
        g.backward(loss);
        // param grads stay in the graph store; flushed below in worker order
      }
    };

    if (threads == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(threads));
      for (int w = 0; w < threads; ++w) pool.emplace_back(work, w);
      for (auto& t : pool) t.join();
    }
    for (const std::string& err : chunk_error) {
      if (!err.empty()) throw std::runtime_error("training diverged: " + err);
    }
    for (int w = 0; w < threads; ++w) graphs[static_cast<std::size_t>(w)].flush_grads();

    double batch_loss = 0.0;
    for (double l : chunk_loss) batch_loss += l;
    if (cfg.mean_over_batch && batch > 0) {
      optimizer.scale_grads(1.0 / static_cast<double>(batch));
      batch_loss /= static_cast<double>(batch);
    }

    optimizer.step(schedule.lr_at(global_step));
    optimizer.zero_grad();
    ++global_step;
    ++stats.steps;
    if (stats.steps == 1) stats.first_batch_loss = batch_loss;
    loss_sum += batch_loss * (cfg.mean_over_batch ? static_cast<double>(batch) : 1.0);
  }

  stats.mean_loss = loss_sum / static_cast<double>(cfg.n_samples);
  return stats;
}

}  // namespace signpose
