#pragma once

#include <vector>

#include "signpose/nn/graph.hpp"

namespace signpose {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // L2 added to the gradient
};

class Adam {
 public:
  Adam(std::vector<nn::Parameter*> params, AdamConfig cfg);

  // One update using each parameter's accumulated grad at learning rate `lr`.
  void step(double lr);
  void zero_grad();
  void scale_grads(double factor);
  int steps_taken() const { return step_; }
  const std::vector<nn::Parameter*>& parameters() const { return params_; }

 private:
  std::vector<nn::Parameter*> params_;
  AdamConfig cfg_;
  std::vector<nn::Mat> m_, v_;
  int step_ = 0;
};

// Linear warmup to the peak rate over the first `warmup_frac` of steps, then
// linear decay to zero at `total_steps`.
struct WarmupLinearSchedule {
  double peak = 1e-4;
  double warmup_frac = 0.1;
  long long total_steps = 1;

  double lr_at(long long step) const;
};

}  // namespace signpose
