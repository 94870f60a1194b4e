#include "signpose/train/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace signpose {

Adam::Adam(std::vector<nn::Parameter*> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (nn::Parameter* p : params_) {
    m_.push_back(nn::Mat::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(nn::Mat::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::step(double lr) {
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, step_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, step_);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    nn::Parameter& p = *params_[i];
    nn::Mat g = p.grad;
    if (cfg_.weight_decay != 0.0) g += cfg_.weight_decay * p.value;
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    nn::Mat m_hat = m_[i] / bc1;
    nn::Mat v_hat = v_[i] / bc2;
    p.value -= lr * m_hat.cwiseQuotient((v_hat.cwiseSqrt().array() + cfg_.eps).matrix());
  }
}

void Adam::zero_grad() {
  for (nn::Parameter* p : params_) p->zero_grad();
}

void Adam::scale_grads(double factor) {
  for (nn::Parameter* p : params_) p->grad *= factor;
}

double WarmupLinearSchedule::lr_at(long long step) const {
  if (total_steps <= 0) throw std::invalid_argument("schedule: total_steps must be positive");
  long long warmup = std::max<long long>(1, static_cast<long long>(std::llround(warmup_frac * static_cast<double>(total_steps))));
  if (step < warmup) return peak * static_cast<double>(step) / static_cast<double>(warmup);
  if (step >= total_steps) return 0.0;
  return peak * static_cast<double>(total_steps - step) / static_cast<double>(total_steps - warmup);
}

}  // namespace signpose
