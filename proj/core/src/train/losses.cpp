#include "signpose/train/losses.hpp"

#include <stdexcept>

namespace signpose {

using nn::Graph;
using nn::Mat;
using nn::Var;

Var reconstruction_loss_token(Graph& g, Var pred, const Mat& target, const Eigen::VectorXd& conf, double epsilon) {
  const Mat& pv = g.val(pred);
  if (pv.rows() != target.rows() || pv.cols() != 2 || target.cols() != 2) {
    throw std::invalid_argument("reconstruction_loss: pred/target must both be (J x 2)");
  }
  if (conf.size() != pv.rows()) throw std::invalid_argument("reconstruction_loss: one confidence per joint required");
  Mat weights(pv.rows(), 2);
  for (Eigen::Index j = 0; j < pv.rows(); ++j) {
    double w = conf(j) >= epsilon ? conf(j) : 0.0;
    weights(j, 0) = w;
    weights(j, 1) = w;
  }
  Var diff = g.abs_(g.sub(pred, g.constant(target)));
  return g.sum(g.mul(diff, g.constant(std::move(weights))));
}

double reconstruction_loss_value(const Mat& pred, const Mat& target, const Eigen::VectorXd& conf, double epsilon) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < pred.rows(); ++j) {
    if (conf(j) < epsilon) continue;
    acc += conf(j) * ((pred.row(j) - target.row(j)).cwiseAbs().sum());
  }
  return acc;
}

Var regularization_loss(Graph& g, Var theta_seq, Var beta_seq, double w_beta, double w_delta) {
  if (g.val(theta_seq).rows() != g.val(beta_seq).rows()) {
    throw std::invalid_argument("regularization_loss: theta/beta sequences must be time-aligned");
  }
  const int T = static_cast<int>(g.val(theta_seq).rows());
  Var loss = g.sum(g.square(theta_seq));
  loss = g.add(loss, g.scale(g.sum(g.square(beta_seq)), w_beta));
  if (T > 1 && w_delta != 0.0) {
    Var diff = g.sub(g.slice_rows(beta_seq, 1, T - 1), g.slice_rows(beta_seq, 0, T - 1));
    loss = g.add(loss, g.scale(g.sum(g.square(diff)), w_delta));
  }
  return loss;
}

}  // namespace signpose
