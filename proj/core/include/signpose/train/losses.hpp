#pragma once

#include "signpose/nn/graph.hpp"

namespace signpose {

// Confidence-filtered L1 reconstruction term for one token:
// sum_j 1(conf_j >= epsilon) * conf_j * ||pred_j - target_j||_1.
// pred: (J x 2) node; target: (J x 2); conf: per-joint confidence.
nn::Var reconstruction_loss_token(nn::Graph& g, nn::Var pred, const nn::Mat& target, const Eigen::VectorXd& conf,
                                  double epsilon);

// Plain (no-graph) version of the same sum, for evaluation and oracles.
double reconstruction_loss_value(const nn::Mat& pred, const nn::Mat& target, const Eigen::VectorXd& conf,
                                 double epsilon);

// Pose/shape regularizer over one hand's sequence:
// sum_t (||theta_t||^2 + w_beta ||beta_t||^2 + w_delta ||beta_t - beta_{t-1}||^2),
// the difference term starting at the second frame.
// theta_seq: (T x 25) node, beta_seq: (T x 10) node.
nn::Var regularization_loss(nn::Graph& g, nn::Var theta_seq, nn::Var beta_seq, double w_beta, double w_delta);

}  // namespace signpose
