#pragma once

#include <vector>

#include "signpose/nn/graph.hpp"

namespace signpose {

// Connectionist temporal classification over per-step log-probabilities
// (T x V, rows log-softmax normalized). Blank id is 0 by convention
// (Vocabulary::kBlank).

// Exact forward-algorithm negative log-likelihood -ln p(target | input),
// differentiable through the graph. Throws if the target cannot be aligned
// (after blank expansion) to the available steps.
nn::Var ctc_loss(nn::Graph& g, nn::Var log_probs, const std::vector<int>& target, int blank = 0);

// Plain (no-graph) forward algorithm on a value matrix.
double ctc_neg_log_likelihood(const nn::Mat& log_probs, const std::vector<int>& target, int blank = 0);

// Feasibility: len(target) + repeats must fit into T steps.
bool ctc_target_feasible(std::size_t steps, const std::vector<int>& target);

// Prefix beam search over collapsed label sequences; returns the highest
// probability collapsed sequence found.
std::vector<int> ctc_beam_decode(const nn::Mat& log_probs, int beam_width, int blank = 0);

// Best-path (greedy) decode collapsed by removing repeats then blanks.
std::vector<int> ctc_greedy_decode(const nn::Mat& log_probs, int blank = 0);

// Collapse an alignment path: remove repeats, then blanks.
std::vector<int> ctc_collapse(const std::vector<int>& path, int blank = 0);

}  // namespace signpose
