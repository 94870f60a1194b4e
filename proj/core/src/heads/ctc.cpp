#include "signpose/heads/ctc.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace signpose {

using nn::Graph;
using nn::Mat;
using nn::Var;

namespace {

// blank-interleaved state labels: ^ a ^ b ^ ... ^
std::vector<int> extended_labels(const std::vector<int>& target, int blank) {
  std::vector<int> ext;
  ext.reserve(2 * target.size() + 1);
  ext.push_back(blank);
  for (int t : target) {
    ext.push_back(t);
    ext.push_back(blank);
  }
  return ext;
}

double logaddexp_d(double a, double b) {
  double m = std::max(a, b);
  if (m <= nn::neg_inf()) return nn::neg_inf();
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

}  // namespace

bool ctc_target_feasible(std::size_t steps, const std::vector<int>& target) {
  std::size_t needed = target.size();
  for (std::size_t i = 1; i < target.size(); ++i) {
    if (target[i] == target[i - 1]) ++needed;  // repeat requires a blank step
  }
  return needed <= steps;
}

Var ctc_loss(Graph& g, Var log_probs, const std::vector<int>& target, int blank) {
  const Mat& lp = g.val(log_probs);
  const int T = static_cast<int>(lp.rows());
  if (target.empty()) throw std::invalid_argument("ctc_loss: empty target");
  for (int t : target) {
    if (t == blank || t < 0 || t >= lp.cols()) {
      throw std::invalid_argument("ctc_loss: target label " + std::to_string(t) + " out of range");
    }
  }
  if (!ctc_target_feasible(static_cast<std::size_t>(T), target)) {
    throw std::invalid_argument("ctc_loss: target of length " + std::to_string(target.size()) +
                                " cannot align to " + std::to_string(T) + " steps (infinite loss)");
  }

  std::vector<int> ext = extended_labels(target, blank);
  const int S = static_cast<int>(ext.size());

  // skip-transition mask: state s may come from s-2 when its label is not
  // blank and differs from label s-2
  Mat skip_mask(1, S);
  for (int s = 0; s < S; ++s) {
    bool allowed = s >= 2 && ext[static_cast<std::size_t>(s)] != blank &&
                   ext[static_cast<std::size_t>(s)] != ext[static_cast<std::size_t>(s - 2)];
    skip_mask(0, s) = allowed ? 0.0 : nn::neg_inf();
  }

  Var neg = g.constant(Mat::Constant(1, 1, nn::neg_inf()));
  auto shift_right = [&](Var row, int by) {
    std::vector<Var> parts;
    for (int i = 0; i < by; ++i) parts.push_back(neg);
    parts.push_back(g.slice_cols(row, 0, S - by));
    return g.concat_cols(parts);
  };

  // alpha_0 = logp_0[ext] gated to states {0, 1}
  Mat init_mask(1, S);
  for (int s = 0; s < S; ++s) init_mask(0, s) = s <= 1 ? 0.0 : nn::neg_inf();
  Var alpha = g.add(g.gather_cols(g.slice_rows(log_probs, 0, 1), ext), g.constant(init_mask));

  for (int t = 1; t < T; ++t) {
    Var stay = alpha;
    Var step1 = shift_right(alpha, 1);
    Var step2 = g.add(shift_right(alpha, 2), g.constant(skip_mask));
    Var best = g.logaddexp(g.logaddexp(stay, step1), step2);
    alpha = g.add(best, g.gather_cols(g.slice_rows(log_probs, t, 1), ext));
  }

  Var total = g.logaddexp(g.slice_cols(alpha, S - 1, 1), g.slice_cols(alpha, S - 2, 1));
  return g.neg(total);
}

double ctc_neg_log_likelihood(const Mat& log_probs, const std::vector<int>& target, int blank) {
  Graph g;
  Var lp = g.constant(log_probs);
  return g.val(ctc_loss(g, lp, target, blank))(0, 0);
}

std::vector<int> ctc_collapse(const std::vector<int>& path, int blank) {
  std::vector<int> out;
  int prev = blank;
  for (int p : path) {
    if (p != blank && p != prev) out.push_back(p);
    prev = p;
  }
  return out;
}

std::vector<int> ctc_greedy_decode(const Mat& log_probs, int blank) {
  std::vector<int> path;
  path.reserve(static_cast<std::size_t>(log_probs.rows()));
  for (Eigen::Index t = 0; t < log_probs.rows(); ++t) {
    Eigen::Index best;
    log_probs.row(t).maxCoeff(&best);
    path.push_back(static_cast<int>(best));
  }
  return ctc_collapse(path, blank);
}

std::vector<int> ctc_beam_decode(const Mat& log_probs, int beam_width, int blank) {
  if (beam_width < 1) throw std::invalid_argument("ctc_beam_decode: beam width must be >= 1");
  if (beam_width == 1) return ctc_greedy_decode(log_probs, blank);

  // prefix beam search tracking blank / non-blank ending probabilities
  struct Scores {
    double p_blank = nn::neg_inf();
    double p_label = nn::neg_inf();
    double total() const { return logaddexp_d(p_blank, p_label); }
  };
  std::map<std::vector<int>, Scores> beams;
  beams[{}] = {0.0, nn::neg_inf()};

  const int V = static_cast<int>(log_probs.cols());
  for (Eigen::Index t = 0; t < log_probs.rows(); ++t) {
    std::map<std::vector<int>, Scores> next;
    for (const auto& [prefix, sc] : beams) {
      double p_total = sc.total();
      // emit blank: prefix unchanged
      {
        Scores& n = next[prefix];
        n.p_blank = logaddexp_d(n.p_blank, p_total + log_probs(t, blank));
      }
      for (int v = 0; v < V; ++v) {
        if (v == blank) continue;
        double lp = log_probs(t, v);
        if (!prefix.empty() && prefix.back() == v) {
          // same label: extends the run (prefix unchanged) from a label end,
          // or starts a new occurrence only after a blank
          Scores& same = next[prefix];
          same.p_label = logaddexp_d(same.p_label, sc.p_label + lp);
          std::vector<int> ext = prefix;
          ext.push_back(v);
          Scores& n = next[ext];
          n.p_label = logaddexp_d(n.p_label, sc.p_blank + lp);
        } else {
          std::vector<int> ext = prefix;
          ext.push_back(v);
          Scores& n = next[ext];
          n.p_label = logaddexp_d(n.p_label, p_total + lp);
        }
      }
    }
    // keep the top beam_width prefixes
    std::vector<std::pair<double, std::vector<int>>> ranked;
    ranked.reserve(next.size());
    for (auto& [prefix, sc] : next) ranked.emplace_back(sc.total(), prefix);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;  // deterministic tie-break
    });
    std::map<std::vector<int>, Scores> kept;
    for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(beam_width); ++i) {
      kept[ranked[i].second] = next[ranked[i].second];
    }
    beams = std::move(kept);
  }

  double best_score = nn::neg_inf();
  std::vector<int> best;
  for (const auto& [prefix, sc] : beams) {
    double s = sc.total();
    if (s > best_score) {
      best_score = s;
      best = prefix;
    }
  }
  return best;
}

}  // namespace signpose
