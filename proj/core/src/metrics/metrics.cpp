#include "signpose/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <set>
#include <stdexcept>

namespace signpose::metrics {

double pck(const Mat& pred, const Mat& gt, double threshold) {
  if (pred.rows() == 0) throw std::invalid_argument("pck: empty joint set");
  if (pred.rows() != gt.rows() || pred.cols() != 2 || gt.cols() != 2) {
    throw std::invalid_argument("pck: pred/gt must both be (N x 2)");
  }
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < pred.rows(); ++i) {
    if ((pred.row(i) - gt.row(i)).norm() < threshold) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(pred.rows());
}

double auc_pck(const Mat& pred, const Mat& gt, double lo, double hi, int points) {
  if (points < 2) throw std::invalid_argument("auc_pck: need at least 2 grid points");
  double acc = 0.0;
  for (int i = 0; i < points; ++i) {
    double thr = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    acc += pck(pred, gt, thr);
  }
  return acc / static_cast<double>(points);
}

AccuracyResult topk_accuracy(const Mat& scores, const std::vector<int>& labels, int k, AccuracyMode mode) {
  if (scores.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw std::invalid_argument("topk_accuracy: one label per score row required");
  }
  if (k < 1) throw std::invalid_argument("topk_accuracy: k must be >= 1");
  const Eigen::Index n = scores.rows();
  const int classes = static_cast<int>(scores.cols());

  auto hit_at_k = [&](Eigen::Index row) {
    double own = scores(row, labels[static_cast<std::size_t>(row)]);
    int better = 0;
    for (int c = 0; c < classes; ++c) {
      if (c == labels[static_cast<std::size_t>(row)]) continue;
      if (scores(row, c) > own) ++better;
    }
    return better < k;
  };

  AccuracyResult out;
  if (mode == AccuracyMode::PerInstance) {
    Eigen::Index hits = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (hit_at_k(i)) ++hits;
    }
    out.percent = n > 0 ? 100.0 * static_cast<double>(hits) / static_cast<double>(n) : 0.0;
    return out;
  }

  std::map<int, std::pair<int, int>> per_class;  // class -> (hits, total)
  for (Eigen::Index i = 0; i < n; ++i) {
    auto& [hits, total] = per_class[labels[static_cast<std::size_t>(i)]];
    ++total;
    if (hit_at_k(i)) ++hits;
  }
  double sum = 0.0;
  for (auto& [cls, ht] : per_class) {
    double pct = 100.0 * static_cast<double>(ht.first) / static_cast<double>(ht.second);
    out.per_class_percent[cls] = pct;
    sum += pct;
  }
  for (int c = 0; c < classes; ++c) {
    if (per_class.find(c) == per_class.end()) out.excluded_classes.push_back(c);
  }
  out.percent = per_class.empty() ? 0.0 : sum / static_cast<double>(per_class.size());
  return out;
}

WerResult wer(const std::vector<std::string>& hypothesis, const std::vector<std::string>& reference) {
  if (reference.empty()) throw std::invalid_argument("wer: reference must be non-empty");
  const std::size_t H = hypothesis.size(), R = reference.size();

  struct Cell {
    int cost, ins, del;
    bool operator<(const Cell& o) const {
      if (cost != o.cost) return cost < o.cost;
      if (ins != o.ins) return ins < o.ins;
      return del < o.del;
    }
  };
  // dp[i][j]: best (cost, ins, del) aligning hyp[0..i) to ref[0..j)
  std::vector<std::vector<Cell>> dp(H + 1, std::vector<Cell>(R + 1));
  for (std::size_t i = 0; i <= H; ++i) dp[i][0] = {static_cast<int>(i), static_cast<int>(i), 0};
  for (std::size_t j = 0; j <= R; ++j) dp[0][j] = {static_cast<int>(j), 0, static_cast<int>(j)};
  for (std::size_t i = 1; i <= H; ++i) {
    for (std::size_t j = 1; j <= R; ++j) {
      bool match = hypothesis[i - 1] == reference[j - 1];
      Cell sub = dp[i - 1][j - 1];
      if (!match) sub.cost += 1;
      Cell ins = dp[i - 1][j];  // extra hypothesis word
      ins.cost += 1;
      ins.ins += 1;
      Cell del = dp[i][j - 1];  // missing reference word
      del.cost += 1;
      del.del += 1;
      dp[i][j] = std::min(sub, std::min(ins, del));
    }
  }
  const Cell& best = dp[H][R];
  WerResult out;
  out.insertions = best.ins;
  out.deletions = best.del;
  out.substitutions = best.cost - best.ins - best.del;
  out.ref_len = R;
  out.rate = static_cast<double>(best.cost) / static_cast<double>(R);
  return out;
}

namespace {

std::map<std::vector<std::string>, int> ngram_counts(const std::vector<std::string>& tokens, int order) {
  std::map<std::vector<std::string>, int> counts;
  if (static_cast<int>(tokens.size()) < order) return counts;
  for (std::size_t i = 0; i + static_cast<std::size_t>(order) <= tokens.size(); ++i) {
    counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                    tokens.begin() + static_cast<std::ptrdiff_t>(i) + order)]++;
  }
  return counts;
}

}  // namespace

double bleu(const std::vector<std::vector<std::string>>& hypotheses,
            const std::vector<std::vector<std::vector<std::string>>>& references, int n, bool smooth) {
  if (n < 1) throw std::invalid_argument("bleu: n must be >= 1");
  if (hypotheses.size() != references.size()) {
    throw std::invalid_argument("bleu: one reference set per hypothesis required");
  }
  bool any_nonempty = false;
  for (const auto& h : hypotheses) any_nonempty = any_nonempty || !h.empty();
  if (!any_nonempty) {
    std::cerr << "bleu: empty hypothesis corpus, score defined as 0\n";
    return 0.0;
  }

  std::vector<long long> matched(static_cast<std::size_t>(n), 0), total(static_cast<std::size_t>(n), 0);
  long long hyp_len = 0, ref_len = 0;
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    const auto& hyp = hypotheses[s];
    const auto& refs = references[s];
    if (refs.empty()) throw std::invalid_argument("bleu: each hypothesis needs at least one reference");
    hyp_len += static_cast<long long>(hyp.size());
    // closest reference length (ties -> shorter)
    long long best_ref = static_cast<long long>(refs[0].size());
    for (const auto& r : refs) {
      long long len = static_cast<long long>(r.size());
      if (std::llabs(len - static_cast<long long>(hyp.size())) <
              std::llabs(best_ref - static_cast<long long>(hyp.size())) ||
          (std::llabs(len - static_cast<long long>(hyp.size())) ==
               std::llabs(best_ref - static_cast<long long>(hyp.size())) &&
           len < best_ref)) {
        best_ref = len;
      }
    }
    ref_len += best_ref;
    for (int order = 1; order <= n; ++order) {
      auto hyp_counts = ngram_counts(hyp, order);
      std::map<std::vector<std::string>, int> max_ref;
      for (const auto& r : refs) {
        for (auto& [gram, c] : ngram_counts(r, order)) max_ref[gram] = std::max(max_ref[gram], c);
      }
      for (auto& [gram, c] : hyp_counts) {
        auto it = max_ref.find(gram);
        matched[static_cast<std::size_t>(order - 1)] += std::min(c, it == max_ref.end() ? 0 : it->second);
        total[static_cast<std::size_t>(order - 1)] += c;
      }
    }
  }

  double log_precision = 0.0;
  for (int order = 0; order < n; ++order) {
    double num = static_cast<double>(matched[static_cast<std::size_t>(order)]);
    double den = static_cast<double>(total[static_cast<std::size_t>(order)]);
    if (smooth && num == 0.0) {
      num += 1.0;
      den += 1.0;
    }
    if (num == 0.0 || den == 0.0) return 0.0;
    log_precision += std::log(num / den);
  }
  log_precision /= static_cast<double>(n);
  double bp = hyp_len >= ref_len ? 1.0
                                 : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
  return bp * std::exp(log_precision);
}

double bleu(const std::vector<std::string>& hypothesis, const std::vector<std::string>& reference, int n,
            bool smooth) {
  return bleu(std::vector<std::vector<std::string>>{hypothesis},
              std::vector<std::vector<std::vector<std::string>>>{{reference}}, n, smooth);
}

double rouge_l_f1(const std::vector<std::string>& hypothesis, const std::vector<std::string>& reference) {
  if (hypothesis.empty() && reference.empty()) {
    std::cerr << "rouge_l_f1: both sequences empty, score defined as 0\n";
    return 0.0;
  }
  if (hypothesis.empty() || reference.empty()) return 0.0;
  const std::size_t H = hypothesis.size(), R = reference.size();
  std::vector<std::vector<int>> lcs(H + 1, std::vector<int>(R + 1, 0));
  for (std::size_t i = 1; i <= H; ++i) {
    for (std::size_t j = 1; j <= R; ++j) {
      lcs[i][j] = hypothesis[i - 1] == reference[j - 1] ? lcs[i - 1][j - 1] + 1
                                                        : std::max(lcs[i - 1][j], lcs[i][j - 1]);
    }
  }
  double l = static_cast<double>(lcs[H][R]);
  if (l == 0.0) return 0.0;
  double precision = l / static_cast<double>(H);
  double recall = l / static_cast<double>(R);
  return 2.0 * precision * recall / (precision + recall);
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  nlohmann::json m = nlohmann::json::object();
  nlohmann::json order = nlohmann::json::array();
  for (const auto& [name, value] : scalars) {
    m[name] = value;
    order.push_back(name);
  }
  j["metrics"] = std::move(m);
  j["order"] = std::move(order);
  j["extra"] = extra;
  return j;
}

MetricReport MetricReport::from_json(const nlohmann::json& j) {
  MetricReport r;
  for (const auto& name : j.at("order")) {
    r.scalars.emplace_back(name.get<std::string>(), j.at("metrics").at(name.get<std::string>()).get<double>());
  }
  r.extra = j.value("extra", nlohmann::json::object());
  return r;
}

void MetricReport::print(std::ostream& os) const {
  std::size_t width = 8;
  for (const auto& [name, _] : scalars) width = std::max(width, name.size());
  for (const auto& [name, value] : scalars) {
    os << name;
    for (std::size_t i = name.size(); i < width + 2; ++i) os << ' ';
    os << value << "\n";
  }
}

}  // namespace signpose::metrics
