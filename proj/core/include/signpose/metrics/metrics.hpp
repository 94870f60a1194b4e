#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace signpose::metrics {

using Mat = Eigen::MatrixXd;

// ----- keypoint reconstruction -----

// Percentage of keypoints whose Euclidean distance to ground truth is below
// `threshold` (same units as the coordinates). Returns percent in [0, 100].
double pck(const Mat& pred, const Mat& gt, double threshold);

// Mean PCK over an evenly spaced threshold grid (21 points by default).
double auc_pck(const Mat& pred, const Mat& gt, double lo = 20.0, double hi = 40.0, int points = 21);

// ----- classification -----

enum class AccuracyMode { PerInstance, PerClass };

struct AccuracyResult {
  double percent = 0.0;
  std::map<int, double> per_class_percent;  // filled in PerClass mode
  std::vector<int> excluded_classes;        // classes absent from the labels
};

// scores: (N x C); labels: N entries.
AccuracyResult topk_accuracy(const Mat& scores, const std::vector<int>& labels, int k, AccuracyMode mode);

// ----- sequence error -----

struct WerResult {
  double rate = 0.0;  // (ins + del + sub) / ref_len; may exceed 1
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
  std::size_t ref_len = 0;
  int edits() const { return substitutions + deletions + insertions; }
};

// Minimal-edit alignment by dynamic programming. Among minimal-cost
// alignments the operation counts are canonicalized by lexicographically
// minimizing (cost, insertions, deletions).
WerResult wer(const std::vector<std::string>& hypothesis, const std::vector<std::string>& reference);

// ----- translation -----

// Corpus-level BLEU-n in [0, 1]: clipped modified n-gram precision,
// geometric mean over orders 1..n, brevity penalty. `smooth` adds one to
// numerator and denominator of orders with zero matches.
double bleu(const std::vector<std::vector<std::string>>& hypotheses,
            const std::vector<std::vector<std::vector<std::string>>>& references, int n, bool smooth = false);

// Single-pair convenience overload.
double bleu(const std::vector<std::string>& hypothesis, const std::vector<std::string>& reference, int n,
            bool smooth = false);

// LCS-based F1 in [0, 1].
double rouge_l_f1(const std::vector<std::string>& hypothesis, const std::vector<std::string>& reference);

// ----- report -----

// Ordered named metrics plus free-form breakdowns, serialized as JSON and
// printable as a fixed-order summary table.
struct MetricReport {
  std::vector<std::pair<std::string, double>> scalars;
  nlohmann::json extra = nlohmann::json::object();

  void add(const std::string& name, double value) { scalars.emplace_back(name, value); }
  nlohmann::json to_json() const;
  static MetricReport from_json(const nlohmann::json& j);
  void print(std::ostream& os) const;
};

}  // namespace signpose::metrics
