#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "signpose/common/random.hpp"

namespace signpose::nn {

using Mat = Eigen::MatrixXd;

// A named trainable tensor. Gradients are accumulated by Graph::backward via
// the graph's local store and merged into `grad` by flush_grads (or by the
// training loop's reducer when running multi-threaded).
struct Parameter {
  std::string name;
  Mat value;
  Mat grad;

  Parameter() = default;
  Parameter(std::string n, Mat v) : name(std::move(n)), value(std::move(v)) {
    grad = Mat::Zero(value.rows(), value.cols());
  }
  void zero_grad() { grad.setZero(); }
};

// Handle into a Graph's node arena.
struct Var {
  int i = -1;
  bool valid() const { return i >= 0; }
};

// Sentinel used instead of -inf in log-space dynamic programming so that
// exp(a-b) with two dead entries stays finite.
inline double neg_inf() { return -1e30; }

// Reverse-mode tape over dense double matrices. Nodes are appended in
// topological order; backward() walks the tape in reverse. One Graph per
// thread; parameter gradients land in the graph-local store and are merged
// by the caller.
class Graph {
 public:
  Graph() { nodes_.reserve(1024); }

  // ----- leaves -----
  Var constant(Mat v);                // no gradient tracking
  Var input(Mat v);                   // gradient-tracked leaf (for tests/inputs)
  Var param(Parameter& p);            // leaf bound to a Parameter

  // ----- arithmetic -----
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var neg(Var a);
  Var mul(Var a, Var b);              // elementwise
  Var scale(Var a, double s);
  Var add_scalar(Var a, double s);
  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var add_rowvec(Var a, Var b);       // a: (r x c), b: (1 x c) broadcast over rows
  Var scale_by(Var a, Var s);         // s: (1 x 1) scalar node

  // ----- reductions / shape -----
  Var sum(Var a);                     // -> (1 x 1)
  Var mean(Var a);                    // -> (1 x 1)
  Var colsum(Var a);                  // -> (1 x c)
  Var rowsum(Var a);                  // -> (r x 1)
  Var slice_rows(Var a, int r0, int n);
  Var slice_cols(Var a, int c0, int n);
  Var concat_rows(const std::vector<Var>& parts);
  Var concat_cols(const std::vector<Var>& parts);
  Var reshape(Var a, int rows, int cols);  // row-major element order
  Var gather_rows(Var a, std::vector<int> idx);
  Var gather_cols(Var a, std::vector<int> idx);
  Var gather_per_row(Var a, std::vector<int> col_of_row);  // -> (r x 1)
  // Per-group elementwise max over member rows; groups must be non-empty.
  Var rowgroup_max(Var a, const std::vector<std::vector<int>>& groups);

  // ----- elementwise nonlinearities -----
  Var relu(Var a);
  Var sigmoid(Var a);
  Var tanh_(Var a);
  Var softplus(Var a);
  Var abs_(Var a);
  Var square(Var a);
  Var exp_(Var a);
  Var log_(Var a);
  Var logaddexp(Var a, Var b);

  // ----- composite layers -----
  Var rowwise_softmax(Var a);
  Var rowwise_log_softmax(Var a);
  // Rowwise layer norm; gamma/beta are (1 x c).
  Var layer_norm(Var a, Var gamma, Var beta, double eps = 1e-5);
  // Inverted dropout; identity when !train or p == 0.
  Var dropout(Var a, double p, RandomStream& rng, bool train);

  // Axis-angle rows (J x 3) -> rotation matrices (J x 9, row-major R).
  Var rodrigues(Var a);

  // ----- execution -----
  const Mat& val(Var v) const { return nodes_[v.i].value; }
  // Gradient of the last backward() w.r.t. node v (zeros if untouched).
  Mat grad_of(Var v) const;
  // Backpropagate from a scalar (1 x 1) node.
  void backward(Var root);

  // Parameter gradients accumulated by the last backward() calls.
  const std::unordered_map<Parameter*, Mat>& param_grads() const { return param_grads_; }
  // Adds accumulated gradients into each Parameter::grad and clears the store.
  void flush_grads();

  std::size_t size() const { return nodes_.size(); }
  void clear();

 private:
  struct Node {
    Mat value;
    Mat grad;  // empty until touched by backward
    bool needs_grad = false;
    Parameter* bound = nullptr;
    std::function<void(Graph&, const Mat&)> back;  // receives this node's grad
  };

  int push(Mat value, bool needs_grad, std::function<void(Graph&, const Mat&)> back);
  void acc(int idx, const Mat& g);
  bool ng(Var v) const { return nodes_[v.i].needs_grad; }

  std::vector<Node> nodes_;
  std::unordered_map<Parameter*, int> param_nodes_;  // one leaf per Parameter
  std::unordered_map<Parameter*, Mat> param_grads_;
};

}  // namespace signpose::nn
