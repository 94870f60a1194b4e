#include "signpose/nn/graph.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace signpose::nn {

namespace {

void check_same_shape(const Mat& a, const Mat& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + ")");
  }
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

}  // namespace

int Graph::push(Mat value, bool needs_grad, std::function<void(Graph&, const Mat&)> back) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  n.back = needs_grad ? std::move(back) : nullptr;
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

void Graph::acc(int idx, const Mat& g) {
  Node& n = nodes_[idx];
  if (!n.needs_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

Var Graph::constant(Mat v) { return {push(std::move(v), false, nullptr)}; }

Var Graph::input(Mat v) { return {push(std::move(v), true, nullptr)}; }

Var Graph::param(Parameter& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return {it->second};
  int idx = push(p.value, true, nullptr);
  nodes_[idx].bound = &p;
  param_nodes_.emplace(&p, idx);
  return {idx};
}

Var Graph::add(Var a, Var b) {
  check_same_shape(val(a), val(b), "add");
  Mat out = val(a) + val(b);
  int ai = a.i, bi = b.i;
  return {push(std::move(out), ng(a) || ng(b), [ai, bi](Graph& g, const Mat& gr) {
            g.acc(ai, gr);
            g.acc(bi, gr);
          })};
}

Var Graph::sub(Var a, Var b) {
  check_same_shape(val(a), val(b), "sub");
  Mat out = val(a) - val(b);
  int ai = a.i, bi = b.i;
  return {push(std::move(out), ng(a) || ng(b), [ai, bi](Graph& g, const Mat& gr) {
            g.acc(ai, gr);
            g.acc(bi, Mat(-gr));
          })};
}

Var Graph::neg(Var a) {
  int ai = a.i;
  return {push(Mat(-val(a)), ng(a), [ai](Graph& g, const Mat& gr) { g.acc(ai, Mat(-gr)); })};
}

Var Graph::mul(Var a, Var b) {
  check_same_shape(val(a), val(b), "mul");
  Mat out = val(a).cwiseProduct(val(b));
  int ai = a.i, bi = b.i;
  return {push(std::move(out), ng(a) || ng(b), [ai, bi](Graph& g, const Mat& gr) {
            g.acc(ai, Mat(gr.cwiseProduct(g.nodes_[bi].value)));
            g.acc(bi, Mat(gr.cwiseProduct(g.nodes_[ai].value)));
          })};
}

Var Graph::scale(Var a, double s) {
  int ai = a.i;
  return {push(Mat(val(a) * s), ng(a), [ai, s](Graph& g, const Mat& gr) { g.acc(ai, Mat(gr * s)); })};
}

Var Graph::add_scalar(Var a, double s) {
  int ai = a.i;
  return {push(Mat(val(a).array() + s), ng(a), [ai](Graph& g, const Mat& gr) { g.acc(ai, gr); })};
}

Var Graph::matmul(Var a, Var b) {
  if (val(a).cols() != val(b).rows()) {
    throw std::invalid_argument("matmul: inner dimensions differ (" + std::to_string(val(a).cols()) + " vs " +
                                std::to_string(val(b).rows()) + ")");
  }
  Mat out = val(a) * val(b);
  int ai = a.i, bi = b.i;
  return {push(std::move(out), ng(a) || ng(b), [ai, bi](Graph& g, const Mat& gr) {
            if (g.nodes_[ai].needs_grad) g.acc(ai, Mat(gr * g.nodes_[bi].value.transpose()));
            if (g.nodes_[bi].needs_grad) g.acc(bi, Mat(g.nodes_[ai].value.transpose() * gr));
          })};
}

Var Graph::transpose(Var a) {
  int ai = a.i;
  return {push(Mat(val(a).transpose()), ng(a), [ai](Graph& g, const Mat& gr) { g.acc(ai, Mat(gr.transpose())); })};
}

Var Graph::add_rowvec(Var a, Var b) {
  if (val(b).rows() != 1 || val(b).cols() != val(a).cols()) {
    throw std::invalid_argument("add_rowvec: b must be (1 x cols-of-a)");
  }
  Mat out = val(a).rowwise() + val(b).row(0);
  int ai = a.i, bi = b.i;
  return {push(std::move(out), ng(a) || ng(b), [ai, bi](Graph& g, const Mat& gr) {
            g.acc(ai, gr);
            g.acc(bi, Mat(gr.colwise().sum()));
          })};
}

Var Graph::scale_by(Var a, Var s) {
  if (val(s).rows() != 1 || val(s).cols() != 1) throw std::invalid_argument("scale_by: s must be 1x1");
  double sv = val(s)(0, 0);
  Mat out = val(a) * sv;
  int ai = a.i, si = s.i;
  return {push(std::move(out), ng(a) || ng(s), [ai, si, sv](Graph& g, const Mat& gr) {
            g.acc(ai, Mat(gr * sv));
            Mat gs(1, 1);
            gs(0, 0) = (gr.cwiseProduct(g.nodes_[ai].value)).sum();
            g.acc(si, gs);
          })};
}

Var Graph::sum(Var a) {
  Mat out(1, 1);
  out(0, 0) = val(a).sum();
  int ai = a.i;
  return {push(std::move(out), ng(a), [ai](Graph& g, const Mat& gr) {
            g.acc(ai, Mat(Mat::Constant(g.nodes_[ai].value.rows(), g.nodes_[ai].value.cols(), gr(0, 0))));
          })};
}

Var Graph::mean(Var a) {
  double n = static_cast<double>(val(a).size());
  Mat out(1, 1);
  out(0, 0) = val(a).sum() / n;
  int ai = a.i;
  return {push(std::move(out), ng(a), [ai, n](Graph& g, const Mat& gr) {
            g.acc(ai, Mat(Mat::Constant(g.nodes_[ai].value.rows(), g.nodes_[ai].value.cols(), gr(0, 0) / n)));
          })};
}

Var Graph::colsum(Var a) {
  Mat out = val(a).colwise().sum();
  int ai = a.i;
  return {push(std::move(out), ng(a), [ai](Graph& g, const Mat& gr) {
            g.acc(ai, Mat(gr.replicate(g.nodes_[ai].value.rows(), 1)));
          })};
}

Var Graph::rowsum(Var a) {
  Mat out = val(a).rowwise().sum();
  int ai = a.i;
  return {push(std::move(out), ng(a), [ai](Graph& g, const Mat& gr) {
            g.acc(ai, Mat(gr.replicate(1, g.nodes_[ai].value.cols())));
          })};
}

Var Graph::slice_rows(Var a, int r0, int n) {
  if (r0 < 0 || n < 0 || r0 + n > val(a).rows()) throw std::invalid_argument("slice_rows: out of range");
  Mat out = val(a).middleRows(r0, n);
  int ai = a.i;
  return {push(std::move(out), ng(a), [ai, r0, n](Graph& g, const Mat& gr) {
            Mat full = Mat::Zero(g.nodes_[ai].value.rows(), g.nodes_[ai].value.cols());
            full.middleRows(r0, n) = gr;
            g.acc(ai, full);
          })};
}

Var Graph::slice_cols(Var a, int c0, int n) {
  if (c0 < 0 || n < 0 || c0 + n > val(a).cols()) throw std::invalid_argument("slice_cols: out of range");
  Mat out = val(a).middleCols(c0, n);
  int ai = a.i;
  return {push(std::move(out), ng(a), [ai, c0, n](Graph& g, const Mat& gr) {
            Mat full = Mat::Zero(g.nodes_[ai].value.rows(), g.nodes_[ai].value.cols());
            full.middleCols(c0, n) = gr;
            g.acc(ai, full);
          })};
}

Var Graph::concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: empty");
  Eigen::Index cols = val(parts[0]).cols(), rows = 0;
  bool any_grad = false;
  for (Var p : parts) {
    if (val(p).cols() != cols) throw std::invalid_argument("concat_rows: column mismatch");
    rows += val(p).rows();
    any_grad = any_grad || ng(p);
  }
  Mat out(rows, cols);
  std::vector<int> idx;
  std::vector<int> offs;
  Eigen::Index r = 0;
  for (Var p : parts) {
    out.middleRows(r, val(p).rows()) = val(p);
    idx.push_back(p.i);
    offs.push_back(static_cast<int>(r));
    r += val(p).rows();
  }
  return {push(std::move(out), any_grad, [idx, offs](Graph& g, const Mat& gr) {
            for (std::size_t k = 0; k < idx.size(); ++k) {
              const Mat& v = g.nodes_[idx[k]].value;
              g.acc(idx[k], Mat(gr.middleRows(offs[k], v.rows())));
            }
          })};
}

Var Graph::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: empty");
  Eigen::Index rows = val(parts[0]).rows(), cols = 0;
  bool any_grad = false;
  for (Var p : parts) {
    if (val(p).rows() != rows) throw std::invalid_argument("concat_cols: row mismatch");
    cols += val(p).cols();
    any_grad = any_grad || ng(p);
  }
  Mat out(rows, cols);
  std::vector<int> idx;
  std::vector<int> offs;
  Eigen::Index c = 0;
  for (Var p : parts) {
    out.middleCols(c, val(p).cols()) = val(p);
    idx.push_back(p.i);
    offs.push_back(static_cast<int>(c));
    c += val(p).cols();
  }
  return {push(std::move(out), any_grad, [idx, offs](Graph& g, const Mat& gr) {
            for (std::size_t k = 0; k < idx.size(); ++k) {
              const Mat& v = g.nodes_[idx[k]].value;
              g.acc(idx[k], Mat(gr.middleCols(offs[k], v.cols())));
            }
          })};
}

Var Graph::reshape(Var a, int rows, int cols) {
  const Mat& v = val(a);
  if (rows * cols != v.size()) throw std::invalid_argument("reshape: size mismatch");
  // Row-major element order on both sides.
  Mat out(rows, cols);
  {
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < v.rows(); ++i)
      for (Eigen::Index j = 0; j < v.cols(); ++j, ++k) out(k / cols, k % cols) = v(i, j);
  }
  int ai = a.i;
  return {push(std::move(out), ng(a), [ai, cols](Graph& g, const Mat& gr) {
            const Mat& v0 = g.nodes_[ai].value;
            Mat ga(v0.rows(), v0.cols());
            Eigen::Index k = 0;
            for (Eigen::Index i = 0; i < v0.rows(); ++i)
              for (Eigen::Index j = 0; j < v0.cols(); ++j, ++k) ga(i, j) = gr(k / cols, k % cols);
            g.acc(ai, ga);
          })};
}

Var Graph::gather_rows(Var a, std::vector<int> idx) {
  const Mat& v = val(a);
  Mat out(static_cast<Eigen::Index>(idx.size()), v.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= v.rows()) throw std::invalid_argument("gather_rows: index out of range");
    out.row(static_cast<Eigen::Index>(k)) = v.row(idx[k]);
  }
  int ai = a.i;
  return {push(std::move(out), ng(a), [ai, idx = std::move(idx)](Graph& g, const Mat& gr) {
            Mat ga = Mat::Zero(g.nodes_[ai].value.rows(), g.nodes_[ai].value.cols());
            for (std::size_t k = 0; k < idx.size(); ++k) ga.row(idx[k]) += gr.row(static_cast<Eigen::Index>(k));
            g.acc(ai, ga);
          })};
}

Var Graph::gather_cols(Var a, std::vector<int> idx) {
  const Mat& v = val(a);
  Mat out(v.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= v.cols()) throw std::invalid_argument("gather_cols: index out of range");
    out.col(static_cast<Eigen::Index>(k)) = v.col(idx[k]);
  }
  int ai = a.i;
  return {push(std::move(out), ng(a), [ai, idx = std::move(idx)](Graph& g, const Mat& gr) {
            Mat ga = Mat::Zero(g.nodes_[ai].value.rows(), g.nodes_[ai].value.cols());
            for (std::size_t k = 0; k < idx.size(); ++k) ga.col(idx[k]) += gr.col(static_cast<Eigen::Index>(k));
            g.acc(ai, ga);
          })};
}

Var Graph::gather_per_row(Var a, std::vector<int> col_of_row) {
  const Mat& v = val(a);
  if (static_cast<Eigen::Index>(col_of_row.size()) != v.rows()) {
    throw std::invalid_argument("gather_per_row: one column index per row required");
  }
  Mat out(v.rows(), 1);
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    int c = col_of_row[static_cast<std::size_t>(r)];
    if (c < 0 || c >= v.cols()) throw std::invalid_argument("gather_per_row: index out of range");
    out(r, 0) = v(r, c);
  }
  int ai = a.i;
  return {push(std::move(out), ng(a), [ai, col_of_row = std::move(col_of_row)](Graph& g, const Mat& gr) {
            Mat ga = Mat::Zero(g.nodes_[ai].value.rows(), g.nodes_[ai].value.cols());
            for (Eigen::Index r = 0; r < ga.rows(); ++r) ga(r, col_of_row[static_cast<std::size_t>(r)]) += gr(r, 0);
            g.acc(ai, ga);
          })};
}

Var Graph::rowgroup_max(Var a, const std::vector<std::vector<int>>& groups) {
  const Mat& v = val(a);
  Mat out(static_cast<Eigen::Index>(groups.size()), v.cols());
  // argmax row per (group, col) for gradient routing
  std::vector<std::vector<int>> arg(groups.size(), std::vector<int>(static_cast<std::size_t>(v.cols())));
  for (std::size_t gidx = 0; gidx < groups.size(); ++gidx) {
    if (groups[gidx].empty()) throw std::invalid_argument("rowgroup_max: empty group");
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
      int best = groups[gidx][0];
      for (int r : groups[gidx]) {
        if (r < 0 || r >= v.rows()) throw std::invalid_argument("rowgroup_max: row index out of range");
        if (v(r, c) > v(best, c)) best = r;
      }
      out(static_cast<Eigen::Index>(gidx), c) = v(best, c);
      arg[gidx][static_cast<std::size_t>(c)] = best;
    }
  }
  int ai = a.i;
  return {push(std::move(out), ng(a), [ai, arg = std::move(arg)](Graph& g, const Mat& gr) {
            Mat ga = Mat::Zero(g.nodes_[ai].value.rows(), g.nodes_[ai].value.cols());
            for (std::size_t gidx = 0; gidx < arg.size(); ++gidx)
              for (Eigen::Index c = 0; c < ga.cols(); ++c)
                ga(arg[gidx][static_cast<std::size_t>(c)], c) += gr(static_cast<Eigen::Index>(gidx), c);
            g.acc(ai, ga);
          })};
}

Var Graph::relu(Var a) {
  Mat out = val(a).cwiseMax(0.0);
  int ai = a.i;
  return {push(std::move(out), ng(a), [ai](Graph& g, const Mat& gr) {
            const Mat& v = g.nodes_[ai].value;
            g.acc(ai, Mat(gr.cwiseProduct((v.array() > 0.0).cast<double>().matrix())));
          })};
}

Var Graph::sigmoid(Var a) {
  Mat out = (1.0 / (1.0 + (-val(a).array()).exp())).matrix();
  int ai = a.i;
  int oi = push(std::move(out), ng(a), nullptr);
  if (nodes_[oi].needs_grad) {
    nodes_[oi].back = [ai, oi](Graph& g, const Mat& gr) {
      const Mat& y = g.nodes_[oi].value;
      g.acc(ai, Mat(gr.cwiseProduct((y.array() * (1.0 - y.array())).matrix())));
    };
  }
  return {oi};
}

Var Graph::tanh_(Var a) {
  Mat out = val(a).array().tanh().matrix();
  int ai = a.i;
  int oi = push(std::move(out), ng(a), nullptr);
  if (nodes_[oi].needs_grad) {
    nodes_[oi].back = [ai, oi](Graph& g, const Mat& gr) {
      const Mat& y = g.nodes_[oi].value;
      g.acc(ai, Mat(gr.cwiseProduct((1.0 - y.array().square()).matrix())));
    };
  }
  return {oi};
}

Var Graph::softplus(Var a) {
  // log(1 + e^x) with overflow-safe form
  Mat out = val(a).unaryExpr([](double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); });
  int ai = a.i;
  return {push(std::move(out), ng(a), [ai](Graph& g, const Mat& gr) {
            const Mat& v = g.nodes_[ai].value;
            g.acc(ai, Mat(gr.cwiseProduct((1.0 / (1.0 + (-v.array()).exp())).matrix())));
          })};
}

Var Graph::abs_(Var a) {
  Mat out = val(a).cwiseAbs();
  int ai = a.i;
  return {push(std::move(out), ng(a), [ai](Graph& g, const Mat& gr) {
            const Mat& v = g.nodes_[ai].value;
            g.acc(ai, Mat(gr.cwiseProduct(v.unaryExpr([](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }))));
          })};
}

Var Graph::square(Var a) {
  Mat out = val(a).array().square().matrix();
  int ai = a.i;
  return {push(std::move(out), ng(a), [ai](Graph& g, const Mat& gr) {
            g.acc(ai, Mat(gr.cwiseProduct(2.0 * g.nodes_[ai].value)));
          })};
}

Var Graph::exp_(Var a) {
  Mat out = val(a).array().exp().matrix();
  int ai = a.i;
  int oi = push(std::move(out), ng(a), nullptr);
  if (nodes_[oi].needs_grad) {
    nodes_[oi].back = [ai, oi](Graph& g, const Mat& gr) {
      g.acc(ai, Mat(gr.cwiseProduct(g.nodes_[oi].value)));
    };
  }
  return {oi};
}

Var Graph::log_(Var a) {
  Mat out = val(a).array().log().matrix();
  int ai = a.i;
  return {push(std::move(out), ng(a), [ai](Graph& g, const Mat& gr) {
            g.acc(ai, Mat(gr.cwiseQuotient(g.nodes_[ai].value)));
          })};
}

Var Graph::logaddexp(Var a, Var b) {
  check_same_shape(val(a), val(b), "logaddexp");
  const Mat& va = val(a);
  const Mat& vb = val(b);
  Mat out(va.rows(), va.cols());
  for (Eigen::Index i = 0; i < va.size(); ++i) {
    double x = va(i), y = vb(i);
    double m = std::max(x, y);
    out(i) = m + std::log1p(std::exp(std::min(x, y) - m));
  }
  int ai = a.i, bi = b.i;
  int oi = push(std::move(out), ng(a) || ng(b), nullptr);
  if (nodes_[oi].needs_grad) {
    nodes_[oi].back = [ai, bi, oi](Graph& g, const Mat& gr) {
      const Mat& va2 = g.nodes_[ai].value;
      const Mat& vo = g.nodes_[oi].value;
      Mat wa = (va2 - vo).array().exp().matrix();
      g.acc(ai, Mat(gr.cwiseProduct(wa)));
      const Mat& vb2 = g.nodes_[bi].value;
      Mat wb = (vb2 - vo).array().exp().matrix();
      g.acc(bi, Mat(gr.cwiseProduct(wb)));
    };
  }
  return {oi};
}

Var Graph::rowwise_softmax(Var a) {
  const Mat& v = val(a);
  Mat out(v.rows(), v.cols());
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    double m = v.row(r).maxCoeff();
    Eigen::ArrayXd e = (v.row(r).array() - m).exp();
    out.row(r) = (e / e.sum()).matrix();
  }
  int ai = a.i;
  int oi = push(std::move(out), ng(a), nullptr);
  if (nodes_[oi].needs_grad) {
    nodes_[oi].back = [ai, oi](Graph& g, const Mat& gr) {
      const Mat& y = g.nodes_[oi].value;
      Mat ga(y.rows(), y.cols());
      for (Eigen::Index r = 0; r < y.rows(); ++r) {
        double dot = gr.row(r).dot(y.row(r));
        ga.row(r) = y.row(r).array() * (gr.row(r).array() - dot);
      }
      g.acc(ai, ga);
    };
  }
  return {oi};
}

Var Graph::rowwise_log_softmax(Var a) {
  const Mat& v = val(a);
  Mat out(v.rows(), v.cols());
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    double m = v.row(r).maxCoeff();
    double lse = m + std::log((v.row(r).array() - m).exp().sum());
    out.row(r) = v.row(r).array() - lse;
  }
  int ai = a.i;
  int oi = push(std::move(out), ng(a), nullptr);
  if (nodes_[oi].needs_grad) {
    nodes_[oi].back = [ai, oi](Graph& g, const Mat& gr) {
      const Mat& y = g.nodes_[oi].value;  // log-softmax
      Mat ga(y.rows(), y.cols());
      for (Eigen::Index r = 0; r < y.rows(); ++r) {
        double gsum = gr.row(r).sum();
        ga.row(r) = gr.row(r) - (y.row(r).array().exp() * gsum).matrix();
      }
      g.acc(ai, ga);
    };
  }
  return {oi};
}

Var Graph::layer_norm(Var a, Var gamma, Var beta, double eps) {
  const Mat& v = val(a);
  const Mat& gm = val(gamma);
  const Mat& bt = val(beta);
  if (gm.rows() != 1 || bt.rows() != 1 || gm.cols() != v.cols() || bt.cols() != v.cols()) {
    throw std::invalid_argument("layer_norm: gamma/beta must be (1 x cols)");
  }
  Eigen::Index d = v.cols();
  Mat y(v.rows(), d);       // normalized (pre-affine)
  Eigen::VectorXd inv_sigma(v.rows());
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    double mu = v.row(r).mean();
    double var = (v.row(r).array() - mu).square().sum() / static_cast<double>(d);
    double is = 1.0 / std::sqrt(var + eps);
    inv_sigma(r) = is;
    y.row(r) = (v.row(r).array() - mu) * is;
  }
  Mat out(v.rows(), d);
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    out.row(r) = y.row(r).cwiseProduct(gm.row(0)) + bt.row(0);
  }
  int ai = a.i, gi = gamma.i, bi = beta.i;
  bool needs = ng(a) || ng(gamma) || ng(beta);
  auto ystore = std::make_shared<Mat>(std::move(y));
  auto istore = std::make_shared<Eigen::VectorXd>(std::move(inv_sigma));
  return {push(std::move(out), needs, [ai, gi, bi, ystore, istore](Graph& g, const Mat& gr) {
            const Mat& yv = *ystore;
            const Mat& gm2 = g.nodes_[gi].value;
            Eigen::Index d2 = yv.cols();
            if (g.nodes_[gi].needs_grad) {
              Mat gg(1, d2);
              for (Eigen::Index c = 0; c < d2; ++c) gg(0, c) = gr.col(c).dot(yv.col(c));
              g.acc(gi, gg);
            }
            if (g.nodes_[bi].needs_grad) g.acc(bi, Mat(gr.colwise().sum()));
            if (g.nodes_[ai].needs_grad) {
              Mat ga(yv.rows(), d2);
              for (Eigen::Index r = 0; r < yv.rows(); ++r) {
                Eigen::RowVectorXd gy = gr.row(r).cwiseProduct(gm2.row(0));
                double m1 = gy.mean();
                double m2 = gy.cwiseProduct(yv.row(r)).mean();
                ga.row(r) = ((gy.array() - m1 - yv.row(r).array() * m2) * (*istore)(r)).matrix();
              }
              g.acc(ai, ga);
            }
          })};
}

Var Graph::dropout(Var a, double p, RandomStream& rng, bool train) {
  if (!train || p <= 0.0) return a;
  if (p >= 1.0) throw std::invalid_argument("dropout: p must be < 1");
  const Mat& v = val(a);
  Mat mask(v.rows(), v.cols());
  double keep = 1.0 - p;
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask(i) = rng.uniform() < keep ? 1.0 / keep : 0.0;
  return mul(a, constant(std::move(mask)));
}

Var Graph::rodrigues(Var a) {
  const Mat& v = val(a);
  if (v.cols() != 3) throw std::invalid_argument("rodrigues: input must be (J x 3)");
  Eigen::Index J = v.rows();
  Mat out(J, 9);
  for (Eigen::Index j = 0; j < J; ++j) {
    Eigen::Vector3d w = v.row(j).transpose();
    double th2 = w.squaredNorm();
    Eigen::Matrix3d R;
    Eigen::Matrix3d K = skew(w);
    if (th2 < 1e-24) {
      // second-order Taylor; the backward branch below matches it
      R = Eigen::Matrix3d::Identity() + K + 0.5 * K * K;
    } else {
      double th = std::sqrt(th2);
      R = Eigen::Matrix3d::Identity() + (std::sin(th) / th) * K + ((1.0 - std::cos(th)) / th2) * K * K;
    }
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out(j, 3 * r + c) = R(r, c);
  }
  int ai = a.i;
  return {push(std::move(out), ng(a), [ai](Graph& g, const Mat& gr) {
            const Mat& v2 = g.nodes_[ai].value;
            Eigen::Index J2 = v2.rows();
            Mat ga = Mat::Zero(J2, 3);
            for (Eigen::Index j = 0; j < J2; ++j) {
              Eigen::Vector3d w = v2.row(j).transpose();
              double th2 = w.squaredNorm();
              Eigen::Matrix3d gR;
              for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) gR(r, c) = gr(j, 3 * r + c);
              if (th2 < 1e-24) {
                Eigen::Matrix3d K = skew(w);
                for (int i = 0; i < 3; ++i) {
                  Eigen::Matrix3d Ei = skew(Eigen::Vector3d::Unit(i));
                  Eigen::Matrix3d dR = Ei + 0.5 * (Ei * K + K * Ei);
                  ga(j, i) = (gR.array() * dR.array()).sum();
                }
              } else {
                // exact rotation derivative for v != 0
                Eigen::Matrix3d K = skew(w);
                double th = std::sqrt(th2);
                Eigen::Matrix3d R = Eigen::Matrix3d::Identity() + (std::sin(th) / th) * K +
                                    ((1.0 - std::cos(th)) / th2) * K * K;
                Eigen::Matrix3d ImR = Eigen::Matrix3d::Identity() - R;
                for (int i = 0; i < 3; ++i) {
                  Eigen::Vector3d ei = Eigen::Vector3d::Unit(i);
                  Eigen::Matrix3d dR = ((w(i) * K + skew(w.cross(ImR * ei))) / th2) * R;
                  ga(j, i) = (gR.array() * dR.array()).sum();
                }
              }
            }
            g.acc(ai, ga);
          })};
}

Mat Graph::grad_of(Var v) const {
  const Node& n = nodes_[v.i];
  if (n.grad.size() == 0) return Mat::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Graph::backward(Var root) {
  Node& r = nodes_[root.i];
  if (r.value.rows() != 1 || r.value.cols() != 1) {
    throw std::invalid_argument("backward: root must be a scalar (1x1) node");
  }
  acc(root.i, Mat::Ones(1, 1));
  for (int i = root.i; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    if (n.bound != nullptr) {
      auto it = param_grads_.find(n.bound);
      if (it == param_grads_.end()) {
        param_grads_.emplace(n.bound, n.grad);
      } else {
        it->second += n.grad;
      }
    }
    if (n.back) n.back(*this, n.grad);
  }
}

void Graph::flush_grads() {
  for (auto& [p, g] : param_grads_) p->grad += g;
  param_grads_.clear();
}

void Graph::clear() {
  nodes_.clear();
  param_nodes_.clear();
  param_grads_.clear();
}

}  // namespace signpose::nn
