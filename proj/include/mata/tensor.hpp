#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

// Minimal reverse-mode automatic differentiation over dense row-major
// matrices of doubles. Every tensor is 2-D; vectors are 1xN or Nx1.
namespace mata::ad {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Shape {
  int rows = 0;
  int cols = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

inline std::string to_string(Shape s) {
  return "[" + std::to_string(s.rows) + "x" + std::to_string(s.cols) + "]";
}

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // allocated on first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  std::vector<double>& grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

namespace detail {
inline thread_local int no_grad_depth = 0;
}

/// Disables tape recording on this thread while alive.
class NoGradGuard {
 public:
  NoGradGuard() { ++detail::no_grad_depth; }
  ~NoGradGuard() { --detail::no_grad_depth; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
};

inline bool recording() { return detail::no_grad_depth == 0; }

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(int rows, int cols) { return filled(rows, cols, 0.0); }

  static Tensor filled(int rows, int cols, double v) {
    return from_values(rows, cols, std::vector<double>(static_cast<std::size_t>(rows) * cols, v));
  }

  static Tensor from_values(int rows, int cols, std::vector<double> values) {
    if (rows < 0 || cols < 0 || values.size() != static_cast<std::size_t>(rows) * cols)
      throw ShapeError("value count does not match shape " + to_string({rows, cols}));
    auto n = std::make_shared<Node>();
    n->shape = {rows, cols};
    n->value = std::move(values);
    return Tensor(std::move(n));
  }

  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows) {
    const int r = static_cast<int>(rows.size());
    const int c = r == 0 ? 0 : static_cast<int>(rows.begin()->size());
    std::vector<double> v;
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != c) throw ShapeError("ragged matrix literal");
      v.insert(v.end(), row.begin(), row.end());
    }
    return from_values(r, c, std::move(v));
  }

  /// Trainable leaf.
  static Tensor parameter(int rows, int cols, std::vector<double> values) {
    Tensor t = from_values(rows, cols, std::move(values));
    t.node_->requires_grad = true;
    return t;
  }

  /// Result of a differentiable op. `backward` reads the output grad from the
  /// node it receives and accumulates into the parents' grad buffers.
  static Tensor from_op(Shape shape, std::vector<double> values,
                        std::vector<Tensor> parents, std::function<void(Node&)> backward) {
    Tensor out = from_values(shape.rows, shape.cols, std::move(values));
    if (!recording()) return out;
    bool any = false;
    for (const auto& p : parents) any = any || p.requires_grad();
    if (!any) return out;
    out.node_->requires_grad = true;
    for (auto& p : parents) out.node_->parents.push_back(p.node_);
    out.node_->backward = std::move(backward);
    return out;
  }

  bool defined() const { return node_ != nullptr; }
  Shape shape() const { return node_->shape; }
  int rows() const { return node_->shape.rows; }
  int cols() const { return node_->shape.cols; }
  std::size_t size() const { return node_->value.size(); }
  bool requires_grad() const { return node_->requires_grad; }

  std::span<const double> values() const { return node_->value; }
  std::span<double> mutable_values() { return node_->value; }
  double operator()(int r, int c) const { return node_->value[static_cast<std::size_t>(r) * cols() + c]; }
  double item() const {
    if (size() != 1) throw ShapeError("item() on non-scalar " + to_string(shape()));
    return node_->value[0];
  }

  /// Gradient after backward(); zeros if nothing reached this tensor.
  std::vector<double> grad() const {
    return node_->grad.empty() ? std::vector<double>(size(), 0.0) : node_->grad;
  }
  void zero_grad() { node_->grad.clear(); }

  Node& node() const { return *node_; }
  const std::shared_ptr<Node>& node_ptr() const { return node_; }

  /// Copy of the values, cut from the tape.
  Tensor detach() const { return from_values(rows(), cols(), node_->value); }

 private:
  explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}
  std::shared_ptr<Node> node_;
};

/// Reverse sweep from a scalar.
inline void backward(const Tensor& loss) {
  if (loss.size() != 1) throw ShapeError("backward() needs a scalar, got " + to_string(loss.shape()));
  if (!loss.requires_grad()) return;
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{&loss.node(), 0}};
  seen.insert(&loss.node());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  loss.node().grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
}

namespace detail {

inline void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
}

inline std::vector<double>* grad_of(Node& n, std::size_t parent) {
  Node& p = *n.parents[parent];
  return p.requires_grad ? &p.grad_buffer() : nullptr;
}

template <class Forward, class Derivative>
Tensor unary(const Tensor& a, Forward f, Derivative df) {
  std::vector<double> out(a.size());
  const auto in = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  return Tensor::from_op(a.shape(), std::move(out), {a}, [df](Node& n) {
    auto* g = grad_of(n, 0);
    if (!g) return;
    const auto& x = n.parents[0]->value;
    for (std::size_t i = 0; i < x.size(); ++i) (*g)[i] += n.grad[i] * df(x[i], n.value[i]);
  });
}

}  // namespace detail

inline Tensor add(const Tensor& a, const Tensor& b) {
  detail::require_same(a, b, "add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
  return Tensor::from_op(a.shape(), std::move(out), {a, b}, [](Node& n) {
    for (std::size_t p = 0; p < 2; ++p)
      if (auto* g = detail::grad_of(n, p))
        for (std::size_t i = 0; i < n.grad.size(); ++i) (*g)[i] += n.grad[i];
  });
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  detail::require_same(a, b, "sub");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] - b.values()[i];
  return Tensor::from_op(a.shape(), std::move(out), {a, b}, [](Node& n) {
    if (auto* g = detail::grad_of(n, 0))
      for (std::size_t i = 0; i < n.grad.size(); ++i) (*g)[i] += n.grad[i];
    if (auto* g = detail::grad_of(n, 1))
      for (std::size_t i = 0; i < n.grad.size(); ++i) (*g)[i] -= n.grad[i];
  });
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
  detail::require_same(a, b, "mul");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
  return Tensor::from_op(a.shape(), std::move(out), {a, b}, [](Node& n) {
    const auto& x = n.parents[0]->value;
    const auto& y = n.parents[1]->value;
    if (auto* g = detail::grad_of(n, 0))
      for (std::size_t i = 0; i < n.grad.size(); ++i) (*g)[i] += n.grad[i] * y[i];
    if (auto* g = detail::grad_of(n, 1))
      for (std::size_t i = 0; i < n.grad.size(); ++i) (*g)[i] += n.grad[i] * x[i];
  });
}

/// Element-wise a / b; a zero divisor is an error.
inline Tensor div(const Tensor& a, const Tensor& b) {
  detail::require_same(a, b, "div");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (b.values()[i] == 0.0) throw std::domain_error("div: division by zero");
    out[i] = a.values()[i] / b.values()[i];
  }
  return Tensor::from_op(a.shape(), std::move(out), {a, b}, [](Node& n) {
    const auto& y = n.parents[1]->value;
    if (auto* g = detail::grad_of(n, 0))
      for (std::size_t i = 0; i < n.grad.size(); ++i) (*g)[i] += n.grad[i] / y[i];
    if (auto* g = detail::grad_of(n, 1))
      for (std::size_t i = 0; i < n.grad.size(); ++i) (*g)[i] -= n.grad[i] * n.value[i] / y[i];
  });
}

inline Tensor scale(const Tensor& a, double s) {
  return detail::unary(a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

inline Tensor add_scalar(const Tensor& a, double s) {
  return detail::unary(a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

inline Tensor square(const Tensor& a) {
  return detail::unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

inline Tensor exp(const Tensor& a) {
  return detail::unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

inline Tensor log(const Tensor& a) {
  for (double x : a.values())
    if (x <= 0.0) throw std::domain_error("log: non-positive argument");
  return detail::unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

/// log(max(a, floor)); no gradient flows through clamped entries.
inline Tensor clamped_log(const Tensor& a, double floor) {
  return detail::unary(
      a, [floor](double x) { return std::log(std::max(x, floor)); },
      [floor](double x, double) { return x > floor ? 1.0 / x : 0.0; });
}

inline Tensor sigmoid(const Tensor& a) {
  return detail::unary(
      a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

inline Tensor relu(const Tensor& a) {
  return detail::unary(a, [](double x) { return x > 0 ? x : 0.0; },
                       [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: " + to_string(a.shape()) + " x " + to_string(b.shape()));
  const int m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> out(static_cast<std::size_t>(m) * n, 0.0);
  const auto x = a.values();
  const auto y = b.values();
  for (int i = 0; i < m; ++i)
    for (int p = 0; p < k; ++p) {
      const double xv = x[static_cast<std::size_t>(i) * k + p];
      if (xv == 0.0) continue;
      const double* yr = y.data() + static_cast<std::size_t>(p) * n;
      double* o = out.data() + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) o[j] += xv * yr[j];
    }
  return Tensor::from_op({m, n}, std::move(out), {a, b}, [m, k, n](Node& node) {
    const auto& x = node.parents[0]->value;
    const auto& y = node.parents[1]->value;
    const auto& go = node.grad;
    if (auto* gx = detail::grad_of(node, 0))  // dA = dC * B^T
      for (int i = 0; i < m; ++i)
        for (int p = 0; p < k; ++p) {
          double s = 0.0;
          for (int j = 0; j < n; ++j) s += go[static_cast<std::size_t>(i) * n + j] * y[static_cast<std::size_t>(p) * n + j];
          (*gx)[static_cast<std::size_t>(i) * k + p] += s;
        }
    if (auto* gy = detail::grad_of(node, 1))  // dB = A^T * dC
      for (int i = 0; i < m; ++i)
        for (int p = 0; p < k; ++p) {
          const double xv = x[static_cast<std::size_t>(i) * k + p];
          if (xv == 0.0) continue;
          for (int j = 0; j < n; ++j)
            (*gy)[static_cast<std::size_t>(p) * n + j] += xv * go[static_cast<std::size_t>(i) * n + j];
        }
  });
}

inline Tensor transpose(const Tensor& a) {
  const int r = a.rows(), c = a.cols();
  std::vector<double> out(a.size());
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out[static_cast<std::size_t>(j) * r + i] = a(i, j);
  return Tensor::from_op({c, r}, std::move(out), {a}, [r, c](Node& n) {
    if (auto* g = detail::grad_of(n, 0))
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j)
          (*g)[static_cast<std::size_t>(i) * c + j] += n.grad[static_cast<std::size_t>(j) * r + i];
  });
}

inline Tensor reshape(const Tensor& a, int rows, int cols) {
  if (static_cast<std::size_t>(rows) * cols != a.size())
    throw ShapeError("reshape: " + to_string(a.shape()) + " to " + to_string({rows, cols}));
  std::vector<double> out(a.values().begin(), a.values().end());
  return Tensor::from_op({rows, cols}, std::move(out), {a}, [](Node& n) {
    if (auto* g = detail::grad_of(n, 0))
      for (std::size_t i = 0; i < n.grad.size(); ++i) (*g)[i] += n.grad[i];
  });
}

/// Horizontal concatenation; all parts share the row count.
inline Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const int r = parts[0].rows();
  std::vector<int> offsets;
  int c = 0;
  for (const auto& p : parts) {
    if (p.rows() != r) throw ShapeError("concat_cols: row count mismatch");
    offsets.push_back(c);
    c += p.cols();
  }
  std::vector<double> out(static_cast<std::size_t>(r) * c);
  for (std::size_t k = 0; k < parts.size(); ++k)
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < parts[k].cols(); ++j)
        out[static_cast<std::size_t>(i) * c + offsets[k] + j] = parts[k](i, j);
  return Tensor::from_op({r, c}, std::move(out), parts, [r, c, offsets](Node& n) {
    for (std::size_t k = 0; k < n.parents.size(); ++k) {
      auto* g = detail::grad_of(n, k);
      if (!g) continue;
      const int pc = n.parents[k]->shape.cols;
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < pc; ++j)
          (*g)[static_cast<std::size_t>(i) * pc + j] += n.grad[static_cast<std::size_t>(i) * c + offsets[k] + j];
    }
  });
}

/// Vertical concatenation; all parts share the column count.
inline Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const int c = parts[0].cols();
  int r = 0;
  std::vector<double> out;
  for (const auto& p : parts) {
    if (p.cols() != c) throw ShapeError("concat_rows: column count mismatch");
    r += p.rows();
    out.insert(out.end(), p.values().begin(), p.values().end());
  }
  return Tensor::from_op({r, c}, std::move(out), parts, [](Node& n) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < n.parents.size(); ++k) {
      const std::size_t len = n.parents[k]->value.size();
      if (auto* g = detail::grad_of(n, k))
        for (std::size_t i = 0; i < len; ++i) (*g)[i] += n.grad[off + i];
      off += len;
    }
  });
}

/// a (m x n) plus a 1 x n row broadcast over every row.
inline Tensor add_row(const Tensor& a, const Tensor& row) {
  if (row.rows() != 1 || row.cols() != a.cols())
    throw ShapeError("add_row: " + to_string(a.shape()) + " + " + to_string(row.shape()));
  const int m = a.rows(), n = a.cols();
  std::vector<double> out(a.size());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(i) * n + j] = a(i, j) + row(0, j);
  return Tensor::from_op(a.shape(), std::move(out), {a, row}, [m, n](Node& node) {
    if (auto* g = detail::grad_of(node, 0))
      for (std::size_t i = 0; i < node.grad.size(); ++i) (*g)[i] += node.grad[i];
    if (auto* g = detail::grad_of(node, 1))
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) (*g)[j] += node.grad[static_cast<std::size_t>(i) * n + j];
  });
}

inline Tensor reduce_sum(const Tensor& a) {
  double s = 0.0;
  for (double x : a.values()) s += x;
  return Tensor::from_op({1, 1}, {s}, {a}, [](Node& n) {
    if (auto* g = detail::grad_of(n, 0))
      for (auto& x : *g) x += n.grad[0];
  });
}

/// Column-wise mean over rows: (m x n) -> (1 x n).
inline Tensor mean_rows(const Tensor& a) {
  const int m = a.rows(), n = a.cols();
  if (m == 0) throw ShapeError("mean_rows: no rows");
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out[j] += a(i, j) / m;
  return Tensor::from_op({1, n}, std::move(out), {a}, [m, n](Node& node) {
    if (auto* g = detail::grad_of(node, 0))
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) (*g)[static_cast<std::size_t>(i) * n + j] += node.grad[j] / m;
  });
}

namespace detail {

// Divides each line (row when by_row, else column) by its sum.
inline Tensor normalize_lines(const Tensor& a, bool by_row) {
  const int m = a.rows(), n = a.cols();
  const int lines = by_row ? m : n;
  auto at = [by_row, n](int line, int k) { return by_row ? static_cast<std::size_t>(line) * n + k
                                                 : static_cast<std::size_t>(k) * n + line; };
  const int len = by_row ? n : m;
  std::vector<double> sums(static_cast<std::size_t>(lines), 0.0);
  for (int l = 0; l < lines; ++l) {
    for (int k = 0; k < len; ++k) sums[l] += a.values()[at(l, k)];
    if (sums[l] == 0.0)
      throw std::domain_error(std::string(by_row ? "row" : "column") + "_normalize: zero sum");
  }
  std::vector<double> out(a.size());
  for (int l = 0; l < lines; ++l)
    for (int k = 0; k < len; ++k) out[at(l, k)] = a.values()[at(l, k)] / sums[l];
  return Tensor::from_op(a.shape(), std::move(out), {a}, [=](Node& node) {
    auto* g = grad_of(node, 0);
    if (!g) return;
    // y = x / s: dx_k = (gy_k - sum_j gy_j y_j) / s
    for (int l = 0; l < lines; ++l) {
      double dot = 0.0;
      for (int k = 0; k < len; ++k) dot += node.grad[at(l, k)] * node.value[at(l, k)];
      for (int k = 0; k < len; ++k) (*g)[at(l, k)] += (node.grad[at(l, k)] - dot) / sums[l];
    }
  });
}

}  // namespace detail

inline Tensor row_normalize(const Tensor& a) { return detail::normalize_lines(a, true); }
inline Tensor column_normalize(const Tensor& a) { return detail::normalize_lines(a, false); }

/// Picks flat entries a[r_k * cols + c_k] into a 1 x K row.
inline Tensor gather(const Tensor& a, const std::vector<std::pair<int, int>>& cells) {
  std::vector<std::size_t> flat;
  std::vector<double> out;
  for (auto [r, c] : cells) {
    if (r < 0 || c < 0 || r >= a.rows() || c >= a.cols()) throw ShapeError("gather: cell out of range");
    flat.push_back(static_cast<std::size_t>(r) * a.cols() + c);
    out.push_back(a.values()[flat.back()]);
  }
  const int k = static_cast<int>(out.size());
  return Tensor::from_op({1, k}, std::move(out), {a},
                         [flat](Node& n) {
                           if (auto* g = detail::grad_of(n, 0))
                             for (std::size_t k = 0; k < flat.size(); ++k) (*g)[flat[k]] += n.grad[k];
                         });
}

}  // namespace mata::ad
