#include "tempofield/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tempofield/error.hpp"

namespace tempofield {

using detail::Node;
using NodePtr = std::shared_ptr<Node>;

std::string Shape::to_string() const {
  return "(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
}

namespace {

thread_local Tape* g_active_tape = nullptr;

std::vector<double>& grad_of(Node& n) {
  if (n.grad.empty()) n.grad.assign(n.data.size(), 0.0);
  return n.grad;
}

[[noreturn]] void shape_error(const char* op, Shape a, Shape b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + a.to_string() + " and " +
                   b.to_string());
}

}  // namespace

struct TensorAccess {
  static const NodePtr& node(const Tensor& t) { return t.node_; }
  static Tensor wrap(NodePtr n) { return Tensor(std::move(n)); }
};

namespace {

const NodePtr& node_of(const Tensor& t) {
  if (!t.defined()) throw ShapeError("operation on an undefined tensor");
  return TensorAccess::node(t);
}

/// Creates the output node and, if recording applies, a tape entry whose
/// backward closure receives (output, inputs).
template <typename Backward>
Tensor emit(const char* op, Shape shape, std::vector<double> data,
            std::initializer_list<NodePtr> inputs, Backward&& backward) {
  auto out = std::make_shared<Node>();
  out->shape = shape;
  out->data = std::move(data);
  Tape* tape = g_active_tape;
  const bool track =
      tape != nullptr && std::any_of(inputs.begin(), inputs.end(),
                                     [](const NodePtr& n) { return n->requires_grad; });
  if (track) {
    out->requires_grad = true;
    Tape::Entry e;
    e.op = op;
    e.output = out;
    e.inputs.assign(inputs.begin(), inputs.end());
    Node* o = out.get();
    std::vector<Node*> in;
    for (const auto& n : inputs) in.push_back(n.get());
    e.backward = [o, in = std::move(in), fn = std::forward<Backward>(backward)]() { fn(*o, in); };
    tape->record(std::move(e));
  }
  return TensorAccess::wrap(std::move(out));
}

using Ins = std::vector<Node*>;

}  // namespace

Tensor Tensor::constant(Shape shape, std::vector<double> data) {
  if (data.size() != shape.size()) {
    throw ShapeError("constant: " + std::to_string(data.size()) + " values for shape " +
                     shape.to_string());
  }
  auto n = std::make_shared<Node>();
  n->shape = shape;
  n->data = std::move(data);
  return Tensor(std::move(n));
}

Tensor Tensor::zeros(Shape shape) { return constant(shape, std::vector<double>(shape.size(), 0.0)); }
Tensor Tensor::ones(Shape shape) { return constant(shape, std::vector<double>(shape.size(), 1.0)); }
Tensor Tensor::scalar(double value) { return constant({1, 1}, {value}); }

Tensor Tensor::parameter(Shape shape, std::vector<double> data) {
  Tensor t = constant(shape, std::move(data));
  t.node_->requires_grad = true;
  return t;
}

double Tensor::item() const {
  if (node_->shape != Shape{1, 1}) throw ShapeError("item: tensor is " + shape().to_string());
  return node_->data[0];
}

void Tensor::zero_grad() { node_->grad.assign(node_->data.size(), 0.0); }

Tensor Tensor::clone(bool trainable) const {
  return trainable ? parameter(shape(), node_->data) : constant(shape(), node_->data);
}

void Tape::backward(const Tensor& loss) {
  const NodePtr& target = node_of(loss);
  if (target->shape != Shape{1, 1}) {
    throw GradientError("backward: loss must be scalar, got " + target->shape.to_string());
  }
  auto it = std::find_if(entries_.rbegin(), entries_.rend(),
                         [&](const Entry& e) { return e.output == target; });
  if (it == entries_.rend()) {
    throw GradientError("backward: loss is not recorded on the tape (already consumed?)");
  }
  target->grad.assign(1, 1.0);
  for (; it != entries_.rend(); ++it) {
    if (!it->output->grad.empty()) it->backward();
  }
  entries_.clear();
}

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }
TapeScope::~TapeScope() { g_active_tape = previous_; }
NoGradScope::NoGradScope() : previous_(g_active_tape) { g_active_tape = nullptr; }
NoGradScope::~NoGradScope() { g_active_tape = previous_; }

Tape* active_tape() { return g_active_tape; }

void backward(const Tensor& loss) {
  if (g_active_tape == nullptr) throw GradientError("backward: no active tape");
  g_active_tape->backward(loss);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  const auto& na = node_of(a);
  const auto& nb = node_of(b);
  const Shape sa = na->shape, sb = nb->shape;
  if (sa.cols != sb.rows) shape_error("matmul", sa, sb);
  const std::size_t n = sa.rows, k = sa.cols, m = sb.cols;
  std::vector<double> c(n * m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = na->data[i * k + p];
      if (av == 0.0) continue;
      const double* brow = &nb->data[p * m];
      double* crow = &c[i * m];
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
  return emit("matmul", {n, m}, std::move(c), {na, nb}, [n, k, m](Node& out, const Ins& in) {
    const auto& g = out.grad;
    if (in[0]->requires_grad) {
      auto& ga = grad_of(*in[0]);
      const auto& bd = in[1]->data;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double s = 0.0;
          for (std::size_t j = 0; j < m; ++j) s += g[i * m + j] * bd[p * m + j];
          ga[i * k + p] += s;
        }
      }
    }
    if (in[1]->requires_grad) {
      auto& gb = grad_of(*in[1]);
      const auto& ad = in[0]->data;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double av = ad[i * k + p];
          if (av == 0.0) continue;
          for (std::size_t j = 0; j < m; ++j) gb[p * m + j] += av * g[i * m + j];
        }
      }
    }
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  const auto& na = node_of(a);
  const auto& nb = node_of(b);
  const Shape sa = na->shape, sb = nb->shape;
  const bool row_broadcast = sb.rows == 1 && sb.cols == sa.cols && sa.rows != 1;
  if (!(sa == sb) && !row_broadcast) shape_error("add", sa, sb);
  std::vector<double> c(na->data);
  const std::size_t cols = sa.cols;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += nb->data[row_broadcast ? i % cols : i];
  return emit("add", sa, std::move(c), {na, nb}, [row_broadcast, cols](Node& out, const Ins& in) {
    if (in[0]->requires_grad) {
      auto& ga = grad_of(*in[0]);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += out.grad[i];
    }
    if (in[1]->requires_grad) {
      auto& gb = grad_of(*in[1]);
      for (std::size_t i = 0; i < out.grad.size(); ++i) gb[row_broadcast ? i % cols : i] += out.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  const auto& na = node_of(a);
  const auto& nb = node_of(b);
  if (na->shape != nb->shape) shape_error("sub", na->shape, nb->shape);
  std::vector<double> c(na->data);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= nb->data[i];
  return emit("sub", na->shape, std::move(c), {na, nb}, [](Node& out, const Ins& in) {
    if (in[0]->requires_grad) {
      auto& ga = grad_of(*in[0]);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += out.grad[i];
    }
    if (in[1]->requires_grad) {
      auto& gb = grad_of(*in[1]);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= out.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  const auto& na = node_of(a);
  const auto& nb = node_of(b);
  if (na->shape != nb->shape) shape_error("mul", na->shape, nb->shape);
  std::vector<double> c(na->data);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= nb->data[i];
  return emit("mul", na->shape, std::move(c), {na, nb}, [](Node& out, const Ins& in) {
    if (in[0]->requires_grad) {
      auto& ga = grad_of(*in[0]);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += out.grad[i] * in[1]->data[i];
    }
    if (in[1]->requires_grad) {
      auto& gb = grad_of(*in[1]);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += out.grad[i] * in[0]->data[i];
    }
  });
}

Tensor scale(const Tensor& a, double factor) {
  const auto& na = node_of(a);
  std::vector<double> c(na->data);
  for (auto& x : c) x *= factor;
  return emit("scale", na->shape, std::move(c), {na}, [factor](Node& out, const Ins& in) {
    auto& ga = grad_of(*in[0]);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += factor * out.grad[i];
  });
}

namespace {

/// Elementwise op whose derivative is a function of (input, output).
template <typename F, typename D>
Tensor unary(const char* op, const Tensor& a, F f, D dfdx) {
  const auto& na = node_of(a);
  std::vector<double> c(na->data.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = f(na->data[i]);
  return emit(op, na->shape, std::move(c), {na}, [dfdx](Node& out, const Ins& in) {
    auto& ga = grad_of(*in[0]);
    for (std::size_t i = 0; i < ga.size(); ++i) {
      ga[i] += out.grad[i] * dfdx(in[0]->data[i], out.data[i]);
    }
  });
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor sigmoid(const Tensor& a) {
  return unary("sigmoid", a, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
  return unary("tanh", a, [](double x) { return std::tanh(x); },
               [](double, double y) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& a) {
  return unary("relu", a, [](double x) { return x > 0 ? x : 0.0; },
               [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& a, double slope) {
  return unary("leaky_relu", a, [slope](double x) { return x > 0 ? x : slope * x; },
               [slope](double x, double) { return x > 0 ? 1.0 : slope; });
}

Tensor elu(const Tensor& a) {
  return unary("elu", a, [](double x) { return x > 0 ? x : std::expm1(x); },
               [](double x, double y) { return x > 0 ? 1.0 : y + 1.0; });
}

Tensor softmax_rows(const Tensor& a, std::span<const unsigned char> mask) {
  const auto& na = node_of(a);
  const Shape s = na->shape;
  if (!mask.empty() && mask.size() != s.size()) {
    throw ShapeError("softmax_rows: mask has " + std::to_string(mask.size()) +
                     " entries for shape " + s.to_string());
  }
  std::vector<double> y(s.size(), 0.0);
  for (std::size_t r = 0; r < s.rows; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < s.cols; ++c) {
      const std::size_t i = r * s.cols + c;
      if (mask.empty() || mask[i]) mx = std::max(mx, na->data[i]);
    }
    if (mx == -std::numeric_limits<double>::infinity()) {
      throw ShapeError("softmax_rows: row " + std::to_string(r) + " is fully masked");
    }
    double z = 0.0;
    for (std::size_t c = 0; c < s.cols; ++c) {
      const std::size_t i = r * s.cols + c;
      if (mask.empty() || mask[i]) z += (y[i] = std::exp(na->data[i] - mx));
    }
    for (std::size_t c = 0; c < s.cols; ++c) y[r * s.cols + c] /= z;
  }
  return emit("softmax_rows", s, std::move(y), {na}, [s](Node& out, const Ins& in) {
    auto& ga = grad_of(*in[0]);
    for (std::size_t r = 0; r < s.rows; ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < s.cols; ++c) {
        dot += out.grad[r * s.cols + c] * out.data[r * s.cols + c];
      }
      for (std::size_t c = 0; c < s.cols; ++c) {
        const std::size_t i = r * s.cols + c;
        ga[i] += out.data[i] * (out.grad[i] - dot);
      }
    }
  });
}

namespace {

// concat has a variable input count, so it records its entry directly.
Tensor emit_many(const char* op, Shape shape, std::vector<double> data, std::span<const Tensor> parts,
                 std::function<void(Node&, const Ins&)> backward) {
  auto out = std::make_shared<Node>();
  out->shape = shape;
  out->data = std::move(data);
  Tape* tape = g_active_tape;
  const bool track = tape != nullptr && std::any_of(parts.begin(), parts.end(), [](const Tensor& t) {
                       return node_of(t)->requires_grad;
                     });
  if (track) {
    out->requires_grad = true;
    Tape::Entry e;
    e.op = op;
    e.output = out;
    std::vector<Node*> in;
    for (const auto& p : parts) {
      e.inputs.push_back(node_of(p));
      in.push_back(node_of(p).get());
    }
    Node* o = out.get();
    e.backward = [o, in = std::move(in), fn = std::move(backward)]() { fn(*o, in); };
    tape->record(std::move(e));
  }
  return TensorAccess::wrap(std::move(out));
}

}  // namespace

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t rows = node_of(parts[0])->shape.rows;
  std::vector<std::size_t> offsets;
  std::size_t cols = 0;
  for (const auto& p : parts) {
    const Shape s = node_of(p)->shape;
    if (s.rows != rows) shape_error("concat_cols", node_of(parts[0])->shape, s);
    offsets.push_back(cols);
    cols += s.cols;
  }
  std::vector<double> c(rows * cols);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& n = node_of(parts[k]);
    const std::size_t w = n->shape.cols;
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(&n->data[r * w], w, &c[r * cols + offsets[k]]);
    }
  }
  return emit_many("concat_cols", {rows, cols}, std::move(c), parts,
                   [rows, cols, offsets](Node& out, const Ins& in) {
                     for (std::size_t k = 0; k < in.size(); ++k) {
                       if (!in[k]->requires_grad) continue;
                       auto& g = grad_of(*in[k]);
                       const std::size_t w = in[k]->shape.cols;
                       for (std::size_t r = 0; r < rows; ++r) {
                         for (std::size_t c = 0; c < w; ++c) {
                           g[r * w + c] += out.grad[r * cols + offsets[k] + c];
                         }
                       }
                     }
                   });
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const std::size_t cols = node_of(parts[0])->shape.cols;
  std::vector<double> c;
  std::size_t rows = 0;
  for (const auto& p : parts) {
    const auto& n = node_of(p);
    if (n->shape.cols != cols) shape_error("concat_rows", node_of(parts[0])->shape, n->shape);
    c.insert(c.end(), n->data.begin(), n->data.end());
    rows += n->shape.rows;
  }
  return emit_many("concat_rows", {rows, cols}, std::move(c), parts, [](Node& out, const Ins& in) {
    std::size_t offset = 0;
    for (Node* n : in) {
      if (n->requires_grad) {
        auto& g = grad_of(*n);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += out.grad[offset + i];
      }
      offset += n->data.size();
    }
  });
}

Tensor sum(const Tensor& a) {
  const auto& na = node_of(a);
  double s = 0.0;
  for (double x : na->data) s += x;
  return emit("sum", {1, 1}, {s}, {na}, [](Node& out, const Ins& in) {
    auto& ga = grad_of(*in[0]);
    for (auto& g : ga) g += out.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  const auto& na = node_of(a);
  if (na->data.empty()) throw ShapeError("mean: empty tensor");
  const double inv = 1.0 / static_cast<double>(na->data.size());
  double s = 0.0;
  for (double x : na->data) s += x;
  return emit("mean", {1, 1}, {s * inv}, {na}, [inv](Node& out, const Ins& in) {
    auto& ga = grad_of(*in[0]);
    for (auto& g : ga) g += out.grad[0] * inv;
  });
}

Tensor mean_rows(const Tensor& a) {
  const auto& na = node_of(a);
  const Shape s = na->shape;
  if (s.rows == 0) throw ShapeError("mean_rows: no rows");
  const double inv = 1.0 / static_cast<double>(s.rows);
  std::vector<double> c(s.cols, 0.0);
  for (std::size_t r = 0; r < s.rows; ++r) {
    for (std::size_t j = 0; j < s.cols; ++j) c[j] += na->data[r * s.cols + j];
  }
  for (auto& x : c) x *= inv;
  return emit("mean_rows", {1, s.cols}, std::move(c), {na}, [s, inv](Node& out, const Ins& in) {
    auto& ga = grad_of(*in[0]);
    for (std::size_t r = 0; r < s.rows; ++r) {
      for (std::size_t j = 0; j < s.cols; ++j) ga[r * s.cols + j] += out.grad[j] * inv;
    }
  });
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t count) {
  const auto& na = node_of(a);
  const Shape s = na->shape;
  if (begin + count > s.rows) {
    throw ShapeError("slice_rows: rows [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") of " + s.to_string());
  }
  std::vector<double> c(na->data.begin() + static_cast<std::ptrdiff_t>(begin * s.cols),
                        na->data.begin() + static_cast<std::ptrdiff_t>((begin + count) * s.cols));
  const std::size_t offset = begin * s.cols;
  return emit("slice_rows", {count, s.cols}, std::move(c), {na}, [offset](Node& out, const Ins& in) {
    auto& ga = grad_of(*in[0]);
    for (std::size_t i = 0; i < out.grad.size(); ++i) ga[offset + i] += out.grad[i];
  });
}

Tensor gather_rows(const Tensor& a, std::span<const std::size_t> rows) {
  const auto& na = node_of(a);
  const Shape s = na->shape;
  std::vector<double> c(rows.size() * s.cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= s.rows) {
      throw ShapeError("gather_rows: row " + std::to_string(rows[i]) + " of " + s.to_string());
    }
    std::copy_n(&na->data[rows[i] * s.cols], s.cols, &c[i * s.cols]);
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return emit("gather_rows", {rows.size(), s.cols}, std::move(c), {na},
              [idx = std::move(idx), cols = s.cols](Node& out, const Ins& in) {
                auto& ga = grad_of(*in[0]);
                for (std::size_t i = 0; i < idx.size(); ++i) {
                  for (std::size_t j = 0; j < cols; ++j) ga[idx[i] * cols + j] += out.grad[i * cols + j];
                }
              });
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t count) {
  const auto& na = node_of(a);
  const Shape s = na->shape;
  if (begin + count > s.cols) {
    throw ShapeError("slice_cols: cols [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") of " + s.to_string());
  }
  std::vector<double> c(s.rows * count);
  for (std::size_t r = 0; r < s.rows; ++r) {
    std::copy_n(&na->data[r * s.cols + begin], count, &c[r * count]);
  }
  return emit("slice_cols", {s.rows, count}, std::move(c), {na},
              [s, begin, count](Node& out, const Ins& in) {
                auto& ga = grad_of(*in[0]);
                for (std::size_t r = 0; r < s.rows; ++r) {
                  for (std::size_t j = 0; j < count; ++j) ga[r * s.cols + begin + j] += out.grad[r * count + j];
                }
              });
}

Tensor transpose(const Tensor& a) {
  const auto& na = node_of(a);
  const Shape s = na->shape;
  std::vector<double> c(s.size());
  for (std::size_t r = 0; r < s.rows; ++r) {
    for (std::size_t j = 0; j < s.cols; ++j) c[j * s.rows + r] = na->data[r * s.cols + j];
  }
  return emit("transpose", {s.cols, s.rows}, std::move(c), {na}, [s](Node& out, const Ins& in) {
    auto& ga = grad_of(*in[0]);
    for (std::size_t r = 0; r < s.rows; ++r) {
      for (std::size_t j = 0; j < s.cols; ++j) ga[r * s.cols + j] += out.grad[j * s.rows + r];
    }
  });
}

Tensor bce_with_logits(const Tensor& logits, std::span<const double> labels) {
  const auto& nl = node_of(logits);
  const Shape s = nl->shape;
  if (s.cols != 1 || s.rows != labels.size() || s.rows == 0) {
    throw ShapeError("bce_with_logits: logits " + s.to_string() + " for " +
                     std::to_string(labels.size()) + " labels");
  }
  const double inv = 1.0 / static_cast<double>(s.rows);
  double loss = 0.0;
  for (std::size_t i = 0; i < s.rows; ++i) {
    const double x = nl->data[i];
    loss += std::max(x, 0.0) - x * labels[i] + std::log1p(std::exp(-std::abs(x)));
  }
  std::vector<double> y(labels.begin(), labels.end());
  return emit("bce_with_logits", {1, 1}, {loss * inv}, {nl},
              [y = std::move(y), inv](Node& out, const Ins& in) {
                auto& g = grad_of(*in[0]);
                for (std::size_t i = 0; i < y.size(); ++i) {
                  g[i] += out.grad[0] * inv * (stable_sigmoid(in[0]->data[i]) - y[i]);
                }
              });
}

double finite_diff_check(const std::function<Tensor(const Tensor&)>& f, Tensor& p, double step) {
  p.zero_grad();
  {
    Tape tape;
    TapeScope scope(tape);
    Tensor loss = f(p);
    if (!loss.requires_grad()) {
      // f does not depend on anything trainable: analytic gradient is zero.
      if (loss.shape() != Shape{1, 1}) throw GradientError("finite_diff_check: f must be scalar");
    } else {
      tape.backward(loss);
    }
  }
  const std::vector<double> analytic(p.grad().begin(), p.grad().end());

  NoGradScope no_grad;
  auto values = p.mutable_data();
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + step;
    const double up = f(p).item();
    values[i] = saved - step;
    const double down = f(p).item();
    values[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    worst = std::max(worst, std::abs(analytic[i] - numeric) / std::max(1e-8, std::abs(numeric)));
  }
  return worst;
}

}  // namespace tempofield
