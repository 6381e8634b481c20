#pragma once

// Dense 2-D tensors with a reverse-mode gradient tape.
//
// Every value is a rows x cols matrix of doubles (scalars are 1x1). Operations
// record themselves on the tape active on the calling thread when at least one
// input requires gradients; with no active tape they are plain computations.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace tempofield {

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
  std::string to_string() const;
};

namespace detail {
struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until a gradient reaches the node
  bool requires_grad = false;
};
}  // namespace detail

class Tensor {
 public:
  Tensor() = default;

  /// Leaf without gradients.
  static Tensor constant(Shape shape, std::vector<double> data);
  static Tensor zeros(Shape shape);
  static Tensor ones(Shape shape);
  static Tensor scalar(double value);
  /// Leaf that accumulates gradients (a trainable parameter).
  static Tensor parameter(Shape shape, std::vector<double> data);

  bool defined() const { return node_ != nullptr; }
  Shape shape() const { return node_->shape; }
  std::size_t rows() const { return node_->shape.rows; }
  std::size_t cols() const { return node_->shape.cols; }
  std::size_t size() const { return node_->data.size(); }

  std::span<const double> data() const { return node_->data; }
  /// In-place access for optimizers and perturbation checks. Never call on a
  /// tensor whose value an unfinished tape still depends on.
  std::span<double> mutable_data() { return node_->data; }
  double at(std::size_t r, std::size_t c) const { return node_->data[r * cols() + c]; }
  /// Value of a 1x1 tensor.
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> mutable_grad() { return node_->grad; }
  /// Allocates (if needed) and zero-fills the gradient buffer.
  void zero_grad();

  /// Deep copy of the values as a new leaf; `trainable` selects parameter vs constant.
  Tensor clone(bool trainable) const;

  bool same_node(const Tensor& other) const { return node_ == other.node_; }

 private:
  friend class Tape;
  friend struct TensorAccess;
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

/// Ordered record of primitive applications. Backward visits entries in
/// reverse recording order exactly once and then clears the tape.
class Tape {
 public:
  using BackwardFn = std::function<void()>;

  struct Entry {
    const char* op = "";
    std::shared_ptr<detail::Node> output;
    std::vector<std::shared_ptr<detail::Node>> inputs;
    BackwardFn backward;
  };

  void record(Entry entry) { entries_.push_back(std::move(entry)); }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  void clear() { entries_.clear(); }

  /// d loss / d p for every parameter reachable from `loss`. Throws
  /// GradientError when loss is not a scalar recorded on this tape (which
  /// includes a second call without re-recording).
  void backward(const Tensor& loss);

 private:
  std::vector<Entry> entries_;
};

/// Makes `tape` the active tape of the current thread for its lifetime.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

/// Suspends recording on the current thread.
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  Tape* previous_;
};

Tape* active_tape();

/// Runs backward on the active tape.
void backward(const Tensor& loss);

// Primitives. Shape violations throw ShapeError naming the primitive.

Tensor matmul(const Tensor& a, const Tensor& b);
/// Elementwise sum; `b` may also be a 1 x cols row broadcast over a's rows.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope);
Tensor elu(const Tensor& a);
/// Row-wise softmax. With a mask (same shape, nonzero = keep) masked entries
/// get probability zero; a row with nothing kept is a ShapeError.
Tensor softmax_rows(const Tensor& a, std::span<const unsigned char> mask = {});
Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
/// Column means, 1 x cols.
Tensor mean_rows(const Tensor& a);
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t count);
Tensor gather_rows(const Tensor& a, std::span<const std::size_t> rows);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t count);
Tensor transpose(const Tensor& a);
/// Mean binary cross-entropy of a column of logits against 0/1 labels.
Tensor bce_with_logits(const Tensor& logits, std::span<const double> labels);

/// Compares tape gradients of the scalar f(p) with central differences of
/// step h. Returns max_i |analytic_i - numeric_i| / max(1e-8, |numeric_i|).
double finite_diff_check(const std::function<Tensor(const Tensor&)>& f, Tensor& p, double step);

}  // namespace tempofield
