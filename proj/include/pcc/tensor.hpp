#pragma once

// Dense row-major 64-bit tensors with a reverse-mode gradient tape.
//
// A Tensor is a cheap handle; copies share storage. Operations record onto the
// tape that is active on the calling thread (see TapeScope) whenever at least
// one input requires a gradient. Without an active tape, operations are plain
// evaluations and record nothing, which is how frozen-parameter inference runs.
//
// Gradients of leaf tensors (parameters, inputs marked requires_grad)
// accumulate across backward passes until zero_grads() is called. Interior
// gradients are reset at the start of each backward pass, so calling backward
// twice on one tape without zeroing leaves twice the leaf gradients.

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pcc {

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

class Tape;

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first needed
  bool requires_grad = false;
  const Tape* tape = nullptr;  // recording tape for interior nodes
  std::size_t tape_index = 0;

  std::vector<double>& ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

class Tensor {
 public:
  Tensor();
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double value);
  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor identity(std::size_t n);

  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t size() const { return node_->data.size(); }
  // Rows/cols of a matrix; a rank-1 tensor reads as a single row.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> data() const { return node_->data; }
  // Direct write access, meant for optimizers and initializers. Writing into a
  // tensor that a live tape has recorded invalidates that tape's gradients.
  std::span<double> mutable_data() { return node_->data; }
  double item() const;
  double at(std::size_t i) const { return node_->data[i]; }
  double at(std::size_t r, std::size_t c) const { return node_->data[r * cols() + c]; }

  bool requires_grad() const { return node_->requires_grad; }
  Tensor& set_requires_grad(bool value = true);
  bool has_grad() const { return node_->grad.size() == node_->data.size() && !node_->data.empty(); }
  // Gradient values; all zeros when no gradient has been accumulated yet.
  std::vector<double> grad() const;
  void zero_grad();

  // A new leaf holding a copy of the values, detached from any tape.
  Tensor detach() const;

  bool same_storage(const Tensor& other) const { return node_ == other.node_; }
  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  friend class Tape;
  friend Tensor make_result(Shape shape, std::vector<double> data);

  std::shared_ptr<detail::Node> node_;
};

using BackwardFn = std::function<void(const detail::Node& out)>;

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // The tape recording on this thread, or nullptr.
  static Tape* active();

  void record(const Tensor& output, std::vector<std::shared_ptr<detail::Node>> inputs, BackwardFn fn);

  // Seeds d(loss)/d(loss) = 1 and propagates through every recorded node up to
  // and including the one that produced `loss`.
  void backward(const Tensor& loss);

  // Zeroes the gradient of every tensor the tape references.
  void zero_grads();

  std::size_t size() const { return entries_.size(); }

 private:
  struct Entry {
    std::shared_ptr<detail::Node> output;
    std::vector<std::shared_ptr<detail::Node>> inputs;
    BackwardFn backward;
  };
  std::vector<Entry> entries_;
};

// Makes `tape` the active tape on this thread for the lifetime of the scope.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

void zero_grads(std::span<Tensor> tensors);

// ---- operations ----

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
// x[n×d] + bias[d] broadcast over rows.
Tensor add_bias(const Tensor& x, const Tensor& bias);
Tensor relu(const Tensor& x);
Tensor sum(const Tensor& x);
Tensor reshape(const Tensor& x, Shape shape);

// Column-wise maximum of x[n×d] as a rank-1 tensor of length d. Gradient goes
// to the argmax row of each column; ties route to the lowest row index.
Tensor max_over_rows(const Tensor& x);
std::vector<std::size_t> argmax_rows(const Tensor& x);
// Column-wise maximum within each row segment [starts[s], starts[s+1]).
// starts.back() must equal x.rows(). Result is [segments×d].
Tensor segment_max(const Tensor& x, std::span<const std::size_t> starts);

// Row-wise concatenation: [n×d1] and [n×d2] -> [n×(d1+d2)], a's columns first.
Tensor concat_rows(const Tensor& a, const Tensor& b);
// Stacks rank-1 or single-row tensors of equal width into [count×d].
Tensor stack_rows(std::span<const Tensor> rows);
// Gathers x's rows at the given indices (repeats allowed).
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> indices);

// Mean over the batch of -log softmax(logits)[label], stabilized by row max.
Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels);

// Row-wise softmax of a plain tensor; no tape involvement.
std::vector<double> softmax(std::span<const double> logits);

// Runs backward on the active tape.
void backward(const Tensor& loss);

}  // namespace pcc
