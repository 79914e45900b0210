#include "pcc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pcc/kernels.hpp"

namespace pcc {

namespace {

thread_local Tape* g_active_tape = nullptr;

using NodePtr = std::shared_ptr<detail::Node>;

// Returns the tape to record on, or nullptr when nothing needs a gradient.
Tape* recording_tape(std::initializer_list<const Tensor*> inputs) {
  Tape* tape = Tape::active();
  if (tape == nullptr) return nullptr;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return tape;
  }
  return nullptr;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

void require_matrix(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw std::invalid_argument(std::string(op) + ": expected a matrix, got shape " +
                                shape_to_string(t.shape()));
  }
}

void accumulate(detail::Node& into, std::span<const double> values) {
  auto& g = into.ensure_grad();
  for (std::size_t i = 0; i < values.size(); ++i) g[i] += values[i];
}

}  // namespace

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) os << "x";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

Tensor make_result(Shape shape, std::vector<double> data) {
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  return Tensor(std::move(node));
}

// ---- Tensor ----

Tensor::Tensor() : Tensor(Shape{0}) {}

Tensor::Tensor(Shape shape) : node_(std::make_shared<detail::Node>()) {
  node_->data.assign(shape_size(shape), 0.0);
  node_->shape = std::move(shape);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : node_(std::make_shared<detail::Node>()) {
  if (shape_size(shape) != data.size()) {
    throw std::invalid_argument("tensor: shape " + shape_to_string(shape) + " holds " +
                                std::to_string(shape_size(shape)) + " values, got " +
                                std::to_string(data.size()));
  }
  node_->shape = std::move(shape);
  node_->data = std::move(data);
}

Tensor Tensor::scalar(double value) { return Tensor(Shape{}, {value}); }

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor(Shape{n}, std::move(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw std::invalid_argument("tensor: ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor(Shape{r, c}, std::move(data));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t(Shape{n, n});
  for (std::size_t i = 0; i < n; ++i) t.node_->data[i * n + i] = 1.0;
  return t;
}

std::size_t Tensor::rows() const {
  const auto& s = node_->shape;
  if (s.size() == 2) return s[0];
  if (s.size() <= 1) return 1;
  throw std::invalid_argument("tensor: rows() on shape " + shape_to_string(s));
}

std::size_t Tensor::cols() const {
  const auto& s = node_->shape;
  if (s.size() == 2) return s[1];
  if (s.size() == 1) return s[0];
  if (s.empty()) return 1;
  throw std::invalid_argument("tensor: cols() on shape " + shape_to_string(s));
}

double Tensor::item() const {
  if (size() != 1) throw std::invalid_argument("tensor: item() on shape " + shape_to_string(shape()));
  return node_->data[0];
}

Tensor& Tensor::set_requires_grad(bool value) {
  node_->requires_grad = value;
  return *this;
}

std::vector<double> Tensor::grad() const {
  if (!has_grad()) return std::vector<double>(size(), 0.0);
  return node_->grad;
}

void Tensor::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detach() const { return Tensor(shape(), node_->data); }

// ---- Tape ----

Tape* Tape::active() { return g_active_tape; }

void Tape::record(const Tensor& output, std::vector<NodePtr> inputs, BackwardFn fn) {
  auto& node = *output.node();
  node.requires_grad = true;
  node.tape = this;
  node.tape_index = entries_.size();
  entries_.push_back(Entry{output.node(), std::move(inputs), std::move(fn)});
}

void Tape::backward(const Tensor& loss) {
  if (loss.size() != 1) {
    throw std::invalid_argument("backward: loss must be a scalar, got shape " +
                                shape_to_string(loss.shape()));
  }
  const auto& root = *loss.node();
  if (root.tape != this) throw std::invalid_argument("backward: loss was not recorded on this tape");

  const std::size_t last = root.tape_index;
  for (std::size_t i = 0; i <= last; ++i) {
    auto& g = entries_[i].output->ensure_grad();
    std::fill(g.begin(), g.end(), 0.0);
  }
  entries_[last].output->grad[0] = 1.0;
  for (std::size_t i = last + 1; i-- > 0;) {
    const Entry& e = entries_[i];
    e.backward(*e.output);
  }
}

void Tape::zero_grads() {
  for (auto& e : entries_) {
    std::fill(e.output->grad.begin(), e.output->grad.end(), 0.0);
    for (auto& in : e.inputs) std::fill(in->grad.begin(), in->grad.end(), 0.0);
  }
}

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }
TapeScope::~TapeScope() { g_active_tape = previous_; }

void zero_grads(std::span<Tensor> tensors) {
  for (auto& t : tensors) t.zero_grad();
}

void backward(const Tensor& loss) {
  Tape* tape = Tape::active();
  if (tape == nullptr) throw std::invalid_argument("backward: no active tape");
  tape->backward(loss);
}

// ---- operations ----

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    throw std::invalid_argument("matmul: inner dimensions disagree: " + shape_to_string(a.shape()) +
                                " * " + shape_to_string(b.shape()));
  }
  std::vector<double> out(m * n);
  kernels::matmul(a.data(), b.data(), out, m, k, n);
  Tensor result = make_result({m, n}, std::move(out));
  if (Tape* tape = recording_tape({&a, &b})) {
    NodePtr na = a.node(), nb = b.node();
    tape->record(result, {na, nb}, [na, nb, m, k, n](const detail::Node& o) {
      if (na->requires_grad) kernels::matmul_a_bt_acc(o.grad, nb->data, na->ensure_grad(), m, k, n);
      if (nb->requires_grad) kernels::matmul_at_b_acc(na->data, o.grad, nb->ensure_grad(), m, k, n);
    });
  }
  return result;
}

Tensor transpose(const Tensor& a) {
  require_matrix(a, "transpose");
  const std::size_t r = a.shape()[0], c = a.shape()[1];
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = a.data()[i * c + j];
  Tensor result = make_result({c, r}, std::move(out));
  if (Tape* tape = recording_tape({&a})) {
    NodePtr na = a.node();
    tape->record(result, {na}, [na, r, c](const detail::Node& o) {
      auto& g = na->ensure_grad();
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) g[i * c + j] += o.grad[j * r + i];
    });
  }
  return result;
}

namespace {

template <typename Forward>
Tensor elementwise_binary(const Tensor& a, const Tensor& b, const char* name, Forward f,
                          double sign_b, bool product) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument(std::string(name) + ": shape mismatch " + shape_to_string(a.shape()) +
                                " vs " + shape_to_string(b.shape()));
  }
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(a.data()[i], b.data()[i]);
  Tensor result = make_result(a.shape(), std::move(out));
  if (Tape* tape = recording_tape({&a, &b})) {
    NodePtr na = a.node(), nb = b.node();
    tape->record(result, {na, nb}, [na, nb, sign_b, product](const detail::Node& o) {
      const std::size_t n = o.grad.size();
      if (na->requires_grad) {
        auto& g = na->ensure_grad();
        for (std::size_t i = 0; i < n; ++i) g[i] += product ? o.grad[i] * nb->data[i] : o.grad[i];
      }
      if (nb->requires_grad) {
        auto& g = nb->ensure_grad();
        for (std::size_t i = 0; i < n; ++i) g[i] += product ? o.grad[i] * na->data[i] : sign_b * o.grad[i];
      }
    });
  }
  return result;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return elementwise_binary(a, b, "add", [](double x, double y) { return x + y; }, 1.0, false);
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return elementwise_binary(a, b, "sub", [](double x, double y) { return x - y; }, -1.0, false);
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return elementwise_binary(a, b, "mul", [](double x, double y) { return x * y; }, 1.0, true);
}

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (double& v : out) v *= factor;
  Tensor result = make_result(a.shape(), std::move(out));
  if (Tape* tape = recording_tape({&a})) {
    NodePtr na = a.node();
    tape->record(result, {na}, [na, factor](const detail::Node& o) {
      auto& g = na->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += factor * o.grad[i];
    });
  }
  return result;
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  require_matrix(x, "add_bias");
  const std::size_t n = x.shape()[0], d = x.shape()[1];
  if (bias.size() != d) {
    throw std::invalid_argument("add_bias: bias " + shape_to_string(bias.shape()) +
                                " does not match columns of " + shape_to_string(x.shape()));
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) out[i * d + j] += bias.data()[j];
  Tensor result = make_result(x.shape(), std::move(out));
  if (Tape* tape = recording_tape({&x, &bias})) {
    NodePtr nx = x.node(), nb = bias.node();
    tape->record(result, {nx, nb}, [nx, nb, n, d](const detail::Node& o) {
      if (nx->requires_grad) accumulate(*nx, o.grad);
      if (nb->requires_grad) {
        auto& g = nb->ensure_grad();
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < d; ++j) g[j] += o.grad[i * d + j];
      }
    });
  }
  return result;
}

Tensor relu(const Tensor& x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] > 0.0 ? x.data()[i] : 0.0;
  Tensor result = make_result(x.shape(), std::move(out));
  if (Tape* tape = recording_tape({&x})) {
    NodePtr nx = x.node();
    tape->record(result, {nx}, [nx](const detail::Node& o) {
      auto& g = nx->ensure_grad();
      // Subgradient at exactly zero is zero.
      for (std::size_t i = 0; i < g.size(); ++i)
        if (nx->data[i] > 0.0) g[i] += o.grad[i];
    });
  }
  return result;
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  Tensor result = make_result(Shape{}, {total});
  if (Tape* tape = recording_tape({&x})) {
    NodePtr nx = x.node();
    tape->record(result, {nx}, [nx](const detail::Node& o) {
      auto& g = nx->ensure_grad();
      for (double& v : g) v += o.grad[0];
    });
  }
  return result;
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_size(shape) != x.size()) {
    throw std::invalid_argument("reshape: cannot view " + shape_to_string(x.shape()) + " as " +
                                shape_to_string(shape));
  }
  Tensor result = make_result(std::move(shape), std::vector<double>(x.data().begin(), x.data().end()));
  if (Tape* tape = recording_tape({&x})) {
    NodePtr nx = x.node();
    tape->record(result, {nx}, [nx](const detail::Node& o) { accumulate(*nx, o.grad); });
  }
  return result;
}

std::vector<std::size_t> argmax_rows(const Tensor& x) {
  require_matrix(x, "max_over_rows");
  const std::size_t n = x.shape()[0], d = x.shape()[1];
  if (n == 0) throw std::invalid_argument("max_over_rows: empty set has no maximum");
  std::vector<double> best(d);
  std::vector<std::size_t> idx(d);
  const std::size_t starts[] = {0, n};
  kernels::segment_max(x.data(), d, starts, best, idx);
  return idx;
}

Tensor max_over_rows(const Tensor& x) {
  Tensor pooled = segment_max(x, std::vector<std::size_t>{0, x.rank() == 2 ? x.shape()[0] : 0});
  return reshape(pooled, Shape{pooled.size()});
}

Tensor segment_max(const Tensor& x, std::span<const std::size_t> starts) {
  require_matrix(x, "segment_max");
  const std::size_t n = x.shape()[0], d = x.shape()[1];
  if (starts.size() < 2 || starts.front() != 0 || starts.back() != n) {
    throw std::invalid_argument("segment_max: segment bounds must run from 0 to " + std::to_string(n));
  }
  for (std::size_t s = 0; s + 1 < starts.size(); ++s) {
    if (starts[s + 1] <= starts[s]) throw std::invalid_argument("segment_max: empty set has no maximum");
  }
  const std::size_t m = starts.size() - 1;
  std::vector<double> out(m * d);
  auto idx = std::make_shared<std::vector<std::size_t>>(m * d);
  kernels::segment_max(x.data(), d, starts, out, *idx);
  Tensor result = make_result({m, d}, std::move(out));
  if (Tape* tape = recording_tape({&x})) {
    NodePtr nx = x.node();
    tape->record(result, {nx}, [nx, idx, d](const detail::Node& o) {
      auto& g = nx->ensure_grad();
      for (std::size_t e = 0; e < idx->size(); ++e) g[(*idx)[e] * d + e % d] += o.grad[e];
    });
  }
  return result;
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
  require_matrix(a, "concat_rows");
  require_matrix(b, "concat_rows");
  const std::size_t n = a.shape()[0], d1 = a.shape()[1], d2 = b.shape()[1];
  if (b.shape()[0] != n) {
    throw std::invalid_argument("concat_rows: row counts differ: " + shape_to_string(a.shape()) + " vs " +
                                shape_to_string(b.shape()));
  }
  const std::size_t d = d1 + d2;
  std::vector<double> out(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(a.data().begin() + static_cast<std::ptrdiff_t>(i * d1), d1, out.begin() + static_cast<std::ptrdiff_t>(i * d));
    std::copy_n(b.data().begin() + static_cast<std::ptrdiff_t>(i * d2), d2,
                out.begin() + static_cast<std::ptrdiff_t>(i * d + d1));
  }
  Tensor result = make_result({n, d}, std::move(out));
  if (Tape* tape = recording_tape({&a, &b})) {
    NodePtr na = a.node(), nb = b.node();
    tape->record(result, {na, nb}, [na, nb, n, d1, d2](const detail::Node& o) {
      const std::size_t d = d1 + d2;
      if (na->requires_grad) {
        auto& g = na->ensure_grad();
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < d1; ++j) g[i * d1 + j] += o.grad[i * d + j];
      }
      if (nb->requires_grad) {
        auto& g = nb->ensure_grad();
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < d2; ++j) g[i * d2 + j] += o.grad[i * d + d1 + j];
      }
    });
  }
  return result;
}

Tensor stack_rows(std::span<const Tensor> rows) {
  require(!rows.empty(), "stack_rows: no rows");
  const std::size_t d = rows.front().size();
  std::vector<double> out;
  out.reserve(rows.size() * d);
  bool any_grad = false;
  for (const auto& r : rows) {
    if (r.size() != d || r.rank() > 2 || (r.rank() == 2 && r.shape()[0] != 1)) {
      throw std::invalid_argument("stack_rows: expected rows of width " + std::to_string(d) + ", got " +
                                  shape_to_string(r.shape()));
    }
    out.insert(out.end(), r.data().begin(), r.data().end());
    any_grad = any_grad || r.requires_grad();
  }
  Tensor result = make_result({rows.size(), d}, std::move(out));
  Tape* tape = Tape::active();
  if (tape != nullptr && any_grad) {
    std::vector<NodePtr> inputs;
    inputs.reserve(rows.size());
    for (const auto& r : rows) inputs.push_back(r.node());
    auto captured = inputs;
    tape->record(result, std::move(inputs), [captured, d](const detail::Node& o) {
      for (std::size_t i = 0; i < captured.size(); ++i) {
        if (!captured[i]->requires_grad) continue;
        auto& g = captured[i]->ensure_grad();
        for (std::size_t j = 0; j < d; ++j) g[j] += o.grad[i * d + j];
      }
    });
  }
  return result;
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> indices) {
  require_matrix(x, "gather_rows");
  const std::size_t n = x.shape()[0], d = x.shape()[1];
  std::vector<double> out(indices.size() * d);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= n) {
      throw std::invalid_argument("gather_rows: index " + std::to_string(indices[r]) + " out of range for " +
                                  std::to_string(n) + " rows");
    }
    std::copy_n(x.data().begin() + static_cast<std::ptrdiff_t>(indices[r] * d), d,
                out.begin() + static_cast<std::ptrdiff_t>(r * d));
  }
  Tensor result = make_result({indices.size(), d}, std::move(out));
  if (Tape* tape = recording_tape({&x})) {
    NodePtr nx = x.node();
    auto idx = std::make_shared<std::vector<std::size_t>>(indices.begin(), indices.end());
    tape->record(result, {nx}, [nx, idx, d](const detail::Node& o) {
      auto& g = nx->ensure_grad();
      for (std::size_t r = 0; r < idx->size(); ++r)
        for (std::size_t j = 0; j < d; ++j) g[(*idx)[r] * d + j] += o.grad[r * d + j];
    });
  }
  return result;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double top = *std::max_element(p.begin(), p.end());
  double total = 0.0;
  for (double& v : p) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : p) v /= total;
  return p;
}

Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels) {
  const Tensor& z = logits;
  if (z.rank() != 2 && z.rank() != 1) {
    throw std::invalid_argument("softmax_cross_entropy: logits must be [batch×classes], got " +
                                shape_to_string(z.shape()));
  }
  const std::size_t b = z.rows(), c = z.cols();
  if (labels.size() != b) {
    throw std::invalid_argument("softmax_cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                                std::to_string(b) + " rows");
  }
  auto probs = std::make_shared<std::vector<double>>(b * c);
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    const int label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= c) {
      throw std::invalid_argument("softmax_cross_entropy: label " + std::to_string(label) +
                                  " out of range [0, " + std::to_string(c) + ")");
    }
    const double* row = z.data().data() + i * c;
    const double top = *std::max_element(row, row + c);
    double denom = 0.0;
    for (std::size_t j = 0; j < c; ++j) denom += std::exp(row[j] - top);
    const double log_denom = std::log(denom);
    for (std::size_t j = 0; j < c; ++j) (*probs)[i * c + j] = std::exp(row[j] - top - log_denom);
    total -= row[label] - top - log_denom;
  }
  Tensor result = make_result(Shape{}, {total / static_cast<double>(b)});
  if (Tape* tape = recording_tape({&z})) {
    NodePtr nz = z.node();
    auto owned = std::make_shared<std::vector<int>>(labels.begin(), labels.end());
    tape->record(result, {nz}, [nz, probs, owned, b, c](const detail::Node& o) {
      auto& g = nz->ensure_grad();
      const double s = o.grad[0] / static_cast<double>(b);
      for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
          const double target = static_cast<int>(j) == (*owned)[i] ? 1.0 : 0.0;
          g[i * c + j] += s * ((*probs)[i * c + j] - target);
        }
      }
    });
  }
  return result;
}

}  // namespace pcc
