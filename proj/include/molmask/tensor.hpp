#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace molmask::ad {

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Node of the reverse-mode tape. Values are row-major doubles.
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until a gradient is first accumulated
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  std::vector<double>& ensure_grad();
};

/// Shared handle to a tape node. Copies alias the same storage.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t dim(std::size_t axis) const { return node_->shape.at(axis); }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t size() const { return node_->value.size(); }

  std::span<const double> values() const { return node_->value; }
  std::span<double> mutable_values() { return node_->value; }
  double item() const;
  double operator[](std::size_t flat) const { return node_->value[flat]; }

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  /// Gradient values; all zeros when nothing has been accumulated.
  std::vector<double> grad() const;
  std::span<double> mutable_grad() { return node_->ensure_grad(); }
  void zero_grad();

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& node_ptr() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Disables tape construction on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

// Differentiable operations. Shapes are checked and ShapeError is thrown on
// mismatch; NumericalError is thrown when a result is not finite.

/// [m,k] x [k,n] -> [m,n]
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
/// Elementwise a + b. `b` may also match a trailing suffix of a's shape, in
/// which case it is broadcast over the leading dimensions.
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
/// Same values, new shape with equal element count.
Tensor reshape(const Tensor& a, Shape shape);
Tensor relu(const Tensor& a);
Tensor softmax(const Tensor& a, std::size_t axis);
/// Normalizes to zero mean and unit variance along `axis` (no affine terms).
Tensor layer_norm(const Tensor& a, std::size_t axis, double eps = 1e-5);
/// Rows of `table` ([vocab, d]) picked by `ids` -> [ids.size(), d].
Tensor embedding_lookup(const Tensor& table, std::span<const std::size_t> ids);
Tensor concat(std::span<const Tensor> parts, std::size_t axis);
/// Sum over one axis; the axis is removed from the shape.
Tensor sum(const Tensor& a, std::size_t axis);
/// Sum of all entries -> scalar (shape {}).
Tensor sum(const Tensor& a);
/// Sum over rows with target >= 0 of -log softmax(logits[row])[target].
/// logits: [m, classes]; targets: m entries, negative means "skip".
Tensor masked_cross_entropy(const Tensor& logits, std::span<const int> targets);
/// Picks rows of a [m, ...] tensor -> [rows.size(), ...]. Rows may repeat.
Tensor select_rows(const Tensor& a, std::span<const std::size_t> rows);
/// out[i,j] = a[i, classes[i*n+j]] for a: [n, C] -> [n, n].
Tensor gather_classes(const Tensor& a, std::span<const std::uint8_t> classes);
/// out[i,c] = sum_j [classes[i*n+j] == c] a[i,j] for a: [n, n] -> [n, C].
Tensor scatter_classes(const Tensor& a, std::span<const std::uint8_t> classes, std::size_t num_classes);

/// Reverse pass from a scalar. Leaf gradients accumulate across calls.
void backward(const Tensor& loss);

}  // namespace molmask::ad
