#include "molmask/tensor.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace molmask::ad {

namespace {

thread_local bool t_grad_enabled = true;

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;

void check_finite(std::span<const double> v, const char* op) {
  for (double x : v)
    if (!std::isfinite(x)) throw NumericalError(std::string("non-finite value produced by ") + op);
}

using BackwardFn = std::function<void(Node&)>;

Tensor make_result(Shape shape, std::vector<double> value, std::vector<std::shared_ptr<Node>> parents,
                   BackwardFn fn, const char* op) {
  check_finite(value, op);
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  bool needs = false;
  if (t_grad_enabled)
    for (const auto& p : parents) needs = needs || p->requires_grad;
  if (needs) {
    node->requires_grad = true;
    node->parents = std::move(parents);
    node->backward_fn = std::move(fn);
  }
  return Tensor(std::move(node));
}

// Splits a shape around `axis` into (outer, length, inner) extents.
struct AxisSplit {
  std::size_t outer = 1, len = 1, inner = 1;
};

AxisSplit split_axis(const Shape& s, std::size_t axis) {
  if (axis >= s.size())
    throw ShapeError("axis " + std::to_string(axis) + " invalid for shape " + shape_string(s));
  AxisSplit r;
  for (std::size_t i = 0; i < axis; ++i) r.outer *= s[i];
  r.len = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) r.inner *= s[i];
  return r;
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank)
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got shape " +
                     shape_string(t.shape()));
}

// True when `b` equals a trailing suffix of `a` (including equality).
bool is_suffix(const Shape& a, const Shape& b) {
  if (b.size() > a.size()) return false;
  return std::equal(b.rbegin(), b.rend(), a.rbegin());
}

}  // namespace

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::vector<double>& Node::ensure_grad() {
  if (grad.empty()) grad.assign(value.size(), 0.0);
  return grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  auto node = std::make_shared<Node>();
  node->value.assign(numel(shape), 0.0);
  node->shape = std::move(shape);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  if (numel(shape) != values.size())
    throw ShapeError("value count " + std::to_string(values.size()) + " does not match shape " +
                     shape_string(shape));
  check_finite(values, "tensor construction");
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double v, bool requires_grad) { return from({}, {v}, requires_grad); }

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() on a tensor of shape " + shape_string(shape()));
  return node_->value[0];
}

std::vector<double> Tensor::grad() const {
  if (node_->grad.empty()) return std::vector<double>(size(), 0.0);
  return node_->grad;
}

void Tensor::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }
bool grad_enabled() { return t_grad_enabled; }

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k)
    throw ShapeError("matmul: " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  std::vector<double> out(m * n);
  const auto ai = static_cast<Eigen::Index>(m), ki = static_cast<Eigen::Index>(k),
             ni = static_cast<Eigen::Index>(n);
  Map(out.data(), ai, ni).noalias() = MapC(a.values().data(), ai, ki) * MapC(b.values().data(), ki, ni);
  auto pa = a.node_ptr(), pb = b.node_ptr();
  return make_result({m, n}, std::move(out), {pa, pb}, [pa, pb, ai, ki, ni](Node& self) {
    MapC g(self.grad.data(), ai, ni);
    if (pa->requires_grad)
      Map(pa->ensure_grad().data(), ai, ki).noalias() += g * MapC(pb->value.data(), ki, ni).transpose();
    if (pb->requires_grad)
      Map(pb->ensure_grad().data(), ki, ni).noalias() += MapC(pa->value.data(), ai, ki).transpose() * g;
  }, "matmul");
}

Tensor transpose(const Tensor& a) {
  require_rank(a, 2, "transpose");
  const std::size_t m = a.dim(0), n = a.dim(1);
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a[i * n + j];
  auto pa = a.node_ptr();
  return make_result({n, m}, std::move(out), {pa}, [pa, m, n](Node& self) {
    auto& g = pa->ensure_grad();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[j * m + i];
  }, "transpose");
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (!is_suffix(a.shape(), b.shape()))
    throw ShapeError("add: " + shape_string(a.shape()) + " + " + shape_string(b.shape()));
  const std::size_t nb = b.size();
  std::vector<double> out(a.values().begin(), a.values().end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i % nb];
  auto pa = a.node_ptr(), pb = b.node_ptr();
  return make_result(a.shape(), std::move(out), {pa, pb}, [pa, pb, nb](Node& self) {
    if (pa->requires_grad) {
      auto& g = pa->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (pb->requires_grad) {
      auto& g = pb->ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i % nb] += self.grad[i];
    }
  }, "add");
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (!is_suffix(a.shape(), b.shape()))
    throw ShapeError("mul: " + shape_string(a.shape()) + " * " + shape_string(b.shape()));
  const std::size_t nb = b.size();
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i % nb];
  auto pa = a.node_ptr(), pb = b.node_ptr();
  return make_result(a.shape(), std::move(out), {pa, pb}, [pa, pb, nb](Node& self) {
    if (pa->requires_grad) {
      auto& g = pa->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pb->value[i % nb];
    }
    if (pb->requires_grad) {
      auto& g = pb->ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i % nb] += self.grad[i] * pa->value[i];
    }
  }, "mul");
}

Tensor scale(const Tensor& a, double s) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * s;
  auto pa = a.node_ptr();
  return make_result(a.shape(), std::move(out), {pa}, [pa, s](Node& self) {
    auto& g = pa->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * s;
  }, "scale");
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (numel(shape) != a.size())
    throw ShapeError("reshape " + shape_string(a.shape()) + " -> " + shape_string(shape));
  std::vector<double> out(a.values().begin(), a.values().end());
  auto pa = a.node_ptr();
  return make_result(std::move(shape), std::move(out), {pa}, [pa](Node& self) {
    auto& g = pa->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  }, "reshape");
}

Tensor relu(const Tensor& a) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
  auto pa = a.node_ptr();
  return make_result(a.shape(), std::move(out), {pa}, [pa](Node& self) {
    auto& g = pa->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (pa->value[i] > 0.0) g[i] += self.grad[i];
  }, "relu");
}

Tensor softmax(const Tensor& a, std::size_t axis) {
  const auto sp = split_axis(a.shape(), axis);
  std::vector<double> out(a.size());
  for (std::size_t o = 0; o < sp.outer; ++o)
    for (std::size_t in = 0; in < sp.inner; ++in) {
      const std::size_t base = o * sp.len * sp.inner + in;
      double mx = -INFINITY;
      for (std::size_t l = 0; l < sp.len; ++l) mx = std::max(mx, a[base + l * sp.inner]);
      double z = 0.0;
      for (std::size_t l = 0; l < sp.len; ++l) {
        const double e = std::exp(a[base + l * sp.inner] - mx);
        out[base + l * sp.inner] = e;
        z += e;
      }
      for (std::size_t l = 0; l < sp.len; ++l) out[base + l * sp.inner] /= z;
    }
  auto pa = a.node_ptr();
  return make_result(a.shape(), std::move(out), {pa}, [pa, sp](Node& self) {
    auto& g = pa->ensure_grad();
    for (std::size_t o = 0; o < sp.outer; ++o)
      for (std::size_t in = 0; in < sp.inner; ++in) {
        const std::size_t base = o * sp.len * sp.inner + in;
        double dot = 0.0;
        for (std::size_t l = 0; l < sp.len; ++l) {
          const std::size_t idx = base + l * sp.inner;
          dot += self.grad[idx] * self.value[idx];
        }
        for (std::size_t l = 0; l < sp.len; ++l) {
          const std::size_t idx = base + l * sp.inner;
          g[idx] += self.value[idx] * (self.grad[idx] - dot);
        }
      }
  }, "softmax");
}

Tensor layer_norm(const Tensor& a, std::size_t axis, double eps) {
  const auto sp = split_axis(a.shape(), axis);
  const std::size_t groups = sp.outer * sp.inner;
  std::vector<double> out(a.size());
  std::vector<double> inv_std(groups);
  const double len = static_cast<double>(sp.len);
  for (std::size_t o = 0; o < sp.outer; ++o)
    for (std::size_t in = 0; in < sp.inner; ++in) {
      const std::size_t base = o * sp.len * sp.inner + in;
      double mean = 0.0;
      for (std::size_t l = 0; l < sp.len; ++l) mean += a[base + l * sp.inner];
      mean /= len;
      double var = 0.0;
      for (std::size_t l = 0; l < sp.len; ++l) {
        const double d = a[base + l * sp.inner] - mean;
        var += d * d;
      }
      var /= len;
      const double is = 1.0 / std::sqrt(var + eps);
      inv_std[o * sp.inner + in] = is;
      for (std::size_t l = 0; l < sp.len; ++l)
        out[base + l * sp.inner] = (a[base + l * sp.inner] - mean) * is;
    }
  auto pa = a.node_ptr();
  return make_result(a.shape(), std::move(out), {pa},
                     [pa, sp, len, inv_std = std::move(inv_std)](Node& self) {
    auto& g = pa->ensure_grad();
    for (std::size_t o = 0; o < sp.outer; ++o)
      for (std::size_t in = 0; in < sp.inner; ++in) {
        const std::size_t base = o * sp.len * sp.inner + in;
        double mean_g = 0.0, mean_gx = 0.0;
        for (std::size_t l = 0; l < sp.len; ++l) {
          const std::size_t idx = base + l * sp.inner;
          mean_g += self.grad[idx];
          mean_gx += self.grad[idx] * self.value[idx];
        }
        mean_g /= len;
        mean_gx /= len;
        const double is = inv_std[o * sp.inner + in];
        for (std::size_t l = 0; l < sp.len; ++l) {
          const std::size_t idx = base + l * sp.inner;
          g[idx] += is * (self.grad[idx] - mean_g - self.value[idx] * mean_gx);
        }
      }
  }, "layer_norm");
}

Tensor embedding_lookup(const Tensor& table, std::span<const std::size_t> ids) {
  require_rank(table, 2, "embedding_lookup");
  const std::size_t vocab = table.dim(0), d = table.dim(1);
  std::vector<double> out(ids.size() * d);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] >= vocab) throw ShapeError("embedding id out of range");
    std::copy_n(table.values().begin() + static_cast<std::ptrdiff_t>(ids[r] * d), d, out.begin() + static_cast<std::ptrdiff_t>(r * d));
  }
  auto pt = table.node_ptr();
  std::vector<std::size_t> idv(ids.begin(), ids.end());
  return make_result({ids.size(), d}, std::move(out), {pt}, [pt, d, idv = std::move(idv)](Node& self) {
    auto& g = pt->ensure_grad();
    for (std::size_t r = 0; r < idv.size(); ++r)
      for (std::size_t c = 0; c < d; ++c) g[idv[r] * d + c] += self.grad[r * d + c];
  }, "embedding_lookup");
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat of zero tensors");
  Shape shape = parts[0].shape();
  if (axis >= shape.size()) throw ShapeError("concat: invalid axis");
  std::size_t total = 0;
  for (const auto& p : parts) {
    Shape s = p.shape();
    if (s.size() != shape.size()) throw ShapeError("concat: rank mismatch");
    for (std::size_t i = 0; i < s.size(); ++i)
      if (i != axis && s[i] != shape[i]) throw ShapeError("concat: shape mismatch");
    total += s[axis];
  }
  shape[axis] = total;
  const auto sp = split_axis(shape, axis);
  std::vector<double> out(numel(shape));
  std::vector<std::shared_ptr<Node>> parents;
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    const std::size_t len = p.dim(axis);
    for (std::size_t o = 0; o < sp.outer; ++o)
      std::copy_n(p.values().begin() + static_cast<std::ptrdiff_t>(o * len * sp.inner), len * sp.inner,
                  out.begin() + static_cast<std::ptrdiff_t>((o * total + off) * sp.inner));
    parents.push_back(p.node_ptr());
    offsets.push_back(off);
    off += len;
  }
  auto ps = parents;
  return make_result(shape, std::move(out), std::move(parents),
                     [ps, offsets, axis, sp, total](Node& self) {
    for (std::size_t k = 0; k < ps.size(); ++k) {
      if (!ps[k]->requires_grad) continue;
      auto& g = ps[k]->ensure_grad();
      const std::size_t len = ps[k]->shape[axis];
      for (std::size_t o = 0; o < sp.outer; ++o)
        for (std::size_t x = 0; x < len * sp.inner; ++x)
          g[o * len * sp.inner + x] += self.grad[(o * total + offsets[k]) * sp.inner + x];
    }
  }, "concat");
}

Tensor sum(const Tensor& a, std::size_t axis) {
  const auto sp = split_axis(a.shape(), axis);
  Shape shape = a.shape();
  shape.erase(shape.begin() + static_cast<std::ptrdiff_t>(axis));
  std::vector<double> out(sp.outer * sp.inner, 0.0);
  for (std::size_t o = 0; o < sp.outer; ++o)
    for (std::size_t l = 0; l < sp.len; ++l)
      for (std::size_t in = 0; in < sp.inner; ++in)
        out[o * sp.inner + in] += a[(o * sp.len + l) * sp.inner + in];
  auto pa = a.node_ptr();
  return make_result(std::move(shape), std::move(out), {pa}, [pa, sp](Node& self) {
    auto& g = pa->ensure_grad();
    for (std::size_t o = 0; o < sp.outer; ++o)
      for (std::size_t l = 0; l < sp.len; ++l)
        for (std::size_t in = 0; in < sp.inner; ++in)
          g[(o * sp.len + l) * sp.inner + in] += self.grad[o * sp.inner + in];
  }, "sum");
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double x : a.values()) s += x;
  auto pa = a.node_ptr();
  return make_result({}, {s}, {pa}, [pa](Node& self) {
    auto& g = pa->ensure_grad();
    for (double& x : g) x += self.grad[0];
  }, "sum");
}

Tensor masked_cross_entropy(const Tensor& logits, std::span<const int> targets) {
  require_rank(logits, 2, "masked_cross_entropy");
  const std::size_t m = logits.dim(0), c = logits.dim(1);
  if (targets.size() != m) throw ShapeError("masked_cross_entropy: target count mismatch");
  std::vector<double> probs(m * c, 0.0);
  double loss = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    if (targets[r] < 0) continue;
    if (static_cast<std::size_t>(targets[r]) >= c) throw ShapeError("target class out of range");
    const double* row = logits.values().data() + r * c;
    const double mx = *std::max_element(row, row + c);
    double z = 0.0;
    for (std::size_t k = 0; k < c; ++k) z += std::exp(row[k] - mx);
    for (std::size_t k = 0; k < c; ++k) probs[r * c + k] = std::exp(row[k] - mx) / z;
    loss += mx + std::log(z) - row[targets[r]];
  }
  auto pl = logits.node_ptr();
  std::vector<int> tv(targets.begin(), targets.end());
  return make_result({}, {loss}, {pl},
                     [pl, c, tv = std::move(tv), probs = std::move(probs)](Node& self) {
    auto& g = pl->ensure_grad();
    const double up = self.grad[0];
    for (std::size_t r = 0; r < tv.size(); ++r) {
      if (tv[r] < 0) continue;
      for (std::size_t k = 0; k < c; ++k) g[r * c + k] += up * probs[r * c + k];
      g[r * c + static_cast<std::size_t>(tv[r])] -= up;
    }
  }, "masked_cross_entropy");
}

Tensor select_rows(const Tensor& a, std::span<const std::size_t> rows) {
  if (a.rank() < 1) throw ShapeError("select_rows on a scalar");
  const std::size_t m = a.dim(0), inner = a.size() / std::max<std::size_t>(m, 1);
  Shape shape = a.shape();
  shape[0] = rows.size();
  std::vector<double> out(rows.size() * inner);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= m) throw ShapeError("select_rows: row out of range");
    std::copy_n(a.values().begin() + static_cast<std::ptrdiff_t>(rows[r] * inner), inner,
                out.begin() + static_cast<std::ptrdiff_t>(r * inner));
  }
  auto pa = a.node_ptr();
  std::vector<std::size_t> rv(rows.begin(), rows.end());
  return make_result(std::move(shape), std::move(out), {pa}, [pa, inner, rv = std::move(rv)](Node& self) {
    auto& g = pa->ensure_grad();
    for (std::size_t r = 0; r < rv.size(); ++r)
      for (std::size_t x = 0; x < inner; ++x) g[rv[r] * inner + x] += self.grad[r * inner + x];
  }, "select_rows");
}

Tensor gather_classes(const Tensor& a, std::span<const std::uint8_t> classes) {
  require_rank(a, 2, "gather_classes");
  const std::size_t n = a.dim(0), c = a.dim(1);
  if (classes.size() != n * n) throw ShapeError("gather_classes: class matrix must be n x n");
  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k = classes[i * n + j];
      if (k >= c) throw ShapeError("gather_classes: class id out of range");
      out[i * n + j] = a[i * c + k];
    }
  auto pa = a.node_ptr();
  std::vector<std::uint8_t> cv(classes.begin(), classes.end());
  return make_result({n, n}, std::move(out), {pa}, [pa, n, c, cv = std::move(cv)](Node& self) {
    auto& g = pa->ensure_grad();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) g[i * c + cv[i * n + j]] += self.grad[i * n + j];
  }, "gather_classes");
}

Tensor scatter_classes(const Tensor& a, std::span<const std::uint8_t> classes, std::size_t num_classes) {
  require_rank(a, 2, "scatter_classes");
  const std::size_t n = a.dim(0);
  if (a.dim(1) != n) throw ShapeError("scatter_classes: input must be square");
  if (classes.size() != n * n) throw ShapeError("scatter_classes: class matrix must be n x n");
  std::vector<double> out(n * num_classes, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k = classes[i * n + j];
      if (k >= num_classes) throw ShapeError("scatter_classes: class id out of range");
      out[i * num_classes + k] += a[i * n + j];
    }
  auto pa = a.node_ptr();
  std::vector<std::uint8_t> cv(classes.begin(), classes.end());
  return make_result({n, num_classes}, std::move(out), {pa},
                     [pa, n, num_classes, cv = std::move(cv)](Node& self) {
    auto& g = pa->ensure_grad();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[i * num_classes + cv[i * n + j]];
  }, "scatter_classes");
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1)
    throw ShapeError("backward requires a scalar loss, got shape " +
                     (loss.defined() ? shape_string(loss.shape()) : std::string("<undefined>")));
  Node* root = loss.node();
  if (!root->requires_grad) return;

  // Iterative post-order DFS -> topological order (parents before children).
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{root, 0}};
  visited.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  // Interior gradients are per-pass; leaves accumulate.
  for (Node* n : order)
    if (n->backward_fn) n->grad.assign(n->value.size(), 0.0);
  root->ensure_grad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backward_fn) (*it)->backward_fn(**it);
}

}  // namespace molmask::ad
