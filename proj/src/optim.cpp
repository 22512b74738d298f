#include "molmask/optim.hpp"

#include <cmath>

namespace molmask::ad {

Tensor uniform_init(Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> v(numel(shape));
  for (double& x : v) x = (2.0 * uniform_real(rng) - 1.0) * bound;
  return Tensor::from(std::move(shape), std::move(v), true);
}

void check_parameters_finite(const ParameterList& params) {
  for (const auto& p : params)
    for (double x : p.tensor.values())
      if (!std::isfinite(x)) throw NumericalError("parameter '" + p.name + "' became non-finite");
}

void zero_grads(ParameterList& params) {
  for (auto& p : params) p.tensor.zero_grad();
}

std::vector<std::vector<double>> snapshot(const ParameterList& params) {
  std::vector<std::vector<double>> out;
  out.reserve(params.size());
  for (const auto& p : params) out.emplace_back(p.tensor.values().begin(), p.tensor.values().end());
  return out;
}

void restore(ParameterList& params, const std::vector<std::vector<double>>& values) {
  if (values.size() != params.size()) throw ShapeError("snapshot does not match parameter list");
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto dst = params[k].tensor.mutable_values();
    if (dst.size() != values[k].size()) throw ShapeError("snapshot size mismatch for " + params[k].name);
    std::copy(values[k].begin(), values[k].end(), dst.begin());
  }
}

void Adam::step(ParameterList& params) {
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.tensor.size(), 0.0);
      v_.emplace_back(p.tensor.size(), 0.0);
    }
  }
  if (m_.size() != params.size()) throw ShapeError("Adam state does not match parameter list");
  for (const auto& p : params)
    if (!p.tensor.has_grad()) throw NumericalError("missing gradient for parameter '" + p.name + "'");

  ++step_;
  const double t = static_cast<double>(step_);
  const double c1 = 1.0 - std::pow(cfg_.beta1, t);
  const double c2 = 1.0 - std::pow(cfg_.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& tensor = params[k].tensor;
    auto theta = tensor.mutable_values();
    auto g = tensor.mutable_grad();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      theta[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
    tensor.zero_grad();
  }
  check_parameters_finite(params);
}

}  // namespace molmask::ad
