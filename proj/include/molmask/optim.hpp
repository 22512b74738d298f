#pragma once

#include <string>
#include <vector>

#include "molmask/random.hpp"
#include "molmask/tensor.hpp"

namespace molmask::ad {

/// A named trainable tensor.
struct Parameter {
  std::string name;
  Tensor tensor;
};

using ParameterList = std::vector<Parameter>;

/// uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) initialized trainable tensor.
Tensor uniform_init(Shape shape, std::size_t fan_in, Rng& rng);

/// Throws NumericalError if any parameter holds a non-finite value.
void check_parameters_finite(const ParameterList& params);

void zero_grads(ParameterList& params);

/// Snapshot/restore of parameter values (used for best-checkpoint tracking).
std::vector<std::vector<double>> snapshot(const ParameterList& params);
void restore(ParameterList& params, const std::vector<std::vector<double>>& values);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction. Moments are allocated on the first step and
/// keyed by position in the parameter list.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  /// Applies one update using the accumulated gradients, then zeroes them.
  void step(ParameterList& params);

  std::size_t steps() const { return step_; }
  const AdamConfig& config() const { return cfg_; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }

 private:
  AdamConfig cfg_;
  std::size_t step_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace molmask::ad
