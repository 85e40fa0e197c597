#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "pvml/provenance.hpp"

namespace pvml {

struct SgdConfig {
  double learning_rate = 0.1;
  bool operator==(const SgdConfig&) const = default;
};

struct AdaGradConfig {
  double learning_rate = 0.1;
  double epsilon = 1e-6;
  bool operator==(const AdaGradConfig&) const = default;
};

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool operator==(const AdamConfig&) const = default;
};

using OptimizerConfig = std::variant<SgdConfig, AdaGradConfig, AdamConfig>;

/// Throws InvalidConfig unless lr > 0, 0 <= beta < 1, and epsilon > 0
/// (AdaGrad also accepts epsilon = 0).
void validate(const OptimizerConfig& config);

/// Obj pvml.Sgd / pvml.AdaGrad / pvml.Adam with the hyperparameters as
/// configuration.
ProvValue optimizer_provenance(const OptimizerConfig& config);
OptimizerConfig optimizer_from_config(const ConfigView& view);

/// AdaGrad keeps squared-gradient sums in `second`; Adam keeps moments in
/// `first` / `second` and its timestep in `step`.
struct OptimizerState {
  std::vector<double> first;
  std::vector<double> second;
  std::int64_t step = 0;
};

OptimizerState make_optimizer_state(const OptimizerConfig& config, std::size_t num_parameters);

/// One in-place update of `params`. Throws ShapeMismatch or NonFiniteGradient.
void optimizer_step(const OptimizerConfig& config, OptimizerState& state, std::span<double> params,
                    std::span<const double> grads);

}  // namespace pvml
