#include "pvml/optimizer.hpp"

#include <cmath>
#include <string>

#include "pvml/error.hpp"

namespace pvml {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::InvalidConfig, what);
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

void validate(const OptimizerConfig& config) {
  std::visit(Overloaded{
                 [](const SgdConfig& c) { require(c.learning_rate > 0.0, "learning rate must be > 0"); },
                 [](const AdaGradConfig& c) {
                   require(c.learning_rate > 0.0, "learning rate must be > 0");
                   require(c.epsilon >= 0.0, "epsilon must be >= 0");
                 },
                 [](const AdamConfig& c) {
                   require(c.learning_rate > 0.0, "learning rate must be > 0");
                   require(c.beta1 >= 0.0 && c.beta1 < 1.0, "beta1 must lie in [0, 1)");
                   require(c.beta2 >= 0.0 && c.beta2 < 1.0, "beta2 must lie in [0, 1)");
                   require(c.epsilon > 0.0, "epsilon must be > 0");
                 },
             },
             config);
}

ProvValue optimizer_provenance(const OptimizerConfig& config) {
  return std::visit(
      Overloaded{
          [](const SgdConfig& c) {
            return make_object_provenance("pvml.Sgd", {{"learning-rate", ProvValue::real(c.learning_rate)}}, {});
          },
          [](const AdaGradConfig& c) {
            return make_object_provenance("pvml.AdaGrad",
                                          {{"learning-rate", ProvValue::real(c.learning_rate)},
                                           {"epsilon", ProvValue::real(c.epsilon)}},
                                          {});
          },
          [](const AdamConfig& c) {
            return make_object_provenance("pvml.Adam",
                                          {{"learning-rate", ProvValue::real(c.learning_rate)},
                                           {"beta1", ProvValue::real(c.beta1)},
                                           {"beta2", ProvValue::real(c.beta2)},
                                           {"epsilon", ProvValue::real(c.epsilon)}},
                                          {});
          },
      },
      config);
}

OptimizerConfig optimizer_from_config(const ConfigView& view) {
  OptimizerConfig config;
  if (view.class_name() == "pvml.Sgd") {
    config = SgdConfig{view.get_flt("learning-rate")};
  } else if (view.class_name() == "pvml.AdaGrad") {
    config = AdaGradConfig{view.get_flt("learning-rate"), view.get_flt("epsilon")};
  } else if (view.class_name() == "pvml.Adam") {
    config = AdamConfig{view.get_flt("learning-rate"), view.get_flt("beta1"), view.get_flt("beta2"),
                        view.get_flt("epsilon")};
  } else {
    throw Error(ErrorCode::UnknownClass, "unknown optimizer class '" + view.class_name() + "'");
  }
  validate(config);
  return config;
}

OptimizerState make_optimizer_state(const OptimizerConfig& config, std::size_t num_parameters) {
  OptimizerState state;
  if (std::holds_alternative<AdaGradConfig>(config)) state.second.assign(num_parameters, 0.0);
  if (std::holds_alternative<AdamConfig>(config)) {
    state.first.assign(num_parameters, 0.0);
    state.second.assign(num_parameters, 0.0);
  }
  return state;
}

void optimizer_step(const OptimizerConfig& config, OptimizerState& state, std::span<double> params,
                    std::span<const double> grads) {
  if (params.size() != grads.size()) {
    throw Error(ErrorCode::ShapeMismatch, "parameter and gradient sizes differ (" + std::to_string(params.size()) +
                                              " vs " + std::to_string(grads.size()) + ")");
  }
  for (const double g : grads) {
    if (!std::isfinite(g)) throw Error(ErrorCode::NonFiniteGradient, "gradient contains NaN or infinity");
  }
  const std::size_t n = params.size();
  std::visit(
      Overloaded{
          [&](const SgdConfig& c) {
            for (std::size_t i = 0; i < n; ++i) params[i] -= c.learning_rate * grads[i];
          },
          [&](const AdaGradConfig& c) {
            if (state.second.size() != n) throw Error(ErrorCode::ShapeMismatch, "AdaGrad state size differs");
            for (std::size_t i = 0; i < n; ++i) {
              state.second[i] += grads[i] * grads[i];
              // A coordinate that has never seen a gradient does not move.
              if (grads[i] == 0.0) continue;
              params[i] -= c.learning_rate * grads[i] / (std::sqrt(state.second[i]) + c.epsilon);
            }
          },
          [&](const AdamConfig& c) {
            if (state.first.size() != n || state.second.size() != n) {
              throw Error(ErrorCode::ShapeMismatch, "Adam state size differs");
            }
            ++state.step;
            const double t = static_cast<double>(state.step);
            const double correction1 = 1.0 - std::pow(c.beta1, t);
            const double correction2 = 1.0 - std::pow(c.beta2, t);
            for (std::size_t i = 0; i < n; ++i) {
              state.first[i] = c.beta1 * state.first[i] + (1.0 - c.beta1) * grads[i];
              state.second[i] = c.beta2 * state.second[i] + (1.0 - c.beta2) * grads[i] * grads[i];
              const double m_hat = state.first[i] / correction1;
              const double v_hat = state.second[i] / correction2;
              params[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
            }
          },
      },
      config);
}

}  // namespace pvml
