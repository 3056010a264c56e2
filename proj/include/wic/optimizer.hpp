#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wic/error.hpp"
#include "wic/model.hpp"

namespace wic {

enum class OptimizerKind { adam, sgd };

inline const char* to_string(OptimizerKind k) { return k == OptimizerKind::adam ? "adam" : "sgd"; }

inline OptimizerKind optimizer_from_string(std::string_view s) {
  if (s == "adam") return OptimizerKind::adam;
  if (s == "sgd") return OptimizerKind::sgd;
  throw ConfigError("unknown optimizer '" + std::string(s) + "' (expected adam or sgd)");
}

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-3;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct MomentState {
  Vector m;
  Vector v;
};

// One update of a parameter block at step t >= 1. Weight decay is decoupled:
// it shrinks theta directly by lr * wd * theta, independent of the gradient.
inline void optimizer_step(std::span<double> theta, std::span<const double> grad, MomentState& state,
                           std::size_t t, const OptimizerConfig& cfg, std::string_view block = "parameters") {
  if (theta.size() != grad.size()) throw Error("gradient shape mismatch for " + std::string(block));
  if (t < 1) throw Error("optimizer step count must start at 1");
  for (double g : grad) {
    if (!std::isfinite(g)) throw Error("non-finite gradient in " + std::string(block));
  }
  const double lr = cfg.learning_rate;
  const double decay = lr * cfg.weight_decay;

  if (cfg.kind == OptimizerKind::sgd) {
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = theta[i] - lr * grad[i] - decay * theta[i];
    return;
  }

  if (state.m.size() != theta.size()) {
    state.m.assign(theta.size(), 0.0);
    state.v.assign(theta.size(), 0.0);
  }
  const double td = static_cast<double>(t);
  const double c1 = 1.0 - std::pow(cfg.beta1, td);
  const double c2 = 1.0 - std::pow(cfg.beta2, td);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = grad[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    theta[i] = theta[i] - lr * m_hat / (std::sqrt(v_hat) + cfg.eps) - decay * theta[i];
  }
}

// Moment buffers for every block of a model.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig cfg) : cfg_(cfg) {}

  void step(Model& model, ModelGrad& grad) {
    auto params = param_blocks(model);
    auto grads = param_blocks(grad);
    if (params.size() != grads.size()) throw Error("gradient layout does not match the model");
    if (states_.size() != params.size()) states_.resize(params.size());
    ++t_;
    for (std::size_t b = 0; b < params.size(); ++b) {
      optimizer_step(params[b].values, grads[b].values, states_[b], t_, cfg_, params[b].name);
    }
  }

  std::size_t steps() const { return t_; }

 private:
  OptimizerConfig cfg_;
  std::vector<MomentState> states_;
  std::size_t t_ = 0;
};

}  // namespace wic
