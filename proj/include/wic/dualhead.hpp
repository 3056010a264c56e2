#pragma once

// The two output paths and their losses.
//
// Classifier path: pooled start-token vector -> dense -> tanh -> dropout ->
// dense -> logits ordered (different, same), trained with cross-entropy.
//
// Similarity path: mean of the target-token vectors in each sentence ->
// cosine similarity -> sigmoid, trained with the cosine embedding loss.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string_view>
#include <vector>

#include "wic/corpus.hpp"
#include "wic/error.hpp"
#include "wic/linalg.hpp"
#include "wic/random.hpp"

namespace wic {

struct HeadParams {
  Matrix dense_weight;  // d x d
  Vector dense_bias;    // d
  Matrix out_weight;    // 2 x d
  Vector out_bias;      // 2
  double dropout_p = 0.1;

  std::size_t dim() const { return dense_bias.size(); }

  static HeadParams zeros(std::size_t d, double dropout_p = 0.1) {
    return {Matrix(d, d), Vector(d, 0.0), Matrix(2, d), Vector(2, 0.0), dropout_p};
  }

  friend bool operator==(const HeadParams&, const HeadParams&) = default;
};

inline HeadParams init_head(std::size_t d, double dropout_p, double scale, Rng& rng) {
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw ConfigError("dropout_p must lie in [0, 1)");
  auto p = HeadParams::zeros(d, dropout_p);
  for (auto* block : {&p.dense_weight.data, &p.dense_bias, &p.out_weight.data, &p.out_bias}) {
    for (auto& v : *block) v = scale == 0.0 ? 0.0 : rng.uniform(-scale, scale);
  }
  return p;
}

inline double sigmoid(double s) { return 1.0 / (1.0 + std::exp(-s)); }

struct LossConfig {
  double lambda_ce = 1.0;
  double lambda_cos = 1.0;
  double margin = 0.0;
  double threshold_p = 0.5;

  void validate() const {
    if (!(lambda_ce >= 0.0) || !(lambda_cos >= 0.0)) throw ConfigError("loss weights must be >= 0");
    if (lambda_ce == 0.0 && lambda_cos == 0.0) throw ConfigError("at least one loss weight must be positive");
    if (!(margin >= -1.0 && margin <= 1.0)) throw ConfigError("cosine margin must lie in [-1, 1]");
    // sigmoid of a cosine is confined to (sigmoid(-1), sigmoid(1))
    if (!(threshold_p > sigmoid(-1.0) && threshold_p < sigmoid(1.0))) {
      throw ConfigError("threshold_p must lie inside (sigmoid(-1), sigmoid(1)) = (0.2689, 0.7311)");
    }
  }
};

enum class OutputPath { classifier, similarity };

inline const char* to_string(OutputPath p) { return p == OutputPath::classifier ? "classifier" : "similarity"; }

inline OutputPath output_path_from_string(std::string_view s) {
  if (s == "classifier") return OutputPath::classifier;
  if (s == "similarity") return OutputPath::similarity;
  throw ConfigError("unknown output path '" + std::string(s) + "' (expected classifier or similarity)");
}

using Logits = std::array<double, 2>;

struct PathOutputs {
  Logits logits{};
  double similarity = 0.0;
  double probability = 0.5;
};

struct ClassifierTrace {
  Logits logits{};
  Vector activation;  // tanh(W1 pooled + b1)
  Vector mask;        // inverted-dropout multipliers, all 1 in eval mode
};

// Passing a generator selects train mode (inverted dropout); nullptr is eval.
inline ClassifierTrace classifier_forward(std::span<const double> pooled, const HeadParams& params,
                                          Rng* dropout_rng = nullptr) {
  const std::size_t d = params.dim();
  ClassifierTrace t{{}, Vector(d), Vector(d, 1.0)};
  matvec(params.dense_weight, pooled, t.activation);
  for (std::size_t k = 0; k < d; ++k) t.activation[k] = std::tanh(t.activation[k] + params.dense_bias[k]);
  if (dropout_rng && params.dropout_p > 0.0) {
    const double keep = 1.0 / (1.0 - params.dropout_p);
    for (auto& m : t.mask) m = dropout_rng->bernoulli(params.dropout_p) ? 0.0 : keep;
  }
  Vector dropped(d);
  for (std::size_t k = 0; k < d; ++k) dropped[k] = t.activation[k] * t.mask[k];
  for (std::size_t c = 0; c < 2; ++c) {
    t.logits[c] = dot(params.out_weight.row(c), dropped) + params.out_bias[c];
  }
  return t;
}

// Pools the start-of-sequence vector h[0].
inline Logits classifier_logits(const Matrix& h, const HeadParams& params, Rng* dropout_rng = nullptr) {
  return classifier_forward(h.row(0), params, dropout_rng).logits;
}

// Accumulates head gradients; adds d(loss)/d(pooled) into grad_pooled.
inline void classifier_backward(std::span<const double> pooled, const HeadParams& params,
                                const ClassifierTrace& t, const Logits& grad_logits, HeadParams& grad,
                                std::span<double> grad_pooled) {
  const std::size_t d = params.dim();
  Vector dropped(d), grad_act(d, 0.0);
  for (std::size_t k = 0; k < d; ++k) dropped[k] = t.activation[k] * t.mask[k];
  add_outer(grad.out_weight, grad_logits, dropped);
  for (std::size_t c = 0; c < 2; ++c) grad.out_bias[c] += grad_logits[c];
  matvec_transposed_add(params.out_weight, grad_logits, grad_act);
  for (std::size_t k = 0; k < d; ++k) {
    grad_act[k] *= t.mask[k] * (1.0 - t.activation[k] * t.activation[k]);
    grad.dense_bias[k] += grad_act[k];
  }
  add_outer(grad.dense_weight, grad_act, pooled);
  matvec_transposed_add(params.dense_weight, grad_act, grad_pooled);
}

inline double cross_entropy(const Logits& z, SenseLabel label) {
  const double zc = z[static_cast<std::size_t>(to_numeric(label))];
  const double m = std::max(z[0], z[1]);
  return (m - zc) + std::log1p(std::exp(-std::abs(z[0] - z[1])));
}

// softmax(z) - onehot(label)
inline Logits cross_entropy_grad(const Logits& z, SenseLabel label) {
  const double p_same = sigmoid(z[1] - z[0]);
  Logits g{1.0 - p_same, p_same};
  g[static_cast<std::size_t>(to_numeric(label))] -= 1.0;
  return g;
}

inline Vector target_embedding(const Matrix& h, std::span<const std::size_t> indices) {
  if (indices.empty()) throw AlignmentError("target index set is empty");
  Vector mean(h.cols, 0.0);
  for (auto i : indices) {
    if (i >= h.rows) throw AlignmentError("target index out of range");
    axpy(1.0, h.row(i), mean);
  }
  for (auto& v : mean) v /= static_cast<double>(indices.size());
  return mean;
}

inline constexpr double kCosineEps = 1e-8;

inline double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  const double nu = std::max(std::sqrt(dot(u, u)), kCosineEps);
  const double nv = std::max(std::sqrt(dot(v, v)), kCosineEps);
  return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

// Adds upstream * ds/du and upstream * ds/dv. The clamp contributes a zero
// derivative when it is active.
inline void cosine_similarity_backward(std::span<const double> u, std::span<const double> v, double upstream,
                                       std::span<double> grad_u, std::span<double> grad_v) {
  const double norm_u = std::sqrt(dot(u, u));
  const double norm_v = std::sqrt(dot(v, v));
  const double nu = std::max(norm_u, kCosineEps);
  const double nv = std::max(norm_v, kCosineEps);
  const double raw = dot(u, v) / (nu * nv);
  if (raw > 1.0 || raw < -1.0 || upstream == 0.0) return;
  const double inv = upstream / (nu * nv);
  const double su = norm_u > kCosineEps ? upstream * raw / (norm_u * norm_u) : 0.0;
  const double sv = norm_v > kCosineEps ? upstream * raw / (norm_v * norm_v) : 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    grad_u[k] += inv * v[k] - su * u[k];
    grad_v[k] += inv * u[k] - sv * v[k];
  }
}

inline double cosine_embedding_loss(double s, int y, double margin) {
  if (y == 1) return 1.0 - s;
  if (y == -1) return std::max(0.0, s - margin);
  throw DataError("cosine target must be +1 or -1");
}

inline double cosine_embedding_loss_grad(double s, int y, double margin) {
  if (y == 1) return -1.0;
  return s > margin ? 1.0 : 0.0;
}

inline double combined_loss(const Logits& logits, double s, SenseLabel label, const LossConfig& cfg) {
  return cfg.lambda_ce * cross_entropy(logits, label) +
         cfg.lambda_cos * cosine_embedding_loss(s, cosine_target(label), cfg.margin);
}

// Ties go to `different` on both paths.
inline SenseLabel predict(const PathOutputs& out, OutputPath path, const LossConfig& cfg) {
  if (path == OutputPath::classifier) {
    return out.logits[1] > out.logits[0] ? SenseLabel::same : SenseLabel::different;
  }
  return out.probability > cfg.threshold_p ? SenseLabel::same : SenseLabel::different;
}

}  // namespace wic
