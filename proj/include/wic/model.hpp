#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wic/dualhead.hpp"
#include "wic/encoder.hpp"
#include "wic/spanalign.hpp"

namespace wic {

// toy: the reference encoder is trained jointly with the heads.
// precomputed: token vectors come from an external file and stay frozen.
enum class EncoderMode { toy, precomputed };

inline const char* to_string(EncoderMode m) { return m == EncoderMode::toy ? "toy" : "precomputed"; }

inline EncoderMode encoder_mode_from_string(std::string_view s) {
  if (s == "toy") return EncoderMode::toy;
  if (s == "precomputed") return EncoderMode::precomputed;
  throw ConfigError("unknown encoder mode '" + std::string(s) + "' (expected toy or precomputed)");
}

struct Model {
  EncoderMode mode = EncoderMode::toy;
  Vocab vocab;
  EncoderParams encoder;  // empty in precomputed mode
  HeadParams head;

  friend bool operator==(const Model&, const Model&) = default;
};

struct ModelGrad {
  EncoderParams encoder;
  HeadParams head;

  static ModelGrad zeros_like(const Model& m) {
    return {EncoderParams::zeros(m.encoder.token_embedding.rows, m.encoder.position_embedding.rows,
                                 m.encoder.token_embedding.cols, m.encoder.mix_bias.size()),
            HeadParams::zeros(m.head.dim(), m.head.dropout_p)};
  }
};

struct ParamBlock {
  std::string name;
  std::vector<std::size_t> shape;
  std::span<double> values;
};

// Named views over every trainable block, in a fixed order. Empty blocks
// (the encoder in precomputed mode) are omitted.
inline std::vector<ParamBlock> param_blocks(EncoderParams& enc, HeadParams& head) {
  std::vector<ParamBlock> out;
  const auto add = [&](std::string name, std::vector<std::size_t> shape, std::vector<double>& values) {
    if (!values.empty()) out.push_back({std::move(name), std::move(shape), values});
  };
  const auto add_matrix = [&](std::string name, Matrix& m) { add(std::move(name), {m.rows, m.cols}, m.data); };
  add_matrix("encoder.token_embedding", enc.token_embedding);
  add_matrix("encoder.position_embedding", enc.position_embedding);
  add_matrix("encoder.mix_weight", enc.mix_weight);
  add("encoder.mix_bias", {enc.mix_bias.size()}, enc.mix_bias);
  add_matrix("encoder.out_weight", enc.out_weight);
  add_matrix("head.dense_weight", head.dense_weight);
  add("head.dense_bias", {head.dense_bias.size()}, head.dense_bias);
  add_matrix("head.out_weight", head.out_weight);
  add("head.out_bias", {head.out_bias.size()}, head.out_bias);
  return out;
}

inline std::vector<ParamBlock> param_blocks(Model& m) { return param_blocks(m.encoder, m.head); }
inline std::vector<ParamBlock> param_blocks(ModelGrad& g) { return param_blocks(g.encoder, g.head); }

struct ExampleOutcome {
  PathOutputs outputs;
  double cross_entropy = 0.0;  // unweighted
  double cosine_loss = 0.0;    // unweighted
  double loss = 0.0;           // weighted sum
};

// One example through both paths. `frozen` supplies the token vectors in
// precomputed mode. When `grad` is given, grad_scale * d(loss)/d(params) is
// accumulated into it.
inline ExampleOutcome forward_backward(const Model& model, const JointEncoding& joint, const Matrix* frozen,
                                       SenseLabel label, const LossConfig& cfg, Rng* dropout_rng = nullptr,
                                       ModelGrad* grad = nullptr, double grad_scale = 1.0) {
  std::optional<EncoderTrace> trace;
  if (model.mode == EncoderMode::toy) {
    trace = encode_trace(joint, model.encoder);
  } else if (frozen == nullptr) {
    throw DataError("precomputed mode needs token vectors for every example");
  }
  const Matrix& h = trace ? trace->output : *frozen;
  if (h.cols != model.head.dim()) throw DataError("token vector dimension does not match the head");

  const auto cls = classifier_forward(h.row(0), model.head, dropout_rng);
  const Vector u = target_embedding(h, joint.target1);
  const Vector v = target_embedding(h, joint.target2);
  const int y = cosine_target(label);

  ExampleOutcome out;
  out.outputs.logits = cls.logits;
  out.outputs.similarity = cosine_similarity(u, v);
  out.outputs.probability = sigmoid(out.outputs.similarity);
  out.cross_entropy = cross_entropy(cls.logits, label);
  out.cosine_loss = cosine_embedding_loss(out.outputs.similarity, y, cfg.margin);
  out.loss = cfg.lambda_ce * out.cross_entropy + cfg.lambda_cos * out.cosine_loss;
  if (grad == nullptr) return out;

  Matrix grad_h(h.rows, h.cols);
  if (cfg.lambda_ce != 0.0) {
    auto g = cross_entropy_grad(cls.logits, label);
    for (auto& x : g) x *= cfg.lambda_ce * grad_scale;
    classifier_backward(h.row(0), model.head, cls, g, grad->head, grad_h.row(0));
  }
  const double ds = cfg.lambda_cos * grad_scale * cosine_embedding_loss_grad(out.outputs.similarity, y, cfg.margin);
  if (ds != 0.0) {
    Vector gu(u.size(), 0.0), gv(v.size(), 0.0);
    cosine_similarity_backward(u, v, ds, gu, gv);
    for (auto i : joint.target1) axpy(1.0 / static_cast<double>(joint.target1.size()), gu, grad_h.row(i));
    for (auto i : joint.target2) axpy(1.0 / static_cast<double>(joint.target2.size()), gv, grad_h.row(i));
  }
  if (trace) encode_backward(joint, model.encoder, *trace, grad_h, grad->encoder);
  return out;
}

}  // namespace wic
