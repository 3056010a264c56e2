#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace wic;

namespace {

struct GradCheck {
  double worst = 0.0;
  std::string where;
  ExampleOutcome outcome;
};

// Analytic gradient of one example against central differences. Dropout is
// active, with the mask fixed by reseeding for every evaluation.
GradCheck check(wic::testing::TinyInstance& t, const LossConfig& cfg, const Matrix* frozen = nullptr) {
  const std::uint64_t dropout_seed = 77;
  ModelGrad grad = ModelGrad::zeros_like(t.model);
  Rng rng(dropout_seed);
  GradCheck r;
  r.outcome = forward_backward(t.model, t.joint, frozen, t.label, cfg, &rng, &grad);
  const auto loss = [&] {
    Rng replay(dropout_seed);
    return forward_backward(t.model, t.joint, frozen, t.label, cfg, &replay).loss;
  };
  std::tie(r.worst, r.where) = wic::testing::max_gradient_error(t.model, grad, loss);
  return r;
}

}  // namespace

TEST(Gradients, CombinedLossBothLabels) {
  Rng rng(2024);
  int seen[2] = {0, 0};
  for (int i = 0; i < 30; ++i) {
    auto t = wic::testing::random_tiny_instance(rng);
    t.label = i % 2 ? SenseLabel::same : SenseLabel::different;
    LossConfig cfg;
    cfg.margin = -1.0;  // keep the y = -1 hinge active
    const auto r = check(t, cfg);
    ++seen[to_numeric(t.label)];
    EXPECT_LE(r.worst, 1e-4) << "instance " << i << " at " << r.where;
  }
  EXPECT_EQ(seen[0], 15);
  EXPECT_EQ(seen[1], 15);
}

TEST(Gradients, InactiveHingeHasZeroCosineGradient) {
  Rng rng(7);
  for (int i = 0; i < 10; ++i) {
    auto t = wic::testing::random_tiny_instance(rng);
    t.label = SenseLabel::different;
    LossConfig cfg;
    cfg.margin = 1.0;  // s <= 1 always, so the cosine term is flat
    cfg.lambda_ce = 0.0;
    ModelGrad grad = ModelGrad::zeros_like(t.model);
    const auto out = forward_backward(t.model, t.joint, nullptr, t.label, cfg, nullptr, &grad);
    EXPECT_EQ(out.loss, 0.0);
    for (const auto& block : param_blocks(grad)) {
      for (double g : block.values) EXPECT_EQ(g, 0.0) << block.name;
    }
    cfg.lambda_ce = 1.0;
    EXPECT_LE(check(t, cfg).worst, 1e-4);
  }
}

TEST(Gradients, SingleLossWeightsAndMargins) {
  Rng rng(31);
  for (int i = 0; i < 12; ++i) {
    auto t = wic::testing::random_tiny_instance(rng);
    LossConfig cfg;
    cfg.lambda_ce = i % 3 == 0 ? 0.0 : 0.7;
    cfg.lambda_cos = i % 3 == 1 ? 0.0 : 1.3;
    cfg.margin = rng.uniform(-1.0, -0.5);
    const auto r = check(t, cfg);
    EXPECT_LE(r.worst, 1e-4) << r.where;
  }
}

TEST(Gradients, PrecomputedModeTrainsHeadOnly) {
  Rng rng(5);
  auto t = wic::testing::random_tiny_instance(rng);
  const Matrix frozen = encode(t.joint, t.model.encoder);
  t.model.mode = EncoderMode::precomputed;
  t.model.encoder = EncoderParams{};
  ASSERT_EQ(param_blocks(t.model).size(), 4u);
  for (auto label : {SenseLabel::same, SenseLabel::different}) {
    t.label = label;
    LossConfig cfg;
    cfg.margin = -1.0;
    EXPECT_LE(check(t, cfg, &frozen).worst, 1e-4);
  }
  EXPECT_THROW(forward_backward(t.model, t.joint, nullptr, t.label, LossConfig{}), DataError);
}

TEST(Gradients, BatchScaleIsLinear) {
  Rng rng(13);
  auto t = wic::testing::random_tiny_instance(rng);
  ModelGrad one = ModelGrad::zeros_like(t.model), half = ModelGrad::zeros_like(t.model);
  forward_backward(t.model, t.joint, nullptr, t.label, LossConfig{}, nullptr, &one, 1.0);
  forward_backward(t.model, t.joint, nullptr, t.label, LossConfig{}, nullptr, &half, 0.5);
  auto a = param_blocks(one);
  auto b = param_blocks(half);
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (std::size_t i = 0; i < a[k].values.size(); ++i) EXPECT_DOUBLE_EQ(a[k].values[i] * 0.5, b[k].values[i]);
  }
}
