#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"
#include "wic/dualhead.hpp"

using namespace wic;

TEST(ClassifierLogits, ZeroParamsAndBiasPassthrough) {
  Matrix h(3, 4);
  for (std::size_t k = 0; k < h.data.size(); ++k) h.data[k] = 0.1 * static_cast<double>(k);
  auto params = HeadParams::zeros(4);
  EXPECT_EQ(classifier_logits(h, params), (Logits{0.0, 0.0}));
  params.out_bias = {3.0, -1.0};
  EXPECT_EQ(classifier_logits(h, params), (Logits{3.0, -1.0}));
}

TEST(ClassifierLogits, DropoutOnlyInTrainMode) {
  Rng init(3);
  auto params = init_head(6, 0.0, 0.5, init);
  Matrix h(2, 6);
  for (auto& v : h.data) v = init.uniform(-1, 1);
  Rng rng(1);
  EXPECT_EQ(classifier_logits(h, params, &rng), classifier_logits(h, params));

  params.dropout_p = 0.5;
  const auto eval1 = classifier_logits(h, params);
  EXPECT_EQ(eval1, classifier_logits(h, params));
  bool differs = false;
  for (int i = 0; i < 20; ++i) differs = differs || classifier_logits(h, params, &rng) != eval1;
  EXPECT_TRUE(differs);

  // inverted dropout keeps the expected activation
  const auto trace = classifier_forward(h.row(0), params, &rng);
  for (double m : trace.mask) EXPECT_TRUE(m == 0.0 || m == 2.0);
}

TEST(CrossEntropy, Examples) {
  EXPECT_NEAR(cross_entropy({0, 0}, SenseLabel::same), std::log(2.0), 1e-15);
  EXPECT_NEAR(cross_entropy({0, 0}, SenseLabel::different), 0.693147, 1e-6);
  EXPECT_EQ(cross_entropy({100, 0}, SenseLabel::different), std::log1p(std::exp(-100.0)));
  EXPECT_LT(cross_entropy({100, 0}, SenseLabel::different), 1e-40);
  EXPECT_NEAR(cross_entropy({0, 100}, SenseLabel::different), 100.0, 1e-12);
}

TEST(CrossEntropy, ShiftInvariant) {
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    const Logits z{rng.uniform(-20, 20), rng.uniform(-20, 20)};
    const double k = rng.uniform(-50, 50);
    for (auto label : {SenseLabel::same, SenseLabel::different}) {
      EXPECT_NEAR(cross_entropy({z[0] + k, z[1] + k}, label), cross_entropy(z, label), 1e-12);
    }
  }
}

TEST(TargetEmbedding, Examples) {
  Matrix h(3, 2);
  h.data = {1, 0, 0, 1, 4, 5};
  EXPECT_EQ(target_embedding(h, std::vector<std::size_t>{2}), (Vector{4, 5}));
  EXPECT_EQ(target_embedding(h, std::vector<std::size_t>{0, 1}), (Vector{0.5, 0.5}));
  EXPECT_EQ(target_embedding(h, std::vector<std::size_t>{1, 0}), target_embedding(h, std::vector<std::size_t>{0, 1}));
  EXPECT_THROW(target_embedding(h, std::vector<std::size_t>{}), AlignmentError);
}

TEST(CosineSimilarity, Examples) {
  EXPECT_NEAR(cosine_similarity(Vector{0.3, -2, 5}, Vector{0.3, -2, 5}), 1.0, 1e-15);
  EXPECT_EQ(cosine_similarity(Vector{1, 0}, Vector{0, 3}), 0.0);
  EXPECT_NEAR(cosine_similarity(Vector{1, 0}, Vector{1, 1}), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(cosine_similarity(Vector{1, 0}, Vector{1, 1}), 0.707107, 1e-6);
  EXPECT_EQ(cosine_similarity(Vector{0, 0}, Vector{1, 1}), 0.0);
  const double tiny = cosine_similarity(Vector{1e-12, 0}, Vector{1, 0});
  EXPECT_LT(std::abs(tiny), 1e-3);
}

TEST(CosineEmbeddingLoss, Examples) {
  EXPECT_EQ(cosine_embedding_loss(1.0, 1, 0.0), 0.0);
  EXPECT_NEAR(cosine_embedding_loss(0.3, 1, 0.0), 0.7, 1e-15);
  EXPECT_EQ(cosine_embedding_loss(0.4, -1, 0.0), 0.4);
  EXPECT_EQ(cosine_embedding_loss(-0.2, -1, 0.0), 0.0);
  EXPECT_THROW(cosine_embedding_loss(0.1, 0, 0.0), DataError);
}

TEST(CosineEmbeddingLoss, ZeroExactlyWhereExpected) {
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const double s = rng.uniform(-1, 1);
    const double margin = rng.uniform(-0.5, 0.5);
    EXPECT_GE(cosine_embedding_loss(s, 1, margin), 0.0);
    EXPECT_GE(cosine_embedding_loss(s, -1, margin), 0.0);
    EXPECT_EQ(cosine_embedding_loss(s, -1, margin) == 0.0, s <= margin);
  }
  EXPECT_EQ(cosine_embedding_loss(1.0, 1, 0.3), 0.0);
}

TEST(CombinedLoss, Examples) {
  LossConfig cfg;
  // CE ln 2 and cosine 0.7
  EXPECT_NEAR(combined_loss({0, 0}, 0.3, SenseLabel::same, cfg), 1.393147, 1e-6);
  cfg.lambda_cos = 0.0;
  EXPECT_EQ(combined_loss({1.5, -0.5}, 0.3, SenseLabel::same, cfg), cross_entropy({1.5, -0.5}, SenseLabel::same));
  cfg = LossConfig{};
  cfg.lambda_ce = 0.0;
  EXPECT_EQ(combined_loss({1.5, -0.5}, 1.0, SenseLabel::same, cfg), 0.0);
}

TEST(Predict, TiesAndPaths) {
  const LossConfig cfg;
  PathOutputs out;
  out.logits = {2.0, -1.0};
  EXPECT_EQ(predict(out, OutputPath::classifier, cfg), SenseLabel::different);
  out.logits = {-1.0, 2.0};
  EXPECT_EQ(predict(out, OutputPath::classifier, cfg), SenseLabel::same);
  out.logits = {0.5, 0.5};
  EXPECT_EQ(predict(out, OutputPath::classifier, cfg), SenseLabel::different);

  out.similarity = 0.2;
  out.probability = sigmoid(0.2);
  EXPECT_NEAR(out.probability, 0.5498, 1e-4);
  EXPECT_EQ(predict(out, OutputPath::similarity, cfg), SenseLabel::same);
  out.similarity = 0.0;
  out.probability = sigmoid(0.0);
  EXPECT_EQ(out.probability, 0.5);
  EXPECT_EQ(predict(out, OutputPath::similarity, cfg), SenseLabel::different);
}

TEST(Predict, SimilarityDecisionIsScaleInvariant) {
  Rng rng(12);
  const LossConfig cfg;
  for (int i = 0; i < 300; ++i) {
    Vector u(5), v(5);
    for (auto& x : u) x = rng.uniform(-1, 1);
    for (auto& x : v) x = rng.uniform(-1, 1);
    const double a = std::exp(rng.uniform(-5, 5)), b = std::exp(rng.uniform(-5, 5));
    Vector ua = u, vb = v;
    for (auto& x : ua) x *= a;
    for (auto& x : vb) x *= b;
    PathOutputs o1, o2;
    o1.similarity = cosine_similarity(u, v);
    o1.probability = sigmoid(o1.similarity);
    o2.similarity = cosine_similarity(ua, vb);
    o2.probability = sigmoid(o2.similarity);
    EXPECT_EQ(predict(o1, OutputPath::similarity, cfg), predict(o2, OutputPath::similarity, cfg));
  }
}

TEST(LossConfig, Validation) {
  LossConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.lambda_ce = 0;
  cfg.lambda_cos = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = LossConfig{};
  cfg.threshold_p = 0.75;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.threshold_p = 0.26;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.threshold_p = 0.7;
  EXPECT_NO_THROW(cfg.validate());
  for (double s : {-1.0, 0.0, 1.0}) {
    EXPECT_GT(sigmoid(s), 0.2689);
    EXPECT_LT(sigmoid(s), 0.7311);
  }
}
