#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"
#include "wic/encoder.hpp"
#include "wic/precomputed.hpp"

using namespace wic;

namespace {

EncoderConfig small_config(const Vocab& vocab, double scale = 0.1, std::uint64_t seed = 5) {
  EncoderConfig c;
  c.vocab = vocab;
  c.init_seed = seed;
  c.init_scale = scale;
  return c;
}

JointEncoding joint_of(const std::string& s1, CharRange sp1, const std::string& s2, CharRange sp2,
                       const Vocab& vocab) {
  WicExample ex;
  ex.id = "e";
  ex.word = "bank";
  ex.sentence1 = s1;
  ex.sentence2 = s2;
  ex.span1 = sp1;
  ex.span2 = sp2;
  return build_joint_input(ex, WhitespaceTokenizer(vocab));
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

}  // namespace

TEST(TokenizeWithOffsets, Examples) {
  auto t = tokenize_with_offsets("hot dog!");
  EXPECT_EQ(t.pieces, (std::vector<std::string>{"hot", "dog!"}));
  EXPECT_EQ(t.ranges, (std::vector<CharRange>{{0, 3}, {4, 8}}));

  t = tokenize_with_offsets("");
  EXPECT_TRUE(t.pieces.empty());
  EXPECT_TRUE(t.ranges.empty());

  t = tokenize_with_offsets("  a  b ");
  EXPECT_EQ(t.pieces, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(t.ranges, (std::vector<CharRange>{{2, 3}, {5, 6}}));
}

TEST(TokenizeWithOffsets, CodePointsAndUnicodeSpaces) {
  // U+3000 ideographic space splits too
  const auto t = tokenize_with_offsets("café naïve　x");
  EXPECT_EQ(t.pieces, (std::vector<std::string>{"café", "naïve", "x"}));
  EXPECT_EQ(t.ranges, (std::vector<CharRange>{{0, 4}, {5, 10}, {11, 12}}));
}

TEST(Vocab, ReservedIdsAndUnknown) {
  const auto vocab = Vocab::from_examples({wic::testing::make_example("a")});
  EXPECT_EQ(vocab.id("<s>"), Vocab::kBos);
  EXPECT_EQ(vocab.id("<sep>"), Vocab::kSep);
  EXPECT_EQ(vocab.id("</s>"), Vocab::kEos);
  EXPECT_EQ(vocab.id("<unk>"), Vocab::kUnk);
  EXPECT_EQ(vocab.id("never-seen"), Vocab::kUnk);
  EXPECT_NE(vocab.id("bank"), Vocab::kUnk);
  EXPECT_THROW(Vocab({"a", "b"}), ConfigError);
}

TEST(InitParams, DeterministicScaledAndZero) {
  const Vocab vocab = Vocab::from_examples({wic::testing::make_example("a")});
  const auto a = init_params(small_config(vocab));
  const auto b = init_params(small_config(vocab));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, init_params(small_config(vocab, 0.1, 6)));

  EncoderParams copy = a;
  HeadParams no_head;
  for (const auto& block : param_blocks(copy, no_head)) {
    for (double v : block.values) {
      EXPECT_GE(v, -0.1);
      EXPECT_LE(v, 0.1);
    }
  }
  auto zero = init_params(small_config(vocab, 0.0));
  for (const auto& block : param_blocks(zero, no_head)) {
    for (double v : block.values) EXPECT_EQ(v, 0.0);
  }
  EXPECT_EQ(a.token_embedding.rows, vocab.size());
  EXPECT_EQ(a.token_embedding.cols, 32u);
  EXPECT_EQ(a.position_embedding.rows, 128u);
  EXPECT_EQ(a.mix_weight.rows, 64u);
  EXPECT_EQ(a.mix_weight.cols, 64u);
  EXPECT_EQ(a.out_weight.rows, 32u);
  EXPECT_EQ(a.out_weight.cols, 64u);
}

TEST(Encode, ZeroParamsGiveZeroOutput) {
  const auto ex = wic::testing::make_example("a");
  const Vocab vocab = Vocab::from_examples({ex});
  const auto joint = build_joint_input(ex, WhitespaceTokenizer(vocab));
  const auto h = encode(joint, init_params(small_config(vocab, 0.0)));
  for (double v : h.data) EXPECT_EQ(v, 0.0);
}

TEST(Encode, ZeroOutWeightIsPureEmbedding) {
  const auto ex = wic::testing::make_example("a");
  const Vocab vocab = Vocab::from_examples({ex});
  const auto joint = build_joint_input(ex, WhitespaceTokenizer(vocab));
  auto params = init_params(small_config(vocab));
  std::fill(params.out_weight.data.begin(), params.out_weight.data.end(), 0.0);
  const auto h = encode(joint, params);
  for (std::size_t i = 0; i < joint.size(); ++i) {
    const auto t = static_cast<std::size_t>(joint.token_offsets.tokens[i]);
    for (std::size_t k = 0; k < 32; ++k) {
      EXPECT_EQ(h.row(i)[k], params.token_embedding.row(t)[k] + params.position_embedding.row(i)[k]);
    }
  }
}

TEST(Encode, ShapeAndLengthLimit) {
  const auto ex = wic::testing::make_example("a");  // 4 + 5 words -> L = 12
  const Vocab vocab = Vocab::from_examples({ex});
  auto ex9 = ex;
  ex9.sentence1 = "the bank";
  ex9.sentence2 = "the bank rose up";
  ex9.span2 = {4, 8};
  const auto joint = build_joint_input(ex9, WhitespaceTokenizer(vocab));
  ASSERT_EQ(joint.size(), 9u);
  const auto h = encode(joint, init_params(small_config(vocab)));
  EXPECT_EQ(h.rows, 9u);
  EXPECT_EQ(h.cols, 32u);

  auto cfg = small_config(vocab);
  cfg.max_len = 8;
  try {
    encode(joint, init_params(cfg));
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("sequence too long"), std::string::npos);
  }
}

TEST(Encode, ContextSensitivityWithinSentence) {
  const Vocab vocab(std::vector<std::string>{"<s>", "<sep>", "</s>", "<unk>", "bank", "river", "money", "the",
                                             "rose"});
  const auto params = init_params(small_config(vocab, 0.5, 11));
  // inputs differ only in one filler token of sentence2
  const auto a = joint_of("the bank", {4, 8}, "the river bank", {10, 14}, vocab);
  const auto b = joint_of("the bank", {4, 8}, "the money bank", {10, 14}, vocab);
  const auto ha = encode(a, params);
  const auto hb = encode(b, params);
  EXPECT_GT(distance(ha.row(a.target2[0]), hb.row(b.target2[0])), 0.0);
  // the changed filler moves every position that reads the sentence2 or pair context
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i > 0 && i < a.boundary) continue;  // sentence1 reads only its own mean
    EXPECT_GT(distance(ha.row(i), hb.row(i)), 0.0) << "position " << i;
  }
  EXPECT_EQ(encode(a, params), ha);
}

TEST(Precomputed, ThreeRecordsAtBaseDimension) {
  wic::testing::TempDir dir("pre3");
  PrecomputedStore store;
  Rng rng(4);
  for (int r = 0; r < 3; ++r) {
    PrecomputedRecord rec;
    const std::size_t L = 4 + static_cast<std::size_t>(r);
    rec.vectors = Matrix(L, 768);
    for (auto& v : rec.vectors.data) v = rng.uniform(-3, 3);
    rec.offsets.char_ranges.push_back({0, 0});
    for (std::size_t i = 1; i < L; ++i) rec.offsets.char_ranges.push_back({i * 2, i * 2 + 1});
    store.insert("r" + std::to_string(r), rec);
  }
  write_precomputed(dir / "emb.tsv", store);
  const auto loaded = load_precomputed(dir / "emb.tsv");
  EXPECT_EQ(loaded.size(), 3u);
  EXPECT_EQ(loaded.dim(), 768u);
  for (const auto& [id, rec] : loaded.records()) {
    EXPECT_EQ(rec.vectors.cols, 768u);
    EXPECT_EQ(rec, store.at(id));  // exact 64-bit round trip
  }
  EXPECT_THROW(loaded.at("missing"), DataError);
}

TEST(Precomputed, ShapeErrors) {
  PrecomputedStore store;
  PrecomputedRecord rec;
  rec.vectors = Matrix(3, 4);
  rec.offsets.char_ranges = {{0, 0}, {0, 1}};
  EXPECT_THROW(store.insert("a", rec), DataError);
  rec.offsets.char_ranges.push_back({2, 3});
  store.insert("a", rec);
  PrecomputedRecord other = rec;
  other.vectors = Matrix(3, 5);
  EXPECT_THROW(store.insert("b", other), DataError);

  wic::testing::TempDir dir("prebad");
  wic::testing::write_file(dir / "bad.tsv", "x\t2\t1\t0\t0\t0\t1\t0.5\n");
  EXPECT_THROW(load_precomputed(dir / "bad.tsv"), DataError);
  wic::testing::write_file(dir / "dims.tsv", "x\t1\t2\t0\t0\t1\t2\ny\t1\t3\t0\t0\t1\t2\t3\n");
  try {
    load_precomputed(dir / "dims.tsv");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("dimension"), std::string::npos) << e.what();
  }
}
