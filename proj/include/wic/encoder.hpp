#pragma once

// Reference encoder: token + position embeddings followed by one residual
// context-mixing block,
//
//   x_i = E[t_i] + P[i]
//   h_i = x_i + U relu(W [x_i ; c_i] + b)
//
// where c_i is the mean of x over the sentence segment containing i. Special
// tokens (start, separator, end) see the mean over the whole pair, so the
// pooled start token summarises both sentences while each target token is
// contextualised by its own sentence.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wic/corpus.hpp"
#include "wic/error.hpp"
#include "wic/linalg.hpp"
#include "wic/random.hpp"
#include "wic/spanalign.hpp"
#include "wic/unicode.hpp"

namespace wic {

struct TokenizedText {
  std::vector<std::string> pieces;
  std::vector<CharRange> ranges;
};

// Splits on Unicode whitespace; ranges are exact code-point extents.
inline TokenizedText tokenize_with_offsets(std::string_view text) {
  const auto cps = unicode::decode(text);
  TokenizedText out;
  std::size_t i = 0;
  while (i < cps.size()) {
    while (i < cps.size() && unicode::is_space(cps[i])) ++i;
    if (i == cps.size()) break;
    const std::size_t start = i;
    while (i < cps.size() && !unicode::is_space(cps[i])) ++i;
    out.pieces.push_back(unicode::encode(std::u32string_view(cps.data() + start, i - start)));
    out.ranges.push_back({start, i});
  }
  return out;
}

class Vocab {
 public:
  static constexpr TokenId kBos = 0;
  static constexpr TokenId kSep = 1;
  static constexpr TokenId kEos = 2;
  static constexpr TokenId kUnk = 3;

  Vocab() : tokens_{"<s>", "<sep>", "</s>", "<unk>"} { reindex(); }

  explicit Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    if (tokens_.size() < 4 || tokens_[0] != "<s>" || tokens_[1] != "<sep>" || tokens_[2] != "</s>" ||
        tokens_[3] != "<unk>") {
      throw ConfigError("vocabulary must start with the reserved tokens <s> <sep> </s> <unk>");
    }
    reindex();
  }

  // Vocabulary over every whitespace token of both sentences, sorted.
  static Vocab from_examples(const std::vector<WicExample>& examples) {
    std::set<std::string> seen;
    for (const auto& ex : examples) {
      for (auto& p : tokenize_with_offsets(ex.sentence1).pieces) seen.insert(std::move(p));
      for (auto& p : tokenize_with_offsets(ex.sentence2).pieces) seen.insert(std::move(p));
    }
    std::vector<std::string> tokens{"<s>", "<sep>", "</s>", "<unk>"};
    for (const auto& t : seen) {
      if (std::find(tokens.begin(), tokens.end(), t) == tokens.end()) tokens.push_back(t);
    }
    return Vocab(std::move(tokens));
  }

  TokenId id(const std::string& token) const {
    const auto it = index_.find(token);
    return it == index_.end() ? kUnk : it->second;
  }

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

 private:
  void reindex() {
    index_.clear();
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
        throw ConfigError("duplicate vocabulary entry '" + tokens_[i] + "'");
      }
    }
  }

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

class WhitespaceTokenizer {
 public:
  explicit WhitespaceTokenizer(const Vocab& vocab) : vocab_(&vocab) {}

  TokenOffsets tokenize(std::string_view text) const {
    auto pieces = tokenize_with_offsets(text);
    TokenOffsets out;
    out.tokens.reserve(pieces.pieces.size());
    for (const auto& p : pieces.pieces) out.tokens.push_back(vocab_->id(p));
    out.char_ranges = std::move(pieces.ranges);
    return out;
  }

  TokenId bos_id() const { return Vocab::kBos; }
  TokenId sep_id() const { return Vocab::kSep; }
  TokenId eos_id() const { return Vocab::kEos; }

 private:
  const Vocab* vocab_;
};

struct EncoderConfig {
  std::size_t embed_dim = 32;
  std::size_t hidden_dim = 64;
  std::size_t max_len = 128;
  Vocab vocab;
  std::uint64_t init_seed = 0;
  double init_scale = 0.1;

  void validate() const {
    if (embed_dim == 0 || hidden_dim == 0 || max_len == 0) {
      throw ConfigError("encoder dimensions must be positive");
    }
    if (!(init_scale >= 0.0) || !std::isfinite(init_scale)) {
      throw ConfigError("encoder init_scale must be a finite non-negative number");
    }
  }
};

struct EncoderParams {
  Matrix token_embedding;     // vocab x d
  Matrix position_embedding;  // max_len x d
  Matrix mix_weight;          // hidden x 2d
  Vector mix_bias;            // hidden
  Matrix out_weight;          // d x hidden

  std::size_t embed_dim() const { return token_embedding.cols; }
  std::size_t hidden_dim() const { return mix_bias.size(); }
  std::size_t max_len() const { return position_embedding.rows; }

  static EncoderParams zeros(std::size_t vocab, std::size_t max_len, std::size_t d, std::size_t hidden) {
    return {Matrix(vocab, d), Matrix(max_len, d), Matrix(hidden, 2 * d), Vector(hidden, 0.0),
            Matrix(d, hidden)};
  }

  friend bool operator==(const EncoderParams&, const EncoderParams&) = default;
};

// Entries i.i.d. uniform(-init_scale, init_scale), filled block by block in
// declaration order from a generator seeded with init_seed.
inline EncoderParams init_params(const EncoderConfig& config) {
  config.validate();
  auto p = EncoderParams::zeros(config.vocab.size(), config.max_len, config.embed_dim, config.hidden_dim);
  Rng rng(config.init_seed);
  const double s = config.init_scale;
  const auto fill = [&](std::vector<double>& values) {
    for (auto& v : values) v = s == 0.0 ? 0.0 : rng.uniform(-s, s);
  };
  fill(p.token_embedding.data);
  fill(p.position_embedding.data);
  fill(p.mix_weight.data);
  fill(p.mix_bias);
  fill(p.out_weight.data);
  return p;
}

// Intermediate values of one forward pass, kept for backpropagation.
struct EncoderTrace {
  Matrix input;    // x, L x d
  Matrix context;  // c_i, L x d
  Matrix pre;      // W [x;c] + b, L x hidden
  Matrix output;   // h, L x d
  std::vector<int> group;  // context group per position: 0 pair, 1 sentence1, 2 sentence2
};

namespace detail {

inline std::vector<int> context_groups(const JointEncoding& joint) {
  const std::size_t L = joint.size();
  std::vector<int> group(L, 0);
  for (std::size_t i = 1; i + 1 < L; ++i) {
    if (i < joint.boundary) group[i] = 1;
    else if (i > joint.boundary) group[i] = 2;
  }
  return group;
}

}  // namespace detail

inline EncoderTrace encode_trace(const JointEncoding& joint, const EncoderParams& params) {
  const std::size_t L = joint.size();
  const std::size_t d = params.embed_dim();
  const std::size_t hidden = params.hidden_dim();
  if (L > params.max_len()) {
    throw DataError("sequence too long (" + std::to_string(L) + " > " + std::to_string(params.max_len()) + ")");
  }
  EncoderTrace t{Matrix(L, d), Matrix(L, d), Matrix(L, hidden), Matrix(L, d), detail::context_groups(joint)};

  for (std::size_t i = 0; i < L; ++i) {
    const auto id = joint.token_offsets.tokens[i];
    if (id < 0 || static_cast<std::size_t>(id) >= params.token_embedding.rows) {
      throw DataError("token id " + std::to_string(id) + " outside the vocabulary");
    }
    const auto e = params.token_embedding.row(static_cast<std::size_t>(id));
    const auto p = params.position_embedding.row(i);
    auto x = t.input.row(i);
    for (std::size_t k = 0; k < d; ++k) x[k] = e[k] + p[k];
  }

  Matrix means(3, d);
  std::size_t counts[3] = {L, 0, 0};
  for (std::size_t i = 0; i < L; ++i) {
    axpy(1.0, t.input.row(i), means.row(0));
    if (t.group[i] != 0) {
      axpy(1.0, t.input.row(i), means.row(static_cast<std::size_t>(t.group[i])));
      ++counts[t.group[i]];
    }
  }
  for (std::size_t g = 0; g < 3; ++g) {
    if (counts[g] == 0) continue;
    for (auto& v : means.row(g)) v /= static_cast<double>(counts[g]);
  }

  Vector joined(2 * d);
  Vector relu(hidden);
  for (std::size_t i = 0; i < L; ++i) {
    const auto c = means.row(static_cast<std::size_t>(t.group[i]));
    std::copy(c.begin(), c.end(), t.context.row(i).begin());
    const auto x = t.input.row(i);
    std::copy(x.begin(), x.end(), joined.begin());
    std::copy(c.begin(), c.end(), joined.begin() + static_cast<std::ptrdiff_t>(d));
    auto pre = t.pre.row(i);
    matvec(params.mix_weight, joined, pre);
    for (std::size_t k = 0; k < hidden; ++k) {
      pre[k] += params.mix_bias[k];
      relu[k] = pre[k] > 0.0 ? pre[k] : 0.0;
    }
    auto h = t.output.row(i);
    std::copy(x.begin(), x.end(), h.begin());
    matvec(params.out_weight, relu, h, /*accumulate=*/true);
  }
  return t;
}

// L vectors of dimension d, one per joint position.
inline Matrix encode(const JointEncoding& joint, const EncoderParams& params) {
  return encode_trace(joint, params).output;
}

// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(h).
inline void encode_backward(const JointEncoding& joint, const EncoderParams& params, const EncoderTrace& t,
                            const Matrix& grad_output, EncoderParams& grad) {
  const std::size_t L = joint.size();
  const std::size_t d = params.embed_dim();
  const std::size_t hidden = params.hidden_dim();

  Matrix grad_input = grad_output;  // residual path
  Matrix grad_means(3, d);
  Vector relu(hidden), grad_pre(hidden), joined(2 * d), grad_joined(2 * d);

  for (std::size_t i = 0; i < L; ++i) {
    const auto gh = grad_output.row(i);
    const auto pre = t.pre.row(i);
    for (std::size_t k = 0; k < hidden; ++k) relu[k] = pre[k] > 0.0 ? pre[k] : 0.0;
    add_outer(grad.out_weight, gh, relu);

    std::fill(grad_pre.begin(), grad_pre.end(), 0.0);
    matvec_transposed_add(params.out_weight, gh, grad_pre);
    for (std::size_t k = 0; k < hidden; ++k) {
      if (!(pre[k] > 0.0)) grad_pre[k] = 0.0;
      grad.mix_bias[k] += grad_pre[k];
    }
    const auto x = t.input.row(i);
    const auto c = t.context.row(i);
    std::copy(x.begin(), x.end(), joined.begin());
    std::copy(c.begin(), c.end(), joined.begin() + static_cast<std::ptrdiff_t>(d));
    add_outer(grad.mix_weight, grad_pre, joined);

    std::fill(grad_joined.begin(), grad_joined.end(), 0.0);
    matvec_transposed_add(params.mix_weight, grad_pre, grad_joined);
    auto gx = grad_input.row(i);
    auto gc = grad_means.row(static_cast<std::size_t>(t.group[i]));
    for (std::size_t k = 0; k < d; ++k) {
      gx[k] += grad_joined[k];
      gc[k] += grad_joined[d + k];
    }
  }

  std::size_t counts[3] = {L, 0, 0};
  for (std::size_t i = 0; i < L; ++i) {
    if (t.group[i] != 0) ++counts[t.group[i]];
  }
  for (std::size_t i = 0; i < L; ++i) {
    auto gx = grad_input.row(i);
    axpy(1.0 / static_cast<double>(counts[0]), grad_means.row(0), gx);
    if (t.group[i] != 0) {
      const auto g = static_cast<std::size_t>(t.group[i]);
      axpy(1.0 / static_cast<double>(counts[g]), grad_means.row(g), gx);
    }
  }

  for (std::size_t i = 0; i < L; ++i) {
    const auto gx = grad_input.row(i);
    axpy(1.0, gx, grad.token_embedding.row(static_cast<std::size_t>(joint.token_offsets.tokens[i])));
    axpy(1.0, gx, grad.position_embedding.row(i));
  }
}

}  // namespace wic
