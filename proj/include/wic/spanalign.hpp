#pragma once

// Joint sentence-pair layout and character-span to token-index alignment.
//
// Joint layout:   [BOS] tokens(sentence1) [SEP] tokens(sentence2) [EOS]
// Joint text:     sentence1 + kJointSeparator + sentence2
//
// Character ranges are code-point offsets into the joint text. Special tokens
// carry empty ranges so they never overlap a span.

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <string>
#include <span>
#include <string_view>
#include <vector>

#include "wic/corpus.hpp"
#include "wic/error.hpp"
#include "wic/unicode.hpp"

namespace wic {

inline constexpr std::string_view kJointSeparator = " ";

using TokenId = std::int32_t;

struct TokenOffsets {
  std::vector<TokenId> tokens;
  std::vector<CharRange> char_ranges;

  std::size_t size() const { return tokens.size(); }
  friend bool operator==(const TokenOffsets&, const TokenOffsets&) = default;
};

struct JointEncoding {
  TokenOffsets token_offsets;
  std::size_t boundary = 0;  // index of the separator token
  std::vector<std::size_t> target1;
  std::vector<std::size_t> target2;

  std::size_t size() const { return token_offsets.size(); }
  friend bool operator==(const JointEncoding&, const JointEncoding&) = default;
};

// Indices of the tokens whose range overlaps `span` with nonzero length,
// ascending. Empty (special) ranges never match.
inline std::vector<std::size_t> overlapping_tokens(std::span<const CharRange> ranges, CharRange span) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    const auto& r = ranges[i];
    if (r.empty()) continue;
    if (std::max(r.start, span.start) < std::min(r.end, span.end)) out.push_back(i);
  }
  return out;
}

inline std::vector<std::size_t> char_span_to_token_indices(const TokenOffsets& offsets, CharRange span) {
  auto out = overlapping_tokens(offsets.char_ranges, span);
  if (out.empty()) throw AlignmentError("target span matches no token");
  return out;
}

template <typename T>
concept PairTokenizer = requires(const T& tok, std::string_view text) {
  { tok.tokenize(text) } -> std::convertible_to<TokenOffsets>;
  { tok.bos_id() } -> std::convertible_to<TokenId>;
  { tok.sep_id() } -> std::convertible_to<TokenId>;
  { tok.eos_id() } -> std::convertible_to<TokenId>;
};

template <PairTokenizer Tokenizer>
JointEncoding build_joint_input(const WicExample& ex, const Tokenizer& tokenizer) {
  const TokenOffsets first = tokenizer.tokenize(ex.sentence1);
  const TokenOffsets second = tokenizer.tokenize(ex.sentence2);
  const std::size_t len1 = unicode::length(ex.sentence1);
  const std::size_t shift = len1 + unicode::length(kJointSeparator);
  const std::size_t joint_len = shift + unicode::length(ex.sentence2);

  std::vector<std::size_t> local1, local2;
  try {
    local1 = char_span_to_token_indices(first, ex.span1);
  } catch (const AlignmentError& e) {
    throw AlignmentError(std::string(e.what()) + " in sentence1");
  }
  try {
    local2 = char_span_to_token_indices(second, ex.span2);
  } catch (const AlignmentError& e) {
    throw AlignmentError(std::string(e.what()) + " in sentence2");
  }

  JointEncoding joint;
  auto& toks = joint.token_offsets.tokens;
  auto& ranges = joint.token_offsets.char_ranges;
  toks.reserve(first.size() + second.size() + 3);
  ranges.reserve(toks.capacity());

  toks.push_back(tokenizer.bos_id());
  ranges.push_back({0, 0});
  for (std::size_t i = 0; i < first.size(); ++i) {
    toks.push_back(first.tokens[i]);
    ranges.push_back(first.char_ranges[i]);
  }
  joint.boundary = toks.size();
  toks.push_back(tokenizer.sep_id());
  ranges.push_back({len1, len1});
  for (std::size_t i = 0; i < second.size(); ++i) {
    toks.push_back(second.tokens[i]);
    const auto& r = second.char_ranges[i];
    ranges.push_back({r.start + shift, r.end + shift});
  }
  toks.push_back(tokenizer.eos_id());
  ranges.push_back({joint_len, joint_len});

  for (auto i : local1) joint.target1.push_back(i + 1);
  for (auto i : local2) joint.target2.push_back(i + joint.boundary + 1);
  return joint;
}

// Aligns an example against offsets produced elsewhere over the joint text
// (for example by an external subword tokenizer). Position 0 must be the
// start token and the separator is the first empty-range token after it.
inline JointEncoding align_external(const WicExample& ex, TokenOffsets offsets) {
  const auto& ranges = offsets.char_ranges;
  if (ranges.empty() || !ranges.front().empty()) {
    throw AlignmentError("external offsets must start with an empty-range start token");
  }
  std::size_t boundary = 0;
  for (std::size_t i = 1; i < ranges.size(); ++i) {
    if (ranges[i].empty()) {
      boundary = i;
      break;
    }
  }
  if (boundary == 0) throw AlignmentError("external offsets have no separator token");

  const std::size_t shift = unicode::length(ex.sentence1) + unicode::length(kJointSeparator);
  JointEncoding joint;
  joint.boundary = boundary;
  const std::span<const CharRange> all(ranges);
  joint.target1 = overlapping_tokens(all.first(boundary), ex.span1);
  if (joint.target1.empty()) throw AlignmentError("target span matches no token in sentence1");
  for (auto i : overlapping_tokens(all.subspan(boundary + 1), {ex.span2.start + shift, ex.span2.end + shift})) {
    joint.target2.push_back(i + boundary + 1);
  }
  if (joint.target2.empty()) throw AlignmentError("target span matches no token in sentence2");
  joint.token_offsets = std::move(offsets);
  return joint;
}

}  // namespace wic
