#pragma once

// Word-in-context datasets: the example record, validation, loaders for the
// canonical JSON-lines schema and for upstream layouts, auxiliary-data mixing,
// and a synthetic task generator.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "wic/error.hpp"
#include "wic/random.hpp"
#include "wic/unicode.hpp"

namespace wic {

// Half-open code-point range [start, end).
struct CharRange {
  std::size_t start = 0;
  std::size_t end = 0;

  bool empty() const { return start >= end; }
  friend bool operator==(const CharRange&, const CharRange&) = default;
};

// Logit index 0 is `different`, index 1 is `same`.
enum class SenseLabel : int { different = 0, same = 1 };

inline int to_numeric(SenseLabel label) { return static_cast<int>(label); }

inline SenseLabel label_from_numeric(long long value) {
  if (value == 0) return SenseLabel::different;
  if (value == 1) return SenseLabel::same;
  throw DataError("label must be 0 or 1, got " + std::to_string(value));
}

// Target y of the cosine embedding loss.
inline int cosine_target(SenseLabel label) { return label == SenseLabel::same ? 1 : -1; }

inline SenseLabel label_from_cosine_target(int y) {
  if (y == 1) return SenseLabel::same;
  if (y == -1) return SenseLabel::different;
  throw DataError("cosine target must be +1 or -1, got " + std::to_string(y));
}

inline const char* to_string(SenseLabel label) {
  return label == SenseLabel::same ? "same" : "different";
}

enum class Source { main, auxiliary, synthetic };

inline const char* to_string(Source source) {
  switch (source) {
    case Source::main: return "main";
    case Source::auxiliary: return "auxiliary";
    case Source::synthetic: return "synthetic";
  }
  return "main";
}

inline Source source_from_string(std::string_view s) {
  if (s == "main") return Source::main;
  if (s == "auxiliary") return Source::auxiliary;
  if (s == "synthetic") return Source::synthetic;
  throw DataError("unknown source '" + std::string(s) + "'");
}

struct WicExample {
  std::string id;
  std::string word;
  std::string sentence1;
  std::string sentence2;
  CharRange span1;
  CharRange span2;
  SenseLabel label = SenseLabel::different;
  Source source = Source::main;
  std::optional<std::string> date_meta;  // carried through, never interpreted

  friend bool operator==(const WicExample&, const WicExample&) = default;
};

namespace detail {

inline bool target_matches(std::string_view word, const std::vector<char32_t>& sentence, CharRange span) {
  const auto w = unicode::decode(word);
  if (w.empty() || span.empty()) return false;
  return unicode::to_lower(w.front()) == unicode::to_lower(sentence[span.start]);
}

inline std::vector<char32_t> decode_or_empty(std::string_view text, bool& ok) {
  try {
    ok = true;
    return unicode::decode(text);
  } catch (const DataError&) {
    ok = false;
    return {};
  }
}

}  // namespace detail

// Returns every violated invariant of a single example; empty means valid.
// Id uniqueness is a split-level property and is checked by the loaders.
inline std::vector<std::string> validate_example(const WicExample& ex) {
  std::vector<std::string> violations;
  if (ex.id.empty()) violations.emplace_back("empty id");
  if (ex.word.empty()) violations.emplace_back("empty target word");

  const auto check = [&](const std::string& sentence, CharRange span, const char* name,
                         const char* sentence_name) {
    bool ok = true;
    const auto cps = detail::decode_or_empty(sentence, ok);
    if (!ok) {
      violations.push_back(std::string(sentence_name) + " is not valid UTF-8");
      return;
    }
    if (span.start >= span.end) {
      violations.push_back(std::string(name) + " empty");
      return;
    }
    if (span.end > cps.size()) {
      violations.push_back(std::string(name) + " out of bounds");
      return;
    }
    if (!detail::target_matches(ex.word, cps, span)) {
      violations.push_back(std::string("target mismatch in ") + sentence_name);
    }
  };
  check(ex.sentence1, ex.span1, "span1", "sentence1");
  check(ex.sentence2, ex.span2, "span2", "sentence2");
  return violations;
}

// ---------------------------------------------------------------------------
// Loading and writing

enum class DataFormat { canonical, tempowic, xlwic };

inline DataFormat format_from_string(std::string_view s) {
  if (s == "canonical") return DataFormat::canonical;
  if (s == "tempowic") return DataFormat::tempowic;
  if (s == "xlwic") return DataFormat::xlwic;
  throw ConfigError("unknown data format '" + std::string(s) + "'");
}

inline const char* to_string(DataFormat f) {
  switch (f) {
    case DataFormat::canonical: return "canonical";
    case DataFormat::tempowic: return "tempowic";
    case DataFormat::xlwic: return "xlwic";
  }
  return "canonical";
}

enum class LoadPolicy { fail_fast, skip_with_warning };

// How an upstream layout maps onto the canonical fields.
//
// For `jsonl` layouts every field is a JSON pointer into the record. For `tsv`
// layouts every field is a zero-based column index. A missing `id` field
// makes the loader synthesize "<id_prefix><line>".
struct FieldMapping {
  enum class Layout { jsonl, tsv };

  Layout layout = Layout::jsonl;
  std::map<std::string, std::string> fields;  // canonical name -> pointer or column
  std::vector<std::string> date_fields;       // joined with '|' into date_meta
  std::map<std::string, SenseLabel> label_values;
  std::string id_prefix = "line-";
  bool end_inclusive = false;
  Source source = Source::main;
};

inline FieldMapping default_mapping(DataFormat format) {
  FieldMapping m;
  switch (format) {
    case DataFormat::canonical:
      throw ConfigError("the canonical format has no field mapping");
    case DataFormat::tempowic:
      m.layout = FieldMapping::Layout::jsonl;
      m.fields = {{"id", "/id"},
                  {"word", "/word"},
                  {"sentence1", "/tweet1/text"},
                  {"start1", "/tweet1/text_start"},
                  {"end1", "/tweet1/text_end"},
                  {"sentence2", "/tweet2/text"},
                  {"start2", "/tweet2/text_start"},
                  {"end2", "/tweet2/text_end"},
                  {"label", "/label"}};
      m.date_fields = {"/tweet1/date", "/tweet2/date"};
      m.label_values = {{"1", SenseLabel::same}, {"0", SenseLabel::different},
                        {"true", SenseLabel::same}, {"false", SenseLabel::different}};
      m.id_prefix = "tempowic-";
      m.source = Source::main;
      break;
    case DataFormat::xlwic:
      m.layout = FieldMapping::Layout::tsv;
      m.fields = {{"word", "0"},  {"start1", "2"},    {"end1", "3"},      {"start2", "4"},
                  {"end2", "5"},  {"sentence1", "6"}, {"sentence2", "7"}, {"label", "8"}};
      m.label_values = {{"1", SenseLabel::same}, {"0", SenseLabel::different},
                        {"T", SenseLabel::same}, {"F", SenseLabel::different}};
      m.id_prefix = "xlwic-";
      m.source = Source::auxiliary;
      break;
  }
  return m;
}

inline FieldMapping mapping_from_json(const nlohmann::json& j) {
  FieldMapping m;
  const std::string layout = j.value("layout", std::string("jsonl"));
  if (layout == "jsonl") {
    m.layout = FieldMapping::Layout::jsonl;
  } else if (layout == "tsv") {
    m.layout = FieldMapping::Layout::tsv;
  } else {
    throw ConfigError("unknown mapping layout '" + layout + "'");
  }
  for (const auto& [key, value] : j.at("fields").items()) {
    m.fields[key] = value.is_string() ? value.get<std::string>() : value.dump();
  }
  if (j.contains("date_fields")) m.date_fields = j.at("date_fields").get<std::vector<std::string>>();
  for (const auto& [key, value] : j.at("label_values").items()) {
    m.label_values[key] = label_from_numeric(value.get<long long>());
  }
  m.id_prefix = j.value("id_prefix", m.id_prefix);
  m.end_inclusive = j.value("end_inclusive", false);
  m.source = source_from_string(j.value("source", std::string("main")));
  return m;
}

// Reads {"tempowic": {...}, "xlwic": {...}} from a mapping config file.
inline std::map<std::string, FieldMapping> load_field_mappings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open field-mapping file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse field-mapping file " + path + ": " + e.what());
  }
  std::map<std::string, FieldMapping> out;
  for (const auto& [name, value] : j.items()) out[name] = mapping_from_json(value);
  return out;
}

struct LoadOptions {
  LoadPolicy policy = LoadPolicy::fail_fast;
  std::optional<FieldMapping> mapping;  // defaults to default_mapping(format)
  std::function<void(const std::string&)> warn = [](const std::string& msg) {
    std::cerr << "warning: " << msg << "\n";
  };
};

inline nlohmann::ordered_json to_json(const WicExample& ex) {
  nlohmann::ordered_json j;
  j["id"] = ex.id;
  j["word"] = ex.word;
  j["sentence1"] = ex.sentence1;
  j["sentence2"] = ex.sentence2;
  j["start1"] = ex.span1.start;
  j["end1"] = ex.span1.end;
  j["start2"] = ex.span2.start;
  j["end2"] = ex.span2.end;
  j["label"] = to_numeric(ex.label);
  j["source"] = to_string(ex.source);
  if (ex.date_meta) j["date_meta"] = *ex.date_meta;
  return j;
}

inline std::string to_canonical_line(const WicExample& ex) { return to_json(ex).dump(); }

inline void write_examples(std::ostream& out, const std::vector<WicExample>& examples) {
  for (const auto& ex : examples) out << to_canonical_line(ex) << '\n';
}

inline void write_examples(const std::string& path, const std::vector<WicExample>& examples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  write_examples(out, examples);
  if (!out) throw DataError("failed writing " + path);
}

namespace detail {

inline std::size_t json_index(const nlohmann::json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer()) {
    const auto x = v.get<long long>();
    if (x < 0) throw DataError("field '" + key + "' must be non-negative");
    return static_cast<std::size_t>(x);
  }
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    std::size_t pos = 0;
    const auto x = std::stoll(s, &pos);
    if (pos != s.size() || x < 0) throw DataError("field '" + key + "' is not an index");
    return static_cast<std::size_t>(x);
  }
  throw DataError("field '" + key + "' must be an integer");
}

inline WicExample parse_canonical(const std::string& line) {
  static const std::set<std::string> kRequired = {"id",   "word", "sentence1", "sentence2",
                                                  "start1", "end1", "start2",  "end2",
                                                  "label", "source"};
  const auto j = nlohmann::json::parse(line);
  if (!j.is_object()) throw DataError("record is not an object");
  for (const auto& key : kRequired) {
    if (!j.contains(key)) throw DataError("missing key '" + key + "'");
  }
  for (const auto& [key, _] : j.items()) {
    if (!kRequired.contains(key) && key != "date_meta") throw DataError("unexpected key '" + key + "'");
  }
  WicExample ex;
  ex.id = j.at("id").get<std::string>();
  ex.word = j.at("word").get<std::string>();
  ex.sentence1 = j.at("sentence1").get<std::string>();
  ex.sentence2 = j.at("sentence2").get<std::string>();
  ex.span1 = {json_index(j.at("start1"), "start1"), json_index(j.at("end1"), "end1")};
  ex.span2 = {json_index(j.at("start2"), "start2"), json_index(j.at("end2"), "end2")};
  const auto& label = j.at("label");
  if (!label.is_number_integer()) throw DataError("label must be 0 or 1");
  ex.label = label_from_numeric(label.get<long long>());
  ex.source = source_from_string(j.at("source").get<std::string>());
  if (j.contains("date_meta") && !j.at("date_meta").is_null()) {
    ex.date_meta = j.at("date_meta").get<std::string>();
  }
  return ex;
}

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string scalar_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

inline WicExample parse_mapped(const std::string& line, const FieldMapping& m, std::size_t line_no) {
  std::map<std::string, nlohmann::json> values;
  std::vector<std::string> dates;
  if (m.layout == FieldMapping::Layout::jsonl) {
    const auto j = nlohmann::json::parse(line);
    for (const auto& [name, ptr] : m.fields) {
      const nlohmann::json::json_pointer p(ptr);
      if (!j.contains(p)) throw DataError("missing field '" + ptr + "' for " + name);
      values[name] = j.at(p);
    }
    for (const auto& ptr : m.date_fields) {
      const nlohmann::json::json_pointer p(ptr);
      if (j.contains(p) && !j.at(p).is_null()) dates.push_back(scalar_text(j.at(p)));
    }
  } else {
    const auto cols = split_tabs(line);
    for (const auto& [name, col] : m.fields) {
      const auto idx = static_cast<std::size_t>(std::stoul(col));
      if (idx >= cols.size()) {
        throw DataError("missing column " + col + " for " + name);
      }
      values[name] = cols[idx];
    }
    for (const auto& col : m.date_fields) {
      const auto idx = static_cast<std::size_t>(std::stoul(col));
      if (idx < cols.size() && !cols[idx].empty()) dates.push_back(cols[idx]);
    }
  }
  const auto get = [&](const char* name) -> const nlohmann::json& {
    const auto it = values.find(name);
    if (it == values.end()) throw DataError(std::string("mapping lacks field '") + name + "'");
    return it->second;
  };

  WicExample ex;
  ex.id = values.contains("id") ? scalar_text(values.at("id")) : m.id_prefix + std::to_string(line_no);
  ex.word = scalar_text(get("word"));
  ex.sentence1 = scalar_text(get("sentence1"));
  ex.sentence2 = scalar_text(get("sentence2"));
  const std::size_t adjust = m.end_inclusive ? 1 : 0;
  ex.span1 = {json_index(get("start1"), "start1"), json_index(get("end1"), "end1") + adjust};
  ex.span2 = {json_index(get("start2"), "start2"), json_index(get("end2"), "end2") + adjust};
  const auto label_text = scalar_text(get("label"));
  const auto it = m.label_values.find(label_text);
  if (it == m.label_values.end()) throw DataError("unmapped label value '" + label_text + "'");
  ex.label = it->second;
  ex.source = m.source;
  if (!dates.empty()) {
    std::string joined;
    for (std::size_t i = 0; i < dates.size(); ++i) joined += (i ? "|" : "") + dates[i];
    ex.date_meta = joined;
  }
  return ex;
}

}  // namespace detail

// Loads one split. Blank lines are ignored. Returned examples are in file
// order, pass validate_example and carry unique ids.
inline std::vector<WicExample> load_examples(std::istream& in, DataFormat format,
                                             const LoadOptions& options = {},
                                             const std::string& name = "<stream>") {
  std::optional<FieldMapping> mapping = options.mapping;
  if (format != DataFormat::canonical && !mapping) mapping = default_mapping(format);

  std::vector<WicExample> out;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  const auto reject = [&](const std::string& msg) {
    if (options.policy == LoadPolicy::fail_fast) throw DataError(name + ": " + msg);
    if (options.warn) options.warn(name + ": " + msg + " (skipped)");
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    WicExample ex;
    try {
      ex = format == DataFormat::canonical ? detail::parse_canonical(line)
                                           : detail::parse_mapped(line, *mapping, line_no);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(name + ": parse error at line " + std::to_string(line_no) + ": " + e.what());
    } catch (const std::exception& e) {
      throw DataError(name + ": parse error at line " + std::to_string(line_no) + ": " + e.what());
    }

    const auto violations = validate_example(ex);
    if (!violations.empty()) {
      std::string joined;
      bool span_issue = false;
      for (const auto& v : violations) {
        joined += (joined.empty() ? "" : "; ") + v;
        span_issue = span_issue || v.starts_with("span");
      }
      reject(std::string(span_issue ? "invalid span" : "invalid example") + " at line " +
             std::to_string(line_no) + " (id '" + ex.id + "'): " + joined);
      continue;
    }
    if (!ids.insert(ex.id).second) {
      reject("duplicate id '" + ex.id + "' at line " + std::to_string(line_no));
      continue;
    }
    out.push_back(std::move(ex));
  }
  return out;
}

inline std::vector<WicExample> load_examples(const std::string& path, DataFormat format,
                                             const LoadOptions& options = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return load_examples(in, format, options, path);
}

// ---------------------------------------------------------------------------
// Mixing

enum class MixKind { No, Sub, All };

inline const char* to_string(MixKind k) {
  switch (k) {
    case MixKind::No: return "No";
    case MixKind::Sub: return "Sub";
    case MixKind::All: return "All";
  }
  return "No";
}

inline MixKind mix_kind_from_string(std::string_view s) {
  if (s == "No") return MixKind::No;
  if (s == "Sub") return MixKind::Sub;
  if (s == "All") return MixKind::All;
  throw ConfigError("unknown mixing kind '" + std::string(s) + "' (expected No, Sub or All)");
}

struct MixingStrategy {
  MixKind kind = MixKind::No;
  double sub_ratio = 1.0;  // auxiliary sample size = round(sub_ratio * |main|)
  std::uint64_t seed = 0;
};

inline std::size_t sub_sample_size(std::size_t main_size, double ratio) {
  return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(main_size)));
}

// No keeps the main split untouched. Sub appends a uniform sample without
// replacement of the auxiliary split and All appends all of it; both then
// shuffle the combined list with the strategy seed.
inline std::vector<WicExample> mix(const std::vector<WicExample>& main_train,
                                   const std::vector<WicExample>& aux_train,
                                   const MixingStrategy& strategy) {
  if (!(strategy.sub_ratio > 0.0) || !std::isfinite(strategy.sub_ratio)) {
    throw ConfigError("mixing sub_ratio must be a positive number");
  }
  if (strategy.kind == MixKind::No) return main_train;

  Rng rng(strategy.seed);
  std::vector<WicExample> out = main_train;
  if (strategy.kind == MixKind::All) {
    out.insert(out.end(), aux_train.begin(), aux_train.end());
  } else {
    const std::size_t k = sub_sample_size(main_train.size(), strategy.sub_ratio);
    if (k > aux_train.size()) {
      throw ConfigError("Sub sample size " + std::to_string(k) + " exceeds auxiliary size " +
                        std::to_string(aux_train.size()));
    }
    std::vector<std::size_t> idx(aux_train.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    // partial Fisher-Yates: the first k slots become the sample
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
    }
    for (std::size_t i = 0; i < k; ++i) out.push_back(aux_train[idx[i]]);
  }
  rng.shuffle(out);
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic task

// Cue vocabulary of the synthetic task. Every cue token belongs to exactly one
// sense; filler tokens carry no sense.
struct SyntheticLexicon {
  std::vector<std::string> targets;
  std::map<std::string, int> cue_sense;
  std::vector<std::string> fillers;
};

struct SyntheticCorpus {
  std::vector<WicExample> train;
  std::vector<WicExample> dev;
  std::vector<WicExample> test;
  SyntheticLexicon lexicon;
};

struct SyntheticOptions {
  std::size_t cues_per_sense = 8;
  std::size_t fillers = 24;
  std::size_t cues_per_sentence = 2;
  std::size_t min_fillers = 2;
  std::size_t max_fillers = 5;
};

namespace detail {

inline std::string pseudo_word(Rng& rng, std::size_t syllables) {
  static constexpr std::string_view kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p",
                                                 "r", "s", "t", "v", "z", "br", "st", "gr", "pl"};
  static constexpr std::string_view kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};
  std::string w;
  for (std::size_t i = 0; i < syllables; ++i) {
    w += kOnsets[rng.below(std::size(kOnsets))];
    w += kVowels[rng.below(std::size(kVowels))];
  }
  return w;
}

}  // namespace detail

// Builds a separable word-in-context task. Each target word has two senses;
// a sentence signals its sense with cue tokens from that sense's cue set, and
// a pair is labelled `same` iff both sentences use the same sense. Splits are
// sized 4:1:2 and exactly label-balanced up to one example.
inline SyntheticCorpus generate_synthetic(std::size_t n_words, std::size_t n_examples,
                                          std::uint64_t seed, const SyntheticOptions& opt = {}) {
  if (n_words < 2) throw ConfigError("generate_synthetic needs at least 2 target words");
  if (n_examples < 10) throw ConfigError("generate_synthetic needs at least 10 examples");

  Rng rng(seed);
  SyntheticCorpus corpus;
  auto& lex = corpus.lexicon;

  std::set<std::string> used;
  const auto fresh = [&](std::size_t syllables) {
    while (true) {
      auto w = detail::pseudo_word(rng, syllables);
      if (used.insert(w).second) return w;
    }
  };
  for (std::size_t i = 0; i < n_words; ++i) lex.targets.push_back(fresh(3));
  std::vector<std::vector<std::string>> cues(2);
  for (int sense = 0; sense < 2; ++sense) {
    for (std::size_t i = 0; i < opt.cues_per_sense; ++i) {
      cues[sense].push_back(fresh(2));
      lex.cue_sense[cues[sense].back()] = sense;
    }
  }
  for (std::size_t i = 0; i < opt.fillers; ++i) lex.fillers.push_back(fresh(1 + i % 2));

  const auto make_sentence = [&](const std::string& target, int sense) {
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < opt.cues_per_sentence; ++i) {
      tokens.push_back(cues[sense][rng.below(cues[sense].size())]);
    }
    const auto n_fill = static_cast<std::size_t>(
        rng.between(static_cast<std::int64_t>(opt.min_fillers), static_cast<std::int64_t>(opt.max_fillers)));
    for (std::size_t i = 0; i < n_fill; ++i) tokens.push_back(lex.fillers[rng.below(lex.fillers.size())]);
    rng.shuffle(tokens);
    const std::size_t pos = rng.below(tokens.size() + 1);
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(pos), target);

    std::string text;
    CharRange span;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i) text += ' ';
      if (i == pos) span.start = text.size();  // pseudo-words are ASCII
      text += tokens[i];
      if (i == pos) span.end = text.size();
    }
    return std::pair{text, span};
  };

  const std::size_t n_train = n_examples * 4 / 7;
  const std::size_t n_dev = n_examples / 7;
  const std::size_t n_test = n_examples - n_train - n_dev;

  std::set<std::pair<std::string, std::string>> seen_pairs;
  const auto make_split = [&](std::size_t n, const std::string& prefix) {
    std::vector<SenseLabel> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = i % 2 ? SenseLabel::different : SenseLabel::same;
    rng.shuffle(labels);
    std::vector<WicExample> split;
    split.reserve(n);
    char id[64];
    for (std::size_t i = 0; i < n; ++i) {
      WicExample ex;
      const auto& target = lex.targets[rng.below(lex.targets.size())];
      const int sense1 = static_cast<int>(rng.below(2));
      const int sense2 = labels[i] == SenseLabel::same ? sense1 : 1 - sense1;
      do {
        auto [s1, sp1] = make_sentence(target, sense1);
        auto [s2, sp2] = make_sentence(target, sense2);
        ex.sentence1 = std::move(s1);
        ex.sentence2 = std::move(s2);
        ex.span1 = sp1;
        ex.span2 = sp2;
      } while (!seen_pairs.emplace(ex.sentence1, ex.sentence2).second);
      std::snprintf(id, sizeof id, "%s-%05zu", prefix.c_str(), i);
      ex.id = id;
      ex.word = target;
      ex.label = labels[i];
      ex.source = Source::synthetic;
      split.push_back(std::move(ex));
    }
    return split;
  };
  corpus.train = make_split(n_train, "train");
  corpus.dev = make_split(n_dev, "dev");
  corpus.test = make_split(n_test, "test");
  return corpus;
}

}  // namespace wic
