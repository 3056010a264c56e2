#pragma once

// Confusion counts and macro-F1 with `same` as the positive class. Every 0/0
// ratio (precision, recall or F1) is defined as 0.

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "wic/corpus.hpp"
#include "wic/error.hpp"

namespace wic {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

inline Confusion confusion(std::span<const SenseLabel> golds, std::span<const SenseLabel> preds) {
  if (golds.size() != preds.size()) {
    throw Error("confusion: " + std::to_string(golds.size()) + " golds vs " + std::to_string(preds.size()) +
                " predictions");
  }
  Confusion c;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    const bool g = golds[i] == SenseLabel::same;
    const bool p = preds[i] == SenseLabel::same;
    if (g && p) ++c.tp;
    else if (!g && p) ++c.fp;
    else if (g && !p) ++c.fn;
    else ++c.tn;
  }
  return c;
}

inline double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline ClassScores class_scores(std::size_t hit, std::size_t false_pos, std::size_t false_neg) {
  ClassScores s;
  s.precision = safe_ratio(static_cast<double>(hit), static_cast<double>(hit + false_pos));
  s.recall = safe_ratio(static_cast<double>(hit), static_cast<double>(hit + false_neg));
  s.f1 = safe_ratio(2.0 * s.precision * s.recall, s.precision + s.recall);
  return s;
}

inline double macro_f1(const Confusion& c) {
  return (class_scores(c.tp, c.fp, c.fn).f1 + class_scores(c.tn, c.fn, c.fp).f1) / 2.0;
}

struct EvalReport {
  Confusion confusion;
  ClassScores same;
  ClassScores different;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  std::size_t n = 0;
};

inline EvalReport make_report(const Confusion& c) {
  EvalReport r;
  r.confusion = c;
  r.same = class_scores(c.tp, c.fp, c.fn);
  r.different = class_scores(c.tn, c.fn, c.fp);
  r.macro_f1 = (r.same.f1 + r.different.f1) / 2.0;
  r.n = c.total();
  r.accuracy = safe_ratio(static_cast<double>(c.tp + c.tn), static_cast<double>(r.n));
  return r;
}

inline EvalReport evaluate(std::span<const SenseLabel> golds, std::span<const SenseLabel> preds) {
  return make_report(confusion(golds, preds));
}

// Key/value report; ratios printed with 9 decimals.
inline std::string format_report(const EvalReport& r) {
  char buf[128];
  std::string out = "{\n";
  const auto num = [&](const char* key, double v, bool last = false) {
    std::snprintf(buf, sizeof buf, "  \"%s\": %.9f%s\n", key, v, last ? "" : ",");
    out += buf;
  };
  const auto count = [&](const char* key, std::size_t v) {
    std::snprintf(buf, sizeof buf, "  \"%s\": %zu,\n", key, v);
    out += buf;
  };
  count("n", r.n);
  count("tp", r.confusion.tp);
  count("fp", r.confusion.fp);
  count("fn", r.confusion.fn);
  count("tn", r.confusion.tn);
  num("precision_same", r.same.precision);
  num("recall_same", r.same.recall);
  num("f1_same", r.same.f1);
  num("precision_different", r.different.precision);
  num("recall_different", r.different.recall);
  num("f1_different", r.different.f1);
  num("accuracy", r.accuracy);
  num("macro_f1", r.macro_f1, true);
  out += "}\n";
  return out;
}

// ---------------------------------------------------------------------------
// Prediction files: one "id<TAB>label" line per example, label 1 = same.

using Prediction = std::pair<std::string, SenseLabel>;

inline void write_predictions(const std::string& path, const std::vector<Prediction>& preds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  for (const auto& [id, label] : preds) out << id << '\t' << to_numeric(label) << '\n';
  if (!out) throw DataError("failed writing " + path);
}

inline std::vector<Prediction> read_predictions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::vector<Prediction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    const std::string label = tab == std::string::npos ? "" : line.substr(tab + 1);
    if (tab == std::string::npos || tab == 0 || (label != "0" && label != "1")) {
      throw DataError(path + ": malformed prediction at line " + std::to_string(line_no));
    }
    out.emplace_back(line.substr(0, tab), label == "1" ? SenseLabel::same : SenseLabel::different);
  }
  return out;
}

// Joins predictions to gold examples by id. Extra prediction ids only warn.
inline EvalReport score_predictions(const std::vector<Prediction>& preds, const std::vector<WicExample>& gold,
                                    const std::function<void(const std::string&)>& warn = {}) {
  std::unordered_map<std::string, SenseLabel> by_id;
  for (const auto& [id, label] : preds) {
    if (!by_id.emplace(id, label).second) throw DataError("duplicate prediction id '" + id + "'");
  }
  std::vector<SenseLabel> golds, predicted;
  std::vector<std::string> missing;
  std::size_t n_missing = 0;
  std::unordered_set<std::string> gold_ids;
  for (const auto& ex : gold) {
    gold_ids.insert(ex.id);
    const auto it = by_id.find(ex.id);
    if (it == by_id.end()) {
      if (missing.size() < 10) missing.push_back(ex.id);
      ++n_missing;
      continue;
    }
    golds.push_back(ex.label);
    predicted.push_back(it->second);
  }
  if (n_missing) {
    std::string msg = std::to_string(n_missing) + " gold id(s) missing from predictions:";
    for (const auto& id : missing) msg += " " + id;
    if (n_missing > missing.size()) msg += " ...";
    throw DataError(msg);
  }
  if (golds.empty()) throw DataError("gold file is empty");
  std::size_t extra = 0;
  for (const auto& [id, _] : preds) extra += gold_ids.contains(id) ? 0 : 1;
  if (extra && warn) warn(std::to_string(extra) + " prediction id(s) not in the gold file were ignored");
  return evaluate(golds, predicted);
}

inline EvalReport score_files(const std::string& pred_path, const std::string& gold_path,
                              const std::function<void(const std::string&)>& warn = {}) {
  return score_predictions(read_predictions(pred_path), load_examples(gold_path, DataFormat::canonical), warn);
}

}  // namespace wic
