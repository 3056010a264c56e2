#pragma once

// Exchange format for token vectors produced by an external encoder.
//
// One record per line, tab separated:
//   id  L  d  start_0  end_0 ... start_{L-1}  end_{L-1}  v_0 ... v_{L*d-1}
// Ranges index the joint text (see spanalign.hpp); vectors are row-major.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "wic/error.hpp"
#include "wic/linalg.hpp"
#include "wic/spanalign.hpp"

namespace wic {

struct PrecomputedRecord {
  TokenOffsets offsets;  // token ids are unused and left at 0
  Matrix vectors;        // L x d

  friend bool operator==(const PrecomputedRecord&, const PrecomputedRecord&) = default;
};

class PrecomputedStore {
 public:
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return records_.size(); }
  bool contains(const std::string& id) const { return records_.contains(id); }

  const PrecomputedRecord& at(const std::string& id) const {
    const auto it = records_.find(id);
    if (it == records_.end()) throw DataError("no precomputed embeddings for example '" + id + "'");
    return it->second;
  }

  void insert(const std::string& id, PrecomputedRecord record) {
    if (record.offsets.char_ranges.size() != record.vectors.rows) {
      throw DataError("record '" + id + "': offsets length differs from vector count");
    }
    record.offsets.tokens.assign(record.vectors.rows, 0);
    if (records_.empty()) {
      dim_ = record.vectors.cols;
    } else if (record.vectors.cols != dim_) {
      throw DataError("record '" + id + "': dimension " + std::to_string(record.vectors.cols) +
                      " differs from " + std::to_string(dim_));
    }
    if (!records_.emplace(id, std::move(record)).second) {
      throw DataError("duplicate precomputed record '" + id + "'");
    }
  }

  const std::map<std::string, PrecomputedRecord>& records() const { return records_; }

 private:
  std::size_t dim_ = 0;
  std::map<std::string, PrecomputedRecord> records_;
};

namespace detail {

template <typename T>
T parse_number(std::string_view field, std::size_t line_no) {
  T value{};
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw DataError("precomputed line " + std::to_string(line_no) + ": bad number '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace detail

inline PrecomputedStore load_precomputed(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  PrecomputedStore store;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    while (true) {
      const auto pos = rest.find('\t');
      fields.push_back(rest.substr(0, pos));
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
    if (fields.size() < 3) throw DataError(path + ": line " + std::to_string(line_no) + ": truncated record");
    const std::string id(fields[0]);
    const auto L = detail::parse_number<std::size_t>(fields[1], line_no);
    const auto d = detail::parse_number<std::size_t>(fields[2], line_no);
    if (fields.size() != 3 + 2 * L + L * d) {
      throw DataError(path + ": line " + std::to_string(line_no) + " (id '" + id + "'): expected " +
                      std::to_string(L) + " ranges and " + std::to_string(L) + "x" + std::to_string(d) +
                      " values, found " + std::to_string(fields.size() - 3) + " fields");
    }
    PrecomputedRecord rec;
    rec.offsets.char_ranges.resize(L);
    for (std::size_t i = 0; i < L; ++i) {
      rec.offsets.char_ranges[i] = {detail::parse_number<std::size_t>(fields[3 + 2 * i], line_no),
                                    detail::parse_number<std::size_t>(fields[4 + 2 * i], line_no)};
    }
    rec.vectors = Matrix(L, d);
    for (std::size_t k = 0; k < L * d; ++k) {
      rec.vectors.data[k] = detail::parse_number<double>(fields[3 + 2 * L + k], line_no);
    }
    try {
      store.insert(id, std::move(rec));
    } catch (const DataError& e) {
      throw DataError(path + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return store;
}

inline void write_precomputed(const std::string& path, const PrecomputedStore& store) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  char buf[32];
  for (const auto& [id, rec] : store.records()) {
    out << id << '\t' << rec.vectors.rows << '\t' << rec.vectors.cols;
    for (const auto& r : rec.offsets.char_ranges) out << '\t' << r.start << '\t' << r.end;
    for (double v : rec.vectors.data) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << '\t' << buf;
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing " + path);
}

}  // namespace wic
