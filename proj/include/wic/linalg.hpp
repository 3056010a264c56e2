#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace wic {

using Vector = std::vector<double>;

// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

// y = A x (+ y when accumulate)
inline void matvec(const Matrix& a, std::span<const double> x, std::span<double> y, bool accumulate = false) {
  assert(x.size() == a.cols && y.size() == a.rows);
  for (std::size_t r = 0; r < a.rows; ++r) {
    const double* row = a.data.data() + r * a.cols;
    double s = 0.0;
    for (std::size_t c = 0; c < a.cols; ++c) s += row[c] * x[c];
    y[r] = accumulate ? y[r] + s : s;
  }
}

// y += A^T x
inline void matvec_transposed_add(const Matrix& a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == a.rows && y.size() == a.cols);
  for (std::size_t r = 0; r < a.rows; ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    const double* row = a.data.data() + r * a.cols;
    for (std::size_t c = 0; c < a.cols; ++c) y[c] += row[c] * xr;
  }
}

// A += u v^T
inline void add_outer(Matrix& a, std::span<const double> u, std::span<const double> v) {
  assert(u.size() == a.rows && v.size() == a.cols);
  for (std::size_t r = 0; r < a.rows; ++r) {
    const double ur = u[r];
    if (ur == 0.0) continue;
    double* row = a.data.data() + r * a.cols;
    for (std::size_t c = 0; c < a.cols; ++c) row[c] += ur * v[c];
  }
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace wic
