#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace afsgm {

// Universal point/gradient carrier. Entries of any vector returned by a
// public operation are finite.
using DenseVector = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("dot: dimension mismatch " +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2_sq(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(norm2_sq(a)); }

inline double norm1(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += std::fabs(v);
  return s;
}

inline double norm_inf(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s = std::max(s, std::fabs(v));
  return s;
}

// y += c * x
inline void axpy(double c, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: dimension mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

inline DenseVector sub(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("sub: dimension mismatch");
  DenseVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

// (wa*a + wb*b) / wsum, the convex-combination form used by the solver updates
inline DenseVector combine(double wa, std::span<const double> a, double wb,
                           std::span<const double> b, double wsum) {
  if (a.size() != b.size()) throw std::invalid_argument("combine: dimension mismatch");
  DenseVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = (wa * a[i] + wb * b[i]) / wsum;
  return r;
}

inline bool all_finite(std::span<const double> a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

inline void check_finite(std::span<const double> a, const char* context) {
  if (!all_finite(a))
    throw std::domain_error(std::string(context) + ": non-finite entry");
}

}  // namespace afsgm
