#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

// Parallel primitives used by the solver and diagnostics. Every reduction is
// blocked: partial sums are formed over fixed-size blocks and combined in
// block order, so the result is bitwise independent of the thread count and
// identical to the serial reference implementations (_serial variants).
namespace chic::par {

inline constexpr std::size_t kReductionBlock = 4096;

inline bool openmp_enabled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

template <class F>
inline void for_each_index(std::size_t n, F&& f) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
    f(static_cast<std::size_t>(i));
#else
  for (std::size_t i = 0; i < n; ++i) f(i);
#endif
}

template <class F>
inline void for_each_index_serial(std::size_t n, F&& f) {
  for (std::size_t i = 0; i < n; ++i) f(i);
}

namespace detail {
// Single definition of the per-block accumulation so the serial and parallel
// paths execute identical arithmetic.
template <class G>
inline double block_partial(std::size_t b, std::size_t n, G& g) {
  const std::size_t lo = b * kReductionBlock;
  const std::size_t hi = lo + kReductionBlock < n ? lo + kReductionBlock : n;
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += g(i);
  return s;
}
}  // namespace detail

template <class G>
inline double blocked_sum(std::size_t n, G&& g) {
  const std::size_t nb = (n + kReductionBlock - 1) / kReductionBlock;
  std::vector<double> partial(nb, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(nb); ++b)
    partial[static_cast<std::size_t>(b)] =
        detail::block_partial(static_cast<std::size_t>(b), n, g);
#else
  for (std::size_t b = 0; b < nb; ++b)
    partial[b] = detail::block_partial(b, n, g);
#endif
  double s = 0.0;
  for (std::size_t b = 0; b < nb; ++b) s += partial[b];
  return s;
}

template <class G>
inline double blocked_sum_serial(std::size_t n, G&& g) {
  const std::size_t nb = (n + kReductionBlock - 1) / kReductionBlock;
  double s = 0.0;
  for (std::size_t b = 0; b < nb; ++b) s += detail::block_partial(b, n, g);
  return s;
}

inline double dot(const double* a, const double* b, std::size_t n) {
  return blocked_sum(n, [&](std::size_t i) { return a[i] * b[i]; });
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return dot(a.data(), b.data(), a.size());
}

inline double dot_serial(const double* a, const double* b, std::size_t n) {
  return blocked_sum_serial(n, [&](std::size_t i) { return a[i] * b[i]; });
}

inline double dot_serial(const std::vector<double>& a,
                         const std::vector<double>& b) {
  return dot_serial(a.data(), b.data(), a.size());
}

inline double nrm2(const double* a, std::size_t n) {
  return std::sqrt(dot(a, a, n));
}

inline double nrm2(const std::vector<double>& a) {
  return nrm2(a.data(), a.size());
}

inline void axpy(std::size_t n, double alpha, const double* x, double* y) {
  for_each_index(n, [&](std::size_t i) { y[i] += alpha * x[i]; });
}

inline void axpy(double alpha, const std::vector<double>& x,
                 std::vector<double>& y) {
  axpy(y.size(), alpha, x.data(), y.data());
}

inline void scal(double alpha, std::vector<double>& x) {
  for_each_index(x.size(), [&](std::size_t i) { x[i] *= alpha; });
}

}  // namespace chic::par
