#include "navlab/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace navlab::kernels {

namespace {

std::atomic<std::size_t> g_threshold{1u << 18};

inline void row_nn(const double* a, const double* b, double* c, std::size_t k, std::size_t m) {
  for (std::size_t p = 0; p < k; ++p) {
    const double av = a[p];
    if (av == 0.0) continue;
    const double* brow = b + p * m;
    for (std::size_t j = 0; j < m; ++j) c[j] += av * brow[j];
  }
}

inline void row_nt(const double* a, const double* b, double* c, std::size_t k, std::size_t m) {
  for (std::size_t j = 0; j < m; ++j) {
    const double* brow = b + j * k;
    double acc = 0.0;
    for (std::size_t p = 0; p < k; ++p) acc += a[p] * brow[p];
    c[j] += acc;
  }
}

// Row i of Aᵀ·B: sum over p of A[p,i] * B[p,:].
inline void row_tn(const double* a, const double* b, double* c, std::size_t i, std::size_t n,
                   std::size_t k, std::size_t m) {
  for (std::size_t p = 0; p < k; ++p) {
    const double av = a[p * n + i];
    if (av == 0.0) continue;
    const double* brow = b + p * m;
    for (std::size_t j = 0; j < m; ++j) c[j] += av * brow[j];
  }
}

}  // namespace

void gemm_nn_serial(std::span<const double> a, std::span<const double> b, std::span<double> c,
                    std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) row_nn(a.data() + i * k, b.data(), c.data() + i * m, k, m);
}

void gemm_nn_omp(std::span<const double> a, std::span<const double> b, std::span<double> c,
                 std::size_t n, std::size_t k, std::size_t m) {
  const long rows = static_cast<long>(n);
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (long i = 0; i < rows; ++i) {
    row_nn(a.data() + i * k, b.data(), c.data() + i * m, k, m);
  }
}

void gemm_nt_serial(std::span<const double> a, std::span<const double> b, std::span<double> c,
                    std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) row_nt(a.data() + i * k, b.data(), c.data() + i * m, k, m);
}

void gemm_nt_omp(std::span<const double> a, std::span<const double> b, std::span<double> c,
                 std::size_t n, std::size_t k, std::size_t m) {
  const long rows = static_cast<long>(n);
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (long i = 0; i < rows; ++i) {
    row_nt(a.data() + i * k, b.data(), c.data() + i * m, k, m);
  }
}

void gemm_tn_serial(std::span<const double> a, std::span<const double> b, std::span<double> c,
                    std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) row_tn(a.data(), b.data(), c.data() + i * m, i, n, k, m);
}

void gemm_tn_omp(std::span<const double> a, std::span<const double> b, std::span<double> c,
                 std::size_t n, std::size_t k, std::size_t m) {
  const long rows = static_cast<long>(n);
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (long i = 0; i < rows; ++i) {
    row_tn(a.data(), b.data(), c.data() + i * m, static_cast<std::size_t>(i), n, k, m);
  }
}

namespace {

bool go_parallel(std::size_t n, std::size_t k, std::size_t m) {
  if (n < 2) return false;
  if (n * k * m < g_threshold.load(std::memory_order_relaxed)) return false;
#ifdef _OPENMP
  // Nested regions (e.g. inside parallel evaluation) stay serial.
  if (omp_in_parallel()) return false;
#endif
  return max_threads() > 1;
}

}  // namespace

void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m) {
  if (go_parallel(n, k, m)) gemm_nn_omp(a, b, c, n, k, m);
  else gemm_nn_serial(a, b, c, n, k, m);
}

void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m) {
  if (go_parallel(n, k, m)) gemm_nt_omp(a, b, c, n, k, m);
  else gemm_nt_serial(a, b, c, n, k, m);
}

void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m) {
  if (go_parallel(n, k, m)) gemm_tn_omp(a, b, c, n, k, m);
  else gemm_tn_serial(a, b, c, n, k, m);
}

std::size_t parallel_threshold() { return g_threshold.load(); }
void set_parallel_threshold(std::size_t flops) { g_threshold.store(flops); }

int max_threads() {
  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  if (const char* env = std::getenv("NAVLAB_THREADS")) {
    try {
      int cap = std::stoi(env);
      if (cap >= 1 && cap < threads) threads = cap;
#ifndef _OPENMP
      (void)cap;
#endif
    } catch (const std::exception&) {
    }
  }
  return threads < 1 ? 1 : threads;
}

}  // namespace navlab::kernels
