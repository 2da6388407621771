#pragma once

#include <cstddef>
#include <span>

// Dense matmul kernels. Each has a serial reference and an OpenMP variant
// that splits output rows across threads; the per-row accumulation order is
// the same in both, so results are bit-identical.

namespace navlab::kernels {

/// C[n×m] += A[n×k] · B[k×m]
void gemm_nn_serial(std::span<const double> a, std::span<const double> b, std::span<double> c,
                    std::size_t n, std::size_t k, std::size_t m);
void gemm_nn_omp(std::span<const double> a, std::span<const double> b, std::span<double> c,
                 std::size_t n, std::size_t k, std::size_t m);

/// C[n×m] += A[n×k] · B[m×k]ᵀ
void gemm_nt_serial(std::span<const double> a, std::span<const double> b, std::span<double> c,
                    std::size_t n, std::size_t k, std::size_t m);
void gemm_nt_omp(std::span<const double> a, std::span<const double> b, std::span<double> c,
                 std::size_t n, std::size_t k, std::size_t m);

/// C[n×m] += A[k×n]ᵀ · B[k×m]
void gemm_tn_serial(std::span<const double> a, std::span<const double> b, std::span<double> c,
                    std::size_t n, std::size_t k, std::size_t m);
void gemm_tn_omp(std::span<const double> a, std::span<const double> b, std::span<double> c,
                 std::size_t n, std::size_t k, std::size_t m);

/// Dispatchers: OpenMP path once n·k·m reaches parallel_threshold() and more
/// than one thread is available.
void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m);
void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m);
void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m);

std::size_t parallel_threshold();
void set_parallel_threshold(std::size_t flops);

/// Thread budget for parallel regions: NAVLAB_THREADS when set, else the
/// OpenMP default.
int max_threads();

}  // namespace navlab::kernels
