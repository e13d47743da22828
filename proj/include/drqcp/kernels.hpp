#pragma once

// Dense-vector and sparse matvec kernels used inside the iteration loops.
//
// Each kernel has a serial reference implementation and an OpenMP version.
// The dispatching entry points at namespace scope pick the parallel version
// once the work exceeds kParallelThreshold. Parallel reductions sum fixed-size
// chunks in a fixed order, so results do not depend on the thread count.

#include <span>

#include "drqcp/sparse.hpp"

namespace drqcp::kernels {

inline constexpr Index kParallelThreshold = 1 << 14;
inline constexpr Index kReductionChunk = 1 << 12;

namespace serial {
double dot(std::span<const double> a, std::span<const double> b);
double norm_inf(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
// y[j] = alpha * A(:, j) . x (+ y[j] if accumulate), i.e. y = alpha A^T x.
void column_dots(const SparseMatrix& a, std::span<const double> x, std::span<double> y,
                 double alpha = 1.0, bool accumulate = false);
}  // namespace serial

namespace parallel {
double dot(std::span<const double> a, std::span<const double> b);
double norm_inf(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void column_dots(const SparseMatrix& a, std::span<const double> x, std::span<double> y,
                 double alpha = 1.0, bool accumulate = false);
}  // namespace parallel

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void column_dots(const SparseMatrix& a, std::span<const double> x, std::span<double> y,
                 double alpha = 1.0, bool accumulate = false);

int max_threads();

}  // namespace drqcp::kernels
