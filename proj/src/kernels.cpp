#include "drqcp/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "drqcp/errors.hpp"

namespace drqcp::kernels {
namespace {

void check_same(std::span<const double> a, std::span<const double> b, const char* who) {
  if (a.size() != b.size()) throw DimensionError(std::string(who) + ": vector lengths differ");
}

void check_column_dots(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
  if (static_cast<Index>(x.size()) != a.rows() || static_cast<Index>(y.size()) != a.cols())
    throw DimensionError("column_dots: operand sizes do not match");
}

}  // namespace

namespace serial {

double dot(std::span<const double> a, std::span<const double> b) {
  check_same(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_same(x, y, "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void column_dots(const SparseMatrix& a, std::span<const double> x, std::span<double> y, double alpha,
                 bool accumulate) {
  check_column_dots(a, x, y);
  const auto cp = a.colptr();
  const auto ri = a.rowidx();
  const auto v = a.values();
  for (Index j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (Index p = cp[j]; p < cp[j + 1]; ++p) s += v[p] * x[ri[p]];
    y[j] = accumulate ? y[j] + alpha * s : alpha * s;
  }
}

}  // namespace serial

namespace parallel {

double dot(std::span<const double> a, std::span<const double> b) {
  check_same(a, b, "dot");
  const Index n = static_cast<Index>(a.size());
  const Index chunks = (n + kReductionChunk - 1) / kReductionChunk;
  std::vector<double> partial(chunks, 0.0);
#pragma omp parallel for schedule(static)
  for (Index c = 0; c < chunks; ++c) {
    const Index lo = c * kReductionChunk;
    const Index hi = std::min(n, lo + kReductionChunk);
    double s = 0.0;
    for (Index i = lo; i < hi; ++i) s += a[i] * b[i];
    partial[c] = s;
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

double norm_inf(std::span<const double> a) {
  const Index n = static_cast<Index>(a.size());
  double m = 0.0;
#pragma omp parallel for schedule(static) reduction(max : m)
  for (Index i = 0; i < n; ++i) m = std::max(m, std::abs(a[i]));
  return m;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_same(x, y, "axpy");
  const Index n = static_cast<Index>(x.size());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void column_dots(const SparseMatrix& a, std::span<const double> x, std::span<double> y, double alpha,
                 bool accumulate) {
  check_column_dots(a, x, y);
  const auto cp = a.colptr();
  const auto ri = a.rowidx();
  const auto v = a.values();
  const Index ncols = a.cols();
#pragma omp parallel for schedule(dynamic, 256)
  for (Index j = 0; j < ncols; ++j) {
    double s = 0.0;
    for (Index p = cp[j]; p < cp[j + 1]; ++p) s += v[p] * x[ri[p]];
    y[j] = accumulate ? y[j] + alpha * s : alpha * s;
  }
}

}  // namespace parallel

double dot(std::span<const double> a, std::span<const double> b) {
  return static_cast<Index>(a.size()) >= kParallelThreshold ? parallel::dot(a, b) : serial::dot(a, b);
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
  return static_cast<Index>(a.size()) >= kParallelThreshold ? parallel::norm_inf(a) : serial::norm_inf(a);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (static_cast<Index>(x.size()) >= kParallelThreshold)
    parallel::axpy(alpha, x, y);
  else
    serial::axpy(alpha, x, y);
}

void column_dots(const SparseMatrix& a, std::span<const double> x, std::span<double> y, double alpha,
                 bool accumulate) {
  if (a.nnz() + a.cols() >= kParallelThreshold)
    parallel::column_dots(a, x, y, alpha, accumulate);
  else
    serial::column_dots(a, x, y, alpha, accumulate);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace drqcp::kernels
