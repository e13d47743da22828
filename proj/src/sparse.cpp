#include "drqcp/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "drqcp/errors.hpp"

namespace drqcp {

SparseMatrix::SparseMatrix(Index nrows, Index ncols, std::vector<Index> colptr,
                           std::vector<Index> rowidx, std::vector<double> values)
    : nrows_(nrows),
      ncols_(ncols),
      colptr_(std::move(colptr)),
      rowidx_(std::move(rowidx)),
      values_(std::move(values)) {
  if (nrows_ < 0 || ncols_ < 0) throw FormatError("sparse matrix: negative dimension");
  if (static_cast<Index>(colptr_.size()) != ncols_ + 1)
    throw FormatError("sparse matrix: colptr must have ncols+1 entries, got " +
                      std::to_string(colptr_.size()));
  if (colptr_.front() != 0) throw FormatError("sparse matrix: colptr[0] must be 0");
  if (rowidx_.size() != values_.size())
    throw FormatError("sparse matrix: rowidx and values lengths differ");
  if (colptr_.back() != static_cast<Index>(values_.size()))
    throw FormatError("sparse matrix: colptr[ncols]=" + std::to_string(colptr_.back()) +
                      " does not equal nnz=" + std::to_string(values_.size()));
  for (Index j = 0; j < ncols_; ++j) {
    if (colptr_[j + 1] < colptr_[j])
      throw FormatError("sparse matrix: colptr decreases at column " + std::to_string(j));
    for (Index p = colptr_[j]; p < colptr_[j + 1]; ++p) {
      const Index i = rowidx_[p];
      if (i < 0 || i >= nrows_)
        throw FormatError("sparse matrix: row index " + std::to_string(i) + " out of range in column " +
                          std::to_string(j));
      if (p > colptr_[j] && rowidx_[p - 1] >= i)
        throw FormatError("sparse matrix: row indices not strictly increasing in column " +
                          std::to_string(j));
      if (!std::isfinite(values_[p]))
        throw FormatError("sparse matrix: non-finite value at (" + std::to_string(i) + ", " +
                          std::to_string(j) + ")");
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(Index nrows, Index ncols, std::vector<Triplet> entries,
                                         bool drop_zeros) {
  for (const auto& t : entries) {
    if (t.row < 0 || t.row >= nrows || t.col < 0 || t.col >= ncols)
      throw DimensionError("triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                           ") outside " + std::to_string(nrows) + "x" + std::to_string(ncols));
  }
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  });
  std::vector<Index> colptr(ncols + 1, 0);
  std::vector<Index> rowidx;
  std::vector<double> values;
  rowidx.reserve(entries.size());
  values.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size();) {
    const Index i = entries[k].row;
    const Index j = entries[k].col;
    double v = 0.0;
    for (; k < entries.size() && entries[k].row == i && entries[k].col == j; ++k) v += entries[k].value;
    if (drop_zeros && v == 0.0) continue;
    rowidx.push_back(i);
    values.push_back(v);
    ++colptr[j + 1];
  }
  for (Index j = 0; j < ncols; ++j) colptr[j + 1] += colptr[j];
  return SparseMatrix(nrows, ncols, std::move(colptr), std::move(rowidx), std::move(values));
}

SparseMatrix SparseMatrix::identity(Index n, double scale) {
  std::vector<Index> colptr(n + 1);
  std::vector<Index> rowidx(n);
  for (Index j = 0; j <= n; ++j) colptr[j] = j;
  for (Index j = 0; j < n; ++j) rowidx[j] = j;
  return SparseMatrix(n, n, std::move(colptr), std::move(rowidx), std::vector<double>(n, scale));
}

SparseMatrix SparseMatrix::zeros(Index nrows, Index ncols) {
  return SparseMatrix(nrows, ncols, std::vector<Index>(ncols + 1, 0), {}, {});
}

SparseMatrix SparseMatrix::transposed() const {
  std::vector<Index> colptr(nrows_ + 1, 0);
  for (Index i : rowidx_) ++colptr[i + 1];
  for (Index i = 0; i < nrows_; ++i) colptr[i + 1] += colptr[i];
  std::vector<Index> next(colptr.begin(), colptr.end() - 1);
  std::vector<Index> rowidx(rowidx_.size());
  std::vector<double> values(values_.size());
  for (Index j = 0; j < ncols_; ++j) {
    for (Index p = colptr_[j]; p < colptr_[j + 1]; ++p) {
      const Index dst = next[rowidx_[p]]++;
      rowidx[dst] = j;
      values[dst] = values_[p];
    }
  }
  return SparseMatrix(ncols_, nrows_, std::move(colptr), std::move(rowidx), std::move(values));
}

bool SparseMatrix::is_upper_triangular() const {
  for (Index j = 0; j < ncols_; ++j)
    if (colptr_[j + 1] > colptr_[j] && rowidx_[colptr_[j + 1] - 1] > j) return false;
  return true;
}

SparseMatrix SparseMatrix::symmetric_from_upper() const {
  if (nrows_ != ncols_) throw DimensionError("symmetric_from_upper: matrix is not square");
  std::vector<Triplet> t;
  t.reserve(2 * values_.size());
  for (Index j = 0; j < ncols_; ++j) {
    for (Index p = colptr_[j]; p < colptr_[j + 1]; ++p) {
      const Index i = rowidx_[p];
      if (i > j) throw FormatError("symmetric_from_upper: entry below the diagonal");
      t.push_back({i, j, values_[p]});
      if (i != j) t.push_back({j, i, values_[p]});
    }
  }
  return from_triplets(nrows_, ncols_, std::move(t));
}

double SparseMatrix::coeff(Index row, Index col) const {
  const auto first = rowidx_.begin() + colptr_[col];
  const auto last = rowidx_.begin() + colptr_[col + 1];
  const auto it = std::lower_bound(first, last, row);
  return (it != last && *it == row) ? values_[it - rowidx_.begin()] : 0.0;
}

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (Index j = 0; j < ncols_; ++j)
    for (Index p = colptr_[j]; p < colptr_[j + 1]; ++p) t.push_back({rowidx_[p], j, values_[p]});
  return t;
}

void spmv_into(const SparseMatrix& a, std::span<const double> x, std::span<double> y, bool transpose,
               double alpha, bool accumulate) {
  const Index in_dim = transpose ? a.rows() : a.cols();
  const Index out_dim = transpose ? a.cols() : a.rows();
  if (static_cast<Index>(x.size()) != in_dim || static_cast<Index>(y.size()) != out_dim)
    throw DimensionError("spmv: operand sizes do not match a " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " matrix");
  if (!accumulate) std::fill(y.begin(), y.end(), 0.0);
  const auto cp = a.colptr();
  const auto ri = a.rowidx();
  const auto v = a.values();
  if (transpose) {
    for (Index j = 0; j < a.cols(); ++j) {
      double s = 0.0;
      for (Index p = cp[j]; p < cp[j + 1]; ++p) s += v[p] * x[ri[p]];
      y[j] += alpha * s;
    }
  } else {
    for (Index j = 0; j < a.cols(); ++j) {
      const double xj = alpha * x[j];
      for (Index p = cp[j]; p < cp[j + 1]; ++p) y[ri[p]] += v[p] * xj;
    }
  }
}

std::vector<double> spmv(const SparseMatrix& a, std::span<const double> x, bool transpose) {
  std::vector<double> y(transpose ? a.cols() : a.rows());
  spmv_into(a, x, y, transpose);
  return y;
}

void symv_upper_into(const SparseMatrix& p_upper, std::span<const double> x, std::span<double> y) {
  const Index n = p_upper.cols();
  if (p_upper.rows() != n || static_cast<Index>(x.size()) != n || static_cast<Index>(y.size()) != n)
    throw DimensionError("symv_upper: operand sizes do not match");
  std::fill(y.begin(), y.end(), 0.0);
  const auto cp = p_upper.colptr();
  const auto ri = p_upper.rowidx();
  const auto v = p_upper.values();
  for (Index j = 0; j < n; ++j) {
    for (Index p = cp[j]; p < cp[j + 1]; ++p) {
      const Index i = ri[p];
      y[i] += v[p] * x[j];
      if (i != j) y[j] += v[p] * x[i];
    }
  }
}

}  // namespace drqcp
