#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace drqcp {

using Index = std::int64_t;

struct Triplet {
  Index row;
  Index col;
  double value;
};

// Compressed sparse column matrix. The constructor enforces the storage
// invariants (monotone colptr, strictly increasing in-column row indices,
// finite values); a constructed object is always well formed.
class SparseMatrix {
 public:
  SparseMatrix() : colptr_{0} {}
  SparseMatrix(Index nrows, Index ncols, std::vector<Index> colptr, std::vector<Index> rowidx,
               std::vector<double> values);

  // Duplicates are summed. Explicit zeros are kept unless drop_zeros is set.
  static SparseMatrix from_triplets(Index nrows, Index ncols, std::vector<Triplet> entries,
                                    bool drop_zeros = false);
  static SparseMatrix identity(Index n, double scale = 1.0);
  static SparseMatrix zeros(Index nrows, Index ncols);

  Index rows() const { return nrows_; }
  Index cols() const { return ncols_; }
  Index nnz() const { return static_cast<Index>(values_.size()); }

  std::span<const Index> colptr() const { return colptr_; }
  std::span<const Index> rowidx() const { return rowidx_; }
  std::span<const double> values() const { return values_; }

  SparseMatrix transposed() const;
  bool is_upper_triangular() const;
  // Full symmetric matrix from upper-triangular storage.
  SparseMatrix symmetric_from_upper() const;
  double coeff(Index row, Index col) const;
  std::vector<Triplet> triplets() const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  Index nrows_ = 0;
  Index ncols_ = 0;
  std::vector<Index> colptr_;
  std::vector<Index> rowidx_;
  std::vector<double> values_;
};

// y = A x, or y = A^T x when transpose is set. Serial reference path.
std::vector<double> spmv(const SparseMatrix& a, std::span<const double> x, bool transpose = false);

// y (+)= alpha * op(A) x without allocating.
void spmv_into(const SparseMatrix& a, std::span<const double> x, std::span<double> y,
               bool transpose = false, double alpha = 1.0, bool accumulate = false);

// y = P x where P is symmetric and only its upper triangle is stored.
void symv_upper_into(const SparseMatrix& p_upper, std::span<const double> x, std::span<double> y);

}  // namespace drqcp
