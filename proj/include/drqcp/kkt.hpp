#pragma once

// Quasidefinite KKT systems [[I+P, A^T], [A, -I]] and the two ways of
// solving them: a cached permuted LDL^T factorization, and preconditioned
// conjugate gradient on the reduced system (I + P + A^T A) x = r_x + A^T r_y.

#include <span>
#include <vector>

#include "drqcp/sparse.hpp"

namespace drqcp {

struct KktSystem {
  Index n = 0;
  Index m = 0;
  SparseMatrix P;          // n x n, upper triangle
  SparseMatrix A;          // m x n
  SparseMatrix assembled;  // (n+m) x (n+m), upper triangle of [[I+P, A^T], [A, -I]]
};

KktSystem assemble_kkt(const SparseMatrix& p_upper, const SparseMatrix& a);

enum class Ordering { Amd, Natural };

// perm[k] is the original index of the k-th pivot. Empty for Natural.
std::vector<Index> fill_reducing_ordering(const SparseMatrix& upper, Ordering ordering);

// perm(K) = L D L^T, L unit lower triangular with the unit diagonal implied
// (only the strictly lower part is stored).
class LdlFactorization {
 public:
  LdlFactorization() = default;
  LdlFactorization(std::vector<Index> perm, SparseMatrix l, std::vector<double> d);

  Index dim() const { return static_cast<Index>(d_.size()); }
  std::span<const Index> permutation() const { return perm_; }
  const SparseMatrix& L() const { return l_; }
  std::span<const double> D() const { return d_; }
  Index positive_pivots() const;
  Index negative_pivots() const;

  // out = K^{-1} rhs. work must hold dim() entries; rhs and out may alias.
  void solve(std::span<const double> rhs, std::span<double> out, std::span<double> work) const;
  std::vector<double> solve(std::span<const double> rhs) const;

 private:
  std::vector<Index> perm_;
  SparseMatrix l_;
  std::vector<double> d_;
};

// Factor the symmetric matrix given by its upper triangle under the symmetric
// permutation perm (identity when empty). Throws FactorizationError on a zero
// or non-finite pivot.
LdlFactorization ldl_factor(const SparseMatrix& upper, std::span<const Index> perm);

// Upper triangle of perm(K) where perm(K)(a,b) = K(perm[a], perm[b]).
SparseMatrix permute_symmetric_upper(const SparseMatrix& upper, std::span<const Index> perm);

struct KktFactorization {
  Index n = 0;
  Index m = 0;
  LdlFactorization ldl;
};

// Also verifies the quasidefinite inertia (n positive, m negative pivots).
KktFactorization factor_kkt(const KktSystem& sys, Ordering ordering = Ordering::Amd);
KktFactorization factor_kkt(const KktSystem& sys, std::span<const Index> perm);

std::vector<double> solve_kkt_direct(const KktFactorization& fac, std::span<const double> rhs);

struct CgStats {
  Index iterations = 0;
  double residual_norm = 0.0;
  double rhs_norm = 0.0;
};

// Jacobi-preconditioned CG on the reduced KKT system. Holds A^T and the
// symmetric expansion of P so that every product is a column-dot kernel.
class ReducedKktOperator {
 public:
  ReducedKktOperator(const SparseMatrix& p_upper, const SparseMatrix& a);

  Index n() const { return n_; }
  Index m() const { return m_; }

  // out = (I + P + A^T A) x; scratch needs m entries.
  void apply(std::span<const double> x, std::span<double> out, std::span<double> scratch) const;
  std::span<const double> preconditioner() const { return inv_diag_; }

  // Solves K (x, y) = rhs where rhs = (r_x, r_y). On entry the first n
  // entries of xy hold the CG warm start. Stops once
  // ||(I+P+A^T A)x - (r_x + A^T r_y)||_2 <= max(rel_tol * ||r_x + A^T r_y||_2, abs_floor).
  // Throws ConvergenceError after max_iters (default 10 n) iterations.
  CgStats solve(std::span<const double> rhs, std::span<double> xy, double rel_tol,
                double abs_floor = 0.0, Index max_iters = -1) const;

 private:
  Index n_;
  Index m_;
  SparseMatrix p_full_;
  SparseMatrix a_;
  SparseMatrix at_;
  std::vector<double> inv_diag_;
};

std::vector<double> solve_kkt_indirect(const SparseMatrix& p_upper, const SparseMatrix& a,
                                       std::span<const double> rhs, double tol,
                                       std::span<const double> warm, CgStats* stats = nullptr);

}  // namespace drqcp
