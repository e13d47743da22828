#include "drqcp/kkt.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "drqcp/errors.hpp"
#include "drqcp/kernels.hpp"

namespace drqcp {

KktSystem assemble_kkt(const SparseMatrix& p_upper, const SparseMatrix& a) {
  const Index n = p_upper.cols();
  const Index m = a.rows();
  if (p_upper.rows() != n) throw DimensionError("assemble_kkt: P must be square");
  if (a.cols() != n)
    throw DimensionError("assemble_kkt: A has " + std::to_string(a.cols()) + " columns, P is " +
                         std::to_string(n) + "x" + std::to_string(n));
  if (!p_upper.is_upper_triangular()) throw FormatError("assemble_kkt: P must be stored as its upper triangle");
  // SparseMatrix already rejects NaN/Inf at construction.

  const SparseMatrix at = a.transposed();
  std::vector<Index> colptr(n + m + 1, 0);
  std::vector<Index> rowidx;
  std::vector<double> values;
  rowidx.reserve(p_upper.nnz() + a.nnz() + n + m);
  values.reserve(rowidx.capacity());

  const auto pcp = p_upper.colptr();
  const auto pri = p_upper.rowidx();
  const auto pv = p_upper.values();
  for (Index j = 0; j < n; ++j) {
    bool diag_seen = false;
    for (Index q = pcp[j]; q < pcp[j + 1]; ++q) {
      rowidx.push_back(pri[q]);
      values.push_back(pri[q] == j ? pv[q] + 1.0 : pv[q]);
      diag_seen = diag_seen || pri[q] == j;
    }
    if (!diag_seen) {
      rowidx.push_back(j);
      values.push_back(1.0);
    }
    colptr[j + 1] = static_cast<Index>(rowidx.size());
  }
  // Column n+i holds row i of A above the -1 diagonal.
  const auto acp = at.colptr();
  const auto ari = at.rowidx();
  const auto av = at.values();
  for (Index i = 0; i < m; ++i) {
    for (Index q = acp[i]; q < acp[i + 1]; ++q) {
      rowidx.push_back(ari[q]);
      values.push_back(av[q]);
    }
    rowidx.push_back(n + i);
    values.push_back(-1.0);
    colptr[n + i + 1] = static_cast<Index>(rowidx.size());
  }
  return KktSystem{n, m, p_upper, a,
                   SparseMatrix(n + m, n + m, std::move(colptr), std::move(rowidx), std::move(values))};
}

std::vector<Index> fill_reducing_ordering(const SparseMatrix& upper, Ordering ordering) {
  if (ordering == Ordering::Natural) return {};
  using EigenSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
  std::vector<Eigen::Triplet<double, int>> t;
  t.reserve(upper.nnz());
  for (const auto& e : upper.triplets())
    t.emplace_back(static_cast<int>(e.row), static_cast<int>(e.col), e.value);
  EigenSparse mat(static_cast<int>(upper.rows()), static_cast<int>(upper.cols()));
  mat.setFromTriplets(t.begin(), t.end());
  Eigen::AMDOrdering<int>::PermutationType amd;
  Eigen::AMDOrdering<int>()(mat.selfadjointView<Eigen::Upper>(), amd);
  std::vector<Index> perm(amd.indices().size());
  for (Index k = 0; k < static_cast<Index>(perm.size()); ++k) perm[k] = amd.indices()[k];
  return perm;
}

SparseMatrix permute_symmetric_upper(const SparseMatrix& upper, std::span<const Index> perm) {
  const Index dim = upper.cols();
  if (perm.empty()) return upper;
  if (static_cast<Index>(perm.size()) != dim) throw DimensionError("permutation length does not match matrix");
  std::vector<Index> pinv(dim, -1);
  for (Index k = 0; k < dim; ++k) {
    if (perm[k] < 0 || perm[k] >= dim || pinv[perm[k]] != -1) throw DimensionError("invalid permutation");
    pinv[perm[k]] = k;
  }
  std::vector<Triplet> t;
  t.reserve(upper.nnz());
  for (const auto& e : upper.triplets()) {
    const Index a = pinv[e.row];
    const Index b = pinv[e.col];
    t.push_back({std::min(a, b), std::max(a, b), e.value});
  }
  return SparseMatrix::from_triplets(dim, dim, std::move(t));
}

LdlFactorization::LdlFactorization(std::vector<Index> perm, SparseMatrix l, std::vector<double> d)
    : perm_(std::move(perm)), l_(std::move(l)), d_(std::move(d)) {}

Index LdlFactorization::positive_pivots() const {
  return std::count_if(d_.begin(), d_.end(), [](double v) { return v > 0.0; });
}

Index LdlFactorization::negative_pivots() const {
  return std::count_if(d_.begin(), d_.end(), [](double v) { return v < 0.0; });
}

void LdlFactorization::solve(std::span<const double> rhs, std::span<double> out,
                             std::span<double> work) const {
  const Index dim = this->dim();
  if (static_cast<Index>(rhs.size()) != dim || static_cast<Index>(out.size()) != dim ||
      static_cast<Index>(work.size()) < dim)
    throw DimensionError("ldl solve: expected vectors of length " + std::to_string(dim));
  if (perm_.empty())
    std::copy(rhs.begin(), rhs.end(), work.begin());
  else
    for (Index k = 0; k < dim; ++k) work[k] = rhs[perm_[k]];

  const auto lp = l_.colptr();
  const auto li = l_.rowidx();
  const auto lx = l_.values();
  for (Index j = 0; j < dim; ++j) {
    const double wj = work[j];
    for (Index p = lp[j]; p < lp[j + 1]; ++p) work[li[p]] -= lx[p] * wj;
  }
  for (Index j = 0; j < dim; ++j) work[j] /= d_[j];
  for (Index j = dim - 1; j >= 0; --j) {
    double s = work[j];
    for (Index p = lp[j]; p < lp[j + 1]; ++p) s -= lx[p] * work[li[p]];
    work[j] = s;
  }

  if (perm_.empty())
    std::copy(work.begin(), work.begin() + dim, out.begin());
  else
    for (Index k = 0; k < dim; ++k) out[perm_[k]] = work[k];
}

std::vector<double> LdlFactorization::solve(std::span<const double> rhs) const {
  std::vector<double> out(dim());
  std::vector<double> work(dim());
  solve(rhs, out, work);
  return out;
}

LdlFactorization ldl_factor(const SparseMatrix& upper, std::span<const Index> perm) {
  const Index dim = upper.cols();
  if (upper.rows() != dim) throw DimensionError("ldl_factor: matrix must be square");
  if (!upper.is_upper_triangular()) throw FormatError("ldl_factor: expected upper-triangular storage");
  const SparseMatrix k = permute_symmetric_upper(upper, perm);
  const auto kp = k.colptr();
  const auto ki = k.rowidx();
  const auto kx = k.values();

  // Elimination tree and column counts of L.
  std::vector<Index> etree(dim, -1);
  std::vector<Index> lnz(dim, 0);
  std::vector<Index> mark(dim, -1);
  for (Index j = 0; j < dim; ++j) {
    mark[j] = j;
    for (Index p = kp[j]; p < kp[j + 1]; ++p) {
      for (Index i = ki[p]; mark[i] != j; i = etree[i]) {
        if (etree[i] == -1) etree[i] = j;
        ++lnz[i];
        mark[i] = j;
      }
    }
  }

  std::vector<Index> lcolptr(dim + 1, 0);
  for (Index j = 0; j < dim; ++j) lcolptr[j + 1] = lcolptr[j] + lnz[j];
  std::vector<Index> lrow(lcolptr[dim]);
  std::vector<double> lval(lcolptr[dim]);
  std::vector<double> d(dim, 0.0);
  std::vector<double> dinv(dim, 0.0);

  // Up-looking numeric factorization: row k of L from a sparse triangular
  // solve whose pattern is the union of etree paths.
  std::vector<Index> next(lcolptr.begin(), lcolptr.end() - 1);
  std::vector<double> y(dim, 0.0);
  std::vector<char> used(dim, 0);
  std::vector<Index> pattern;
  std::vector<Index> stack;
  pattern.reserve(dim);
  stack.reserve(dim);
  for (Index kcol = 0; kcol < dim; ++kcol) {
    pattern.clear();
    d[kcol] = 0.0;
    for (Index p = kp[kcol]; p < kp[kcol + 1]; ++p) {
      const Index i = ki[p];
      if (i == kcol) {
        d[kcol] = kx[p];
        continue;
      }
      y[i] = kx[p];
      if (used[i]) continue;
      stack.clear();
      for (Index t = i; t != -1 && t < kcol && !used[t]; t = etree[t]) {
        used[t] = 1;
        stack.push_back(t);
      }
      while (!stack.empty()) {
        pattern.push_back(stack.back());
        stack.pop_back();
      }
    }
    for (auto it = pattern.rbegin(); it != pattern.rend(); ++it) {
      const Index c = *it;
      const double yc = y[c];
      for (Index p = lcolptr[c]; p < next[c]; ++p) y[lrow[p]] -= lval[p] * yc;
      const Index slot = next[c]++;
      lrow[slot] = kcol;
      lval[slot] = yc * dinv[c];
      d[kcol] -= yc * lval[slot];
      y[c] = 0.0;
      used[c] = 0;
    }
    if (d[kcol] == 0.0 || !std::isfinite(d[kcol]))
      throw FactorizationError("ldl_factor: zero or non-finite pivot at position " + std::to_string(kcol));
    dinv[kcol] = 1.0 / d[kcol];
  }

  std::vector<Index> p_out(perm.begin(), perm.end());
  return LdlFactorization(std::move(p_out),
                          SparseMatrix(dim, dim, std::move(lcolptr), std::move(lrow), std::move(lval)),
                          std::move(d));
}

namespace {

KktFactorization check_inertia(const KktSystem& sys, LdlFactorization ldl) {
  const Index pos = ldl.positive_pivots();
  const Index neg = ldl.negative_pivots();
  if (pos != sys.n || neg != sys.m)
    throw FactorizationError("factor_kkt: expected " + std::to_string(sys.n) + " positive and " +
                             std::to_string(sys.m) + " negative pivots, got " + std::to_string(pos) +
                             " and " + std::to_string(neg) + " (is P positive semidefinite?)");
  return KktFactorization{sys.n, sys.m, std::move(ldl)};
}

}  // namespace

KktFactorization factor_kkt(const KktSystem& sys, Ordering ordering) {
  const auto perm = fill_reducing_ordering(sys.assembled, ordering);
  return check_inertia(sys, ldl_factor(sys.assembled, perm));
}

KktFactorization factor_kkt(const KktSystem& sys, std::span<const Index> perm) {
  return check_inertia(sys, ldl_factor(sys.assembled, perm));
}

std::vector<double> solve_kkt_direct(const KktFactorization& fac, std::span<const double> rhs) {
  if (static_cast<Index>(rhs.size()) != fac.n + fac.m)
    throw DimensionError("solve_kkt_direct: rhs must have n+m entries");
  return fac.ldl.solve(rhs);
}

ReducedKktOperator::ReducedKktOperator(const SparseMatrix& p_upper, const SparseMatrix& a)
    : n_(p_upper.cols()),
      m_(a.rows()),
      p_full_(p_upper.symmetric_from_upper()),
      a_(a),
      at_(a.transposed()) {
  if (a.cols() != n_) throw DimensionError("ReducedKktOperator: A and P column counts differ");
  inv_diag_.assign(n_, 1.0);
  for (Index j = 0; j < n_; ++j) {
    inv_diag_[j] += p_upper.coeff(j, j);
    const auto cp = a_.colptr();
    for (Index p = cp[j]; p < cp[j + 1]; ++p) inv_diag_[j] += a_.values()[p] * a_.values()[p];
    inv_diag_[j] = 1.0 / inv_diag_[j];
  }
}

void ReducedKktOperator::apply(std::span<const double> x, std::span<double> out,
                               std::span<double> scratch) const {
  kernels::column_dots(at_, x, scratch.first(m_));          // A x
  kernels::column_dots(p_full_, x, out);                    // P x
  kernels::column_dots(a_, scratch.first(m_), out, 1.0, true);  // + A^T A x
  kernels::axpy(1.0, x, out);
}

CgStats ReducedKktOperator::solve(std::span<const double> rhs, std::span<double> xy, double rel_tol,
                                  double abs_floor, Index max_iters) const {
  if (static_cast<Index>(rhs.size()) != n_ + m_ || static_cast<Index>(xy.size()) != n_ + m_)
    throw DimensionError("solve_kkt_indirect: rhs and solution must have n+m entries");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("solve_kkt_indirect: tol must be positive");
  if (max_iters < 0) max_iters = std::max<Index>(1, 10 * n_);

  const auto rx = rhs.first(n_);
  const auto ry = rhs.subspan(n_);
  auto x = xy.first(n_);
  auto y = xy.subspan(n_);

  std::vector<double> b(rx.begin(), rx.end());
  kernels::column_dots(a_, ry, b, 1.0, true);
  std::vector<double> r(n_), z(n_), p(n_), kp(n_), scratch(m_);
  CgStats stats;
  stats.rhs_norm = kernels::norm2(b);

  auto finish = [&] {
    kernels::column_dots(at_, x, y);
    kernels::axpy(-1.0, ry, y);
  };

  if (stats.rhs_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    finish();
    return stats;
  }

  apply(x, r, scratch);
  for (Index i = 0; i < n_; ++i) r[i] = b[i] - r[i];
  double rnorm = kernels::norm2(r);
  const double target = std::max(rel_tol * stats.rhs_norm, abs_floor);
  std::vector<double> best(x.begin(), x.end());
  double best_norm = rnorm;
  Index it = 0;
  if (rnorm > target) {
    for (Index i = 0; i < n_; ++i) z[i] = inv_diag_[i] * r[i];
    p = z;
    double rz = kernels::dot(r, z);
    while (rnorm > target) {
      if (it == max_iters) {
        std::copy(best.begin(), best.end(), x.begin());
        finish();
        std::vector<double> out(xy.begin(), xy.end());
        throw ConvergenceError("solve_kkt_indirect: CG reached " + std::to_string(max_iters) +
                                   " iterations with residual " + std::to_string(best_norm),
                               std::move(out), best_norm);
      }
      ++it;
      apply(p, kp, scratch);
      const double alpha = rz / kernels::dot(p, kp);
      kernels::axpy(alpha, p, x);
      kernels::axpy(-alpha, kp, r);
      rnorm = kernels::norm2(r);
      if (rnorm < best_norm) {
        best_norm = rnorm;
        std::copy(x.begin(), x.end(), best.begin());
      }
      if (rnorm <= target) break;
      for (Index i = 0; i < n_; ++i) z[i] = inv_diag_[i] * r[i];
      const double rz_next = kernels::dot(r, z);
      const double beta = rz_next / rz;
      rz = rz_next;
      for (Index i = 0; i < n_; ++i) p[i] = z[i] + beta * p[i];
    }
  }
  stats.iterations = it;
  stats.residual_norm = rnorm;
  finish();
  return stats;
}

std::vector<double> solve_kkt_indirect(const SparseMatrix& p_upper, const SparseMatrix& a,
                                       std::span<const double> rhs, double tol,
                                       std::span<const double> warm, CgStats* stats) {
  const ReducedKktOperator op(p_upper, a);
  if (static_cast<Index>(warm.size()) != op.n())
    throw DimensionError("solve_kkt_indirect: warm start must have n entries");
  std::vector<double> xy(op.n() + op.m(), 0.0);
  std::copy(warm.begin(), warm.end(), xy.begin());
  const CgStats s = op.solve(rhs, xy, tol);
  if (stats) *stats = s;
  return xy;
}

}  // namespace drqcp
