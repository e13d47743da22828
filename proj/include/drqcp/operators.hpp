#pragma once

// Pieces shared by both engines: products with the problem data, the
// (I+M)^{-1} solve, and evaluation of solution and certificate candidates.

#include <optional>
#include <span>
#include <vector>

#include "drqcp/kkt.hpp"
#include "drqcp/problem.hpp"
#include "drqcp/settings.hpp"

namespace drqcp {

// Cached copies of the data in the layouts the kernels want.
class QcpOperators {
 public:
  explicit QcpOperators(const QcpProblem& p);

  const QcpProblem& problem() const { return *problem_; }
  Index n() const { return problem_->n; }
  Index m() const { return problem_->m; }

  // y = P x
  void P_times(std::span<const double> x, std::span<double> y) const;
  // y = A x
  void A_times(std::span<const double> x, std::span<double> y) const;
  // y = A^T x
  void At_times(std::span<const double> x, std::span<double> y) const;
  // out = M z = (P x + A^T y, -A x); scratch needs n entries.
  void M_times(std::span<const double> z, std::span<double> out, std::span<double> scratch) const;

 private:
  const QcpProblem* problem_;
  SparseMatrix p_full_;
  SparseMatrix a_;   // column-dot form of A^T products
  SparseMatrix at_;  // column-dot form of A products
};

// Solves (I + M) z = v through the quasidefinite system
// [[I+P, A^T], [A, -I]] (x, y) = (v_x, -v_y).
class ResolventSolver {
 public:
  ResolventSolver(const QcpProblem& p, const SolverSettings& settings);

  Index dim() const { return n_ + m_; }
  LinsysBackend backend() const { return backend_; }

  // Solve to full accuracy (direct) or to the setup tolerance (indirect).
  void solve_exact(std::span<const double> v, std::span<double> out);
  // Solve with the tolerance of iteration k. In indirect mode the first n
  // entries of out are used as the CG warm start.
  void solve_at(Index k, std::span<const double> v, std::span<double> out);

  Index cg_iterations() const { return cg_iterations_; }

 private:
  void solve_indirect(std::span<const double> v, std::span<double> out, double rel_tol, double floor);

  Index n_;
  Index m_;
  LinsysBackend backend_;
  CgSettings cg_;
  std::optional<KktFactorization> fac_;
  std::optional<ReducedKktOperator> reduced_;
  std::vector<double> rhs_;
  std::vector<double> work_;
  Index cg_iterations_ = 0;
};

struct Candidate {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> s;
};

// Residuals and the right-hand sides of the stopping inequalities.
struct ResidualReport {
  Residuals res;
  double primal_scale = 0.0;  // max(||Ax||, ||s||, ||b||)
  double dual_scale = 0.0;    // max(||Px||, ||A^T y||, ||c||)
  double gap_scale = 0.0;     // max(|x'Px|, |c'x|, |b'y|)
  double objective = 0.0;

  bool solved(double eps_abs, double eps_rel) const;
};

class Evaluator {
 public:
  explicit Evaluator(const QcpOperators& ops);

  ResidualReport residuals(const Candidate& c);
  // Normalizes b'y = -1 and checks ||A^T y||_inf < eps_infeas. The input
  // must already lie in K*. Returns the certificate even when the check
  // fails, with its residual filled in; nullopt when b'y >= 0.
  std::optional<Certificate> primal_certificate(std::span<const double> y);
  // Normalizes c'x = -1, sets s = proj_K(-Ax); nullopt when c'x >= 0.
  std::optional<Certificate> dual_certificate(std::span<const double> x);

 private:
  const QcpOperators* ops_;
  ProjectionWorkspace ws_;
  std::vector<double> nbuf_;
  std::vector<double> mbuf_;
};

// Solution, primal certificate, dual certificate, in that order.
struct TerminationCheck {
  std::optional<Status> status;
  ResidualReport report;
  std::optional<Certificate> certificate;
  double primal_cert = 0.0;
  double dual_cert = 0.0;
};

}  // namespace drqcp

namespace drqcp {

// Runs the three tests in order and stops at the first that passes. sol may
// be null when no solution candidate exists (tau too small). The
// certificate residuals are reported even when they fail.
TerminationCheck check_candidates(Evaluator& eval, const Candidate* sol, std::span<const double> y_dir,
                                  std::span<const double> x_dir, const SolverSettings& settings);

}  // namespace drqcp
