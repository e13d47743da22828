#pragma once

// Douglas-Rachford splitting applied to LCP(M, q, C) without the embedding:
//
//   u~ = (I+M)^{-1} (w - q)
//   u  = proj_C(2 u~ - w)
//   w += u - u~
//
// On infeasible problems w diverges, and the direction of the successive
// differences w^{k+1} - w^k supplies the certificate candidates.

#include <optional>
#include <span>
#include <vector>

#include "drqcp/operators.hpp"
#include "drqcp/problem.hpp"
#include "drqcp/settings.hpp"

namespace drqcp {

struct DirectState {
  std::vector<double> w;
  std::vector<double> w0;
  std::vector<double> u;
  std::vector<double> u_tilde;
  std::vector<double> v;        // u + w_prev - 2 u~ = proj_{C*}(w_prev - 2 u~)
  std::vector<double> delta_w;  // smoothed w^{k+1} - w^k
  Index iter = 0;
  double fixed_point_residual = 0.0;
};

class DirectSolver {
 public:
  DirectSolver(const QcpProblem& p, SolverSettings settings = {});

  const QcpProblem& problem() const { return *problem_; }
  const DirectState& state() const { return state_; }

  // w = 0.
  void reset();
  void warm_start(std::span<const double> w);

  void step();

  // Candidate direction for certificates: the smoothed difference, or
  // (w^k - w^0) / k under Cesaro averaging.
  std::vector<double> difference_direction() const;
  // Certificate that passes the shared verifier, if any. Needs two steps.
  std::optional<Certificate> detect_infeasibility(double eps_infeas);

  // (x, y, s) = (u_x, u_y, v_y).
  Candidate candidate() const;
  TerminationCheck check_termination();

  SolveResult solve();

 private:
  const QcpProblem* problem_;
  SolverSettings settings_;
  QcpOperators ops_;
  LcpView lcp_;
  ResolventSolver linsys_;
  Evaluator eval_;
  ProjectionWorkspace ws_;
  DirectState state_;
  std::vector<double> q_;
  std::vector<double> t_;
};

SolveResult solve_direct(const QcpProblem& p, const SolverSettings& settings = {});

}  // namespace drqcp
