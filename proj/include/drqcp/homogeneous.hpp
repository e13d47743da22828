#pragma once

// Douglas-Rachford splitting on the homogeneous embedding of the LCP.
//
// The iterate w = (mu, eta) lives in R^{d+1}, d = n + m. Each step applies
// the resolvent of the embedded operator Q, projects onto C+ = C x R_+, and
// averages:
//
//   p        = (I+M)^{-1} mu
//   tau~     = root_plus(mu, eta, p, r),  r = (I+M)^{-1} q
//   z~       = p - r tau~
//   (z, tau) = proj_{C+}(2 (z~, tau~) - (mu, eta))
//   (mu, eta) += (z, tau) - (z~, tau~)
//
// Starting from mu = 0, eta = 1.

#include <span>
#include <utility>
#include <vector>

#include "drqcp/operators.hpp"
#include "drqcp/problem.hpp"
#include "drqcp/settings.hpp"

namespace drqcp {

// Nonnegative root of tau^2 (1 + r'r) + tau (r'mu - 2 r'p - eta) + p'(p - mu).
// Throws NumericalError when the discriminant is clearly negative.
double root_plus(std::span<const double> mu, double eta, std::span<const double> p, std::span<const double> r);

struct HomogeneousState {
  std::vector<double> mu;
  double eta = 1.0;
  std::vector<double> z;
  double tau = 0.0;
  std::vector<double> z_tilde;
  double tau_tilde = 0.0;
  std::vector<double> p;
  std::vector<double> r;
  // v = u + w_prev - 2 u~ = proj_{C+*}(w_prev - 2 u~); the last entry is kappa.
  std::vector<double> v;
  Index iter = 0;
  double fixed_point_residual = 0.0;  // ||w^{k+1} - w^k||_2 of the last step
};

class HomogeneousSolver {
 public:
  HomogeneousSolver(const QcpProblem& p, SolverSettings settings = {});

  const QcpProblem& problem() const { return *problem_; }
  const SolverSettings& settings() const { return settings_; }
  const HomogeneousState& state() const { return state_; }
  const QcpOperators& operators() const { return ops_; }

  // mu = 0, eta = 1.
  void reset();
  void warm_start(std::span<const double> mu, double eta);

  // (z~, tau~) for the given w, using the exact solve.
  std::pair<std::vector<double>, double> resolvent(std::span<const double> mu, double eta);

  void step();
  // The same step with tau = tau~ = eta = 1 held fixed.
  void step_pinned();

  double kappa() const { return state_.v.back(); }
  // (x, y, s) = (z_x, z_y, v_y) / tau. Empty vectors when tau <= kTauMin.
  Candidate candidate() const;
  TerminationCheck check_termination();

  SolveResult solve();

  static constexpr double kTauMin = 1e-12;

 private:
  void cone_and_average(double tau_tilde_in, bool pinned);

  const QcpProblem* problem_;
  SolverSettings settings_;
  QcpOperators ops_;
  LcpView lcp_;
  ResolventSolver linsys_;
  Evaluator eval_;
  ProjectionWorkspace ws_;
  HomogeneousState state_;
  std::vector<double> t_;  // w - 2 u~ on the z-block
};

SolveResult solve(const QcpProblem& p, const SolverSettings& settings = {});

}  // namespace drqcp
