#include "drqcp/homogeneous.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "drqcp/errors.hpp"
#include "drqcp/kernels.hpp"

namespace drqcp {

double root_plus(std::span<const double> mu, double eta, std::span<const double> p, std::span<const double> r) {
  if (mu.size() != p.size() || p.size() != r.size()) throw DimensionError("root_plus: length mismatch");
  const double rr = kernels::dot(r, r);
  const double a = 1.0 + rr;
  const double b = kernels::dot(r, mu) - 2.0 * kernels::dot(r, p) - eta;
  const double c = kernels::dot(p, p) - kernels::dot(p, mu);
  double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) {
    if (disc < -1e-9 * std::max(b * b, std::abs(4.0 * a * c)))
      throw NumericalError("root_plus: negative discriminant " + std::to_string(disc));
    disc = 0.0;
  }
  const double sq = std::sqrt(disc);
  // Avoid cancellation between -b and sqrt(disc).
  const double tau = b > 0.0 ? -2.0 * c / (b + sq) : (-b + sq) / (2.0 * a);
  return std::max(tau, 0.0);
}

HomogeneousSolver::HomogeneousSolver(const QcpProblem& p, SolverSettings settings)
    : problem_(&p),
      settings_(std::move(settings)),
      ops_(p),
      lcp_(p),
      linsys_(p, settings_),
      eval_(ops_),
      t_(p.n + p.m) {
  settings_.validate();
  const Index d = p.n + p.m;
  std::vector<double> q(d);
  std::copy(p.c.begin(), p.c.end(), q.begin());
  std::copy(p.b.begin(), p.b.end(), q.begin() + p.n);
  state_.r.assign(d, 0.0);
  linsys_.solve_exact(q, state_.r);
  reset();
}

void HomogeneousSolver::reset() {
  const Index d = problem_->n + problem_->m;
  state_.mu.assign(d, 0.0);
  state_.eta = 1.0;
  state_.z.assign(d, 0.0);
  state_.tau = 0.0;
  state_.z_tilde.assign(d, 0.0);
  state_.tau_tilde = 0.0;
  state_.p.assign(d, 0.0);
  state_.v.assign(d + 1, 0.0);
  state_.iter = 0;
  state_.fixed_point_residual = 0.0;
}

void HomogeneousSolver::warm_start(std::span<const double> mu, double eta) {
  if (static_cast<Index>(mu.size()) != problem_->n + problem_->m)
    throw DimensionError("warm_start: mu must have n+m entries");
  reset();
  state_.mu.assign(mu.begin(), mu.end());
  state_.eta = eta;
}

std::pair<std::vector<double>, double> HomogeneousSolver::resolvent(std::span<const double> mu, double eta) {
  std::vector<double> p(mu.size(), 0.0);
  linsys_.solve_exact(mu, p);
  const double tau = root_plus(mu, eta, p, state_.r);
  kernels::axpy(-tau, state_.r, p);
  return {std::move(p), tau};
}

void HomogeneousSolver::step() {
  HomogeneousState& s = state_;
  linsys_.solve_at(s.iter + 1, s.mu, s.p);
  s.tau_tilde = root_plus(s.mu, s.eta, s.p, s.r);
  std::copy(s.p.begin(), s.p.end(), s.z_tilde.begin());
  kernels::axpy(-s.tau_tilde, s.r, s.z_tilde);
  cone_and_average(s.tau_tilde, false);
}

void HomogeneousSolver::step_pinned() {
  HomogeneousState& s = state_;
  s.eta = 1.0;
  linsys_.solve_at(s.iter + 1, s.mu, s.p);
  s.tau_tilde = 1.0;
  std::copy(s.p.begin(), s.p.end(), s.z_tilde.begin());
  kernels::axpy(-1.0, s.r, s.z_tilde);
  cone_and_average(1.0, true);
}

void HomogeneousSolver::cone_and_average(double tau_tilde, bool pinned) {
  HomogeneousState& s = state_;
  const std::size_t d = s.mu.size();
  // t = w - 2 u~, u = proj_{C+}(-t), v = u + t.
  for (std::size_t i = 0; i < d; ++i) {
    t_[i] = s.mu[i] - 2.0 * s.z_tilde[i];
    s.z[i] = -t_[i];
  }
  lcp_.project_C(s.z, ws_);
  for (std::size_t i = 0; i < d; ++i) s.v[i] = s.z[i] + t_[i];
  const double t_tau = s.eta - 2.0 * tau_tilde;
  if (pinned) {
    s.tau = 1.0;
    s.v[d] = 0.0;
  } else {
    s.tau = std::max(0.0, -t_tau);
    s.v[d] = s.tau + t_tau;
  }

  double sq = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double delta = s.z[i] - s.z_tilde[i];
    sq += delta * delta;
    s.mu[i] += delta;
  }
  const double dtau = s.tau - tau_tilde;
  sq += dtau * dtau;
  if (!pinned) s.eta += dtau;
  s.fixed_point_residual = std::sqrt(sq);
  ++s.iter;
}

Candidate HomogeneousSolver::candidate() const {
  const HomogeneousState& s = state_;
  Candidate c;
  if (!(s.tau > kTauMin)) return c;
  const Index n = problem_->n;
  const Index m = problem_->m;
  c.x.resize(n);
  c.y.resize(m);
  c.s.resize(m);
  for (Index j = 0; j < n; ++j) c.x[j] = s.z[j] / s.tau;
  for (Index i = 0; i < m; ++i) {
    c.y[i] = s.z[n + i] / s.tau;
    c.s[i] = s.v[n + i] / s.tau;
  }
  return c;
}

TerminationCheck HomogeneousSolver::check_termination() {
  const Index n = problem_->n;
  const std::span<const double> z(state_.z);
  const Candidate cand = candidate();
  return check_candidates(eval_, cand.x.size() == static_cast<std::size_t>(n) ? &cand : nullptr, z.subspan(n),
                          z.first(n), settings_);
}

namespace {

double w_norm(const HomogeneousState& s) {
  return std::sqrt(kernels::dot(s.mu, s.mu) + s.eta * s.eta);
}

}  // namespace

SolveResult HomogeneousSolver::solve() {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };

  SolveResult result;
  while (true) {
    step();
    const bool last = state_.iter >= settings_.max_iters;
    const bool timeout = elapsed() > settings_.time_limit_s;
    if (state_.iter % settings_.check_interval != 0 && !last && !timeout) continue;

    TerminationCheck chk = check_termination();
    if (settings_.trace) {
      settings_.trace(TraceRecord{"homogeneous", state_.iter, chk.report.res.primal, chk.report.res.dual,
                                  chk.report.res.gap, state_.tau, kappa(), state_.fixed_point_residual,
                                  chk.primal_cert, chk.dual_cert});
    }
    result.residuals = chk.report.res;
    if (chk.status) {
      result.status = *chk.status;
      if (*chk.status == Status::Solved) {
        Candidate c = candidate();
        result.x = std::move(c.x);
        result.y = std::move(c.y);
        result.s = std::move(c.s);
      } else {
        result.certificate = std::move(chk.certificate);
      }
      break;
    }
    // Steps below the rounding level of w can make no further progress.
    const bool stalled =
        state_.fixed_point_residual <= std::numeric_limits<double>::epsilon() * std::max(1.0, w_norm(state_));
    if (last || timeout || stalled) {
      result.status = timeout && !last ? Status::TimeLimit : Status::MaxIterations;
      result.stalled = stalled && !timeout;
      Candidate c = candidate();
      result.x = std::move(c.x);
      result.y = std::move(c.y);
      result.s = std::move(c.s);
      break;
    }
  }
  result.iterations = state_.iter;
  result.solve_time_s = elapsed();
  return result;
}

SolveResult solve(const QcpProblem& p, const SolverSettings& settings) {
  validate_or_throw(p);
  HomogeneousSolver solver(p, settings);
  return solver.solve();
}

}  // namespace drqcp
