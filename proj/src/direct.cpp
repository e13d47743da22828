#include "drqcp/direct.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "drqcp/errors.hpp"
#include "drqcp/kernels.hpp"

namespace drqcp {

DirectSolver::DirectSolver(const QcpProblem& p, SolverSettings settings)
    : problem_(&p),
      settings_(std::move(settings)),
      ops_(p),
      lcp_(p),
      linsys_(p, settings_),
      eval_(ops_),
      q_(lcp_.q().begin(), lcp_.q().end()),
      t_(p.n + p.m) {
  settings_.validate();
  reset();
}

void DirectSolver::reset() {
  const std::size_t d = q_.size();
  state_.w.assign(d, 0.0);
  state_.w0.assign(d, 0.0);
  state_.u.assign(d, 0.0);
  state_.u_tilde.assign(d, 0.0);
  state_.v.assign(d, 0.0);
  state_.delta_w.assign(d, 0.0);
  state_.iter = 0;
  state_.fixed_point_residual = 0.0;
}

void DirectSolver::warm_start(std::span<const double> w) {
  if (w.size() != q_.size()) throw DimensionError("warm_start: w must have n+m entries");
  reset();
  state_.w.assign(w.begin(), w.end());
  state_.w0 = state_.w;
}

void DirectSolver::step() {
  DirectState& s = state_;
  const std::size_t d = q_.size();
  for (std::size_t i = 0; i < d; ++i) t_[i] = s.w[i] - q_[i];
  linsys_.solve_at(s.iter + 1, t_, s.u_tilde);
  for (std::size_t i = 0; i < d; ++i) {
    t_[i] = s.w[i] - 2.0 * s.u_tilde[i];
    s.u[i] = -t_[i];
  }
  lcp_.project_C(s.u, ws_);
  double sq = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    s.v[i] = s.u[i] + t_[i];
    const double delta = s.u[i] - s.u_tilde[i];
    sq += delta * delta;
    s.w[i] += delta;
    s.delta_w[i] = 0.5 * s.delta_w[i] + 0.5 * delta;
  }
  s.fixed_point_residual = std::sqrt(sq);
  ++s.iter;
}

std::vector<double> DirectSolver::difference_direction() const {
  if (settings_.averaging == DirectAveraging::Exponential || state_.iter == 0) return state_.delta_w;
  std::vector<double> d(state_.w.size());
  const double k = static_cast<double>(state_.iter);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = (state_.w[i] - state_.w0[i]) / k;
  return d;
}

std::optional<Certificate> DirectSolver::detect_infeasibility(double eps_infeas) {
  if (state_.iter < 2) return std::nullopt;
  const Index n = problem_->n;
  std::vector<double> dir = difference_direction();
  std::span<double> y(dir.begin() + n, dir.end());
  std::vector<double> y_dir(y.begin(), y.end());
  project_dual_cone_inplace(problem_->cones, y_dir, ws_);
  if (auto c = eval_.primal_certificate(y_dir); c && c->residual < eps_infeas) return c;
  if (auto c = eval_.dual_certificate(std::span<const double>(dir).first(n)); c && c->residual < eps_infeas)
    return c;
  return std::nullopt;
}

Candidate DirectSolver::candidate() const {
  const Index n = problem_->n;
  const auto& s = state_;
  return Candidate{std::vector<double>(s.u.begin(), s.u.begin() + n), std::vector<double>(s.u.begin() + n, s.u.end()),
                   std::vector<double>(s.v.begin() + n, s.v.end())};
}

TerminationCheck DirectSolver::check_termination() {
  const Index n = problem_->n;
  const Candidate cand = candidate();
  if (state_.iter < 2) return check_candidates(eval_, &cand, {}, {}, settings_);
  std::vector<double> dir = difference_direction();
  std::vector<double> y_dir(dir.begin() + n, dir.end());
  project_dual_cone_inplace(problem_->cones, y_dir, ws_);
  return check_candidates(eval_, &cand, y_dir, std::span<const double>(dir).first(n), settings_);
}

SolveResult DirectSolver::solve() {
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
      settings_.trace(TraceRecord{"direct", state_.iter, chk.report.res.primal, chk.report.res.dual,
                                  chk.report.res.gap, 1.0, 0.0, state_.fixed_point_residual, chk.primal_cert,
                                  chk.dual_cert});
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
    if (last || timeout) {
      result.status = timeout && !last ? Status::TimeLimit : Status::MaxIterations;
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

SolveResult solve_direct(const QcpProblem& p, const SolverSettings& settings) {
  validate_or_throw(p);
  DirectSolver solver(p, settings);
  return solver.solve();
}

}  // namespace drqcp
