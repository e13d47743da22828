#include "drqcp/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "drqcp/errors.hpp"
#include "drqcp/kernels.hpp"

namespace drqcp {

QcpOperators::QcpOperators(const QcpProblem& p)
    : problem_(&p), p_full_(p.P.symmetric_from_upper()), a_(p.A), at_(p.A.transposed()) {}

void QcpOperators::P_times(std::span<const double> x, std::span<double> y) const {
  kernels::column_dots(p_full_, x, y);
}

void QcpOperators::A_times(std::span<const double> x, std::span<double> y) const {
  kernels::column_dots(at_, x, y);
}

void QcpOperators::At_times(std::span<const double> x, std::span<double> y) const {
  kernels::column_dots(a_, x, y);
}

void QcpOperators::M_times(std::span<const double> z, std::span<double> out, std::span<double> scratch) const {
  const Index n = this->n();
  const auto x = z.first(n);
  const auto y = z.subspan(n);
  P_times(x, out.first(n));
  At_times(y, scratch.first(n));
  kernels::axpy(1.0, scratch.first(n), out.first(n));
  kernels::column_dots(at_, x, out.subspan(n), -1.0);
}

ResolventSolver::ResolventSolver(const QcpProblem& p, const SolverSettings& settings)
    : n_(p.n), m_(p.m), backend_(settings.linsys), cg_(settings.cg), rhs_(p.n + p.m), work_(p.n + p.m) {
  if (backend_ == LinsysBackend::Direct)
    fac_ = factor_kkt(assemble_kkt(p.P, p.A), settings.ordering);
  else
    reduced_.emplace(p.P, p.A);
}

void ResolventSolver::solve_exact(std::span<const double> v, std::span<double> out) {
  if (backend_ == LinsysBackend::Direct) {
    solve_at(1, v, out);
    return;
  }
  std::fill(out.begin(), out.end(), 0.0);
  solve_indirect(v, out, cg_.setup_tol, 0.0);
}

void ResolventSolver::solve_at(Index k, std::span<const double> v, std::span<double> out) {
  if (static_cast<Index>(v.size()) != dim() || static_cast<Index>(out.size()) != dim())
    throw DimensionError("resolvent solve: vectors must have n+m entries");
  if (backend_ == LinsysBackend::Direct) {
    std::copy(v.begin(), v.begin() + n_, rhs_.begin());
    for (Index i = 0; i < m_; ++i) rhs_[n_ + i] = -v[n_ + i];
    fac_->ldl.solve(rhs_, out, work_);
    return;
  }
  const double rel = std::min(cg_.cap, std::pow(static_cast<double>(std::max<Index>(k, 1)), -cg_.exponent));
  solve_indirect(v, out, rel, cg_.floor);
}

void ResolventSolver::solve_indirect(std::span<const double> v, std::span<double> out, double rel_tol,
                                     double floor) {
  std::copy(v.begin(), v.begin() + n_, rhs_.begin());
  for (Index i = 0; i < m_; ++i) rhs_[n_ + i] = -v[n_ + i];
  cg_iterations_ += reduced_->solve(rhs_, out, rel_tol, floor).iterations;
}

bool ResidualReport::solved(double eps_abs, double eps_rel) const {
  return res.primal <= eps_abs + eps_rel * primal_scale && res.dual <= eps_abs + eps_rel * dual_scale &&
         res.gap <= eps_abs + eps_rel * gap_scale;
}

Evaluator::Evaluator(const QcpOperators& ops) : ops_(&ops), nbuf_(ops.n()), mbuf_(ops.m()) {}

ResidualReport Evaluator::residuals(const Candidate& c) {
  const QcpProblem& p = ops_->problem();
  ResidualReport r;

  // primal: Ax + s - b
  ops_->A_times(c.x, mbuf_);
  const double ax = kernels::norm_inf(mbuf_);
  for (Index i = 0; i < p.m; ++i) mbuf_[i] += c.s[i] - p.b[i];
  r.res.primal = kernels::norm_inf(mbuf_);
  r.primal_scale = std::max({ax, kernels::norm_inf(c.s), kernels::norm_inf(p.b)});

  // dual: Px + A^T y + c
  std::vector<double>& px = nbuf_;
  ops_->P_times(c.x, px);
  const double xpx = kernels::dot(c.x, px);
  const double px_norm = kernels::norm_inf(px);
  std::vector<double> aty(p.n);
  ops_->At_times(c.y, aty);
  const double aty_norm = kernels::norm_inf(aty);
  for (Index j = 0; j < p.n; ++j) aty[j] += px[j] + p.c[j];
  r.res.dual = kernels::norm_inf(aty);
  r.dual_scale = std::max({px_norm, aty_norm, kernels::norm_inf(p.c)});

  const double cx = kernels::dot(p.c, c.x);
  const double by = kernels::dot(p.b, c.y);
  r.res.gap = std::abs(xpx + cx + by);
  r.gap_scale = std::max({std::abs(xpx), std::abs(cx), std::abs(by)});
  r.objective = 0.5 * xpx + cx;
  return r;
}

std::optional<Certificate> Evaluator::primal_certificate(std::span<const double> y) {
  const QcpProblem& p = ops_->problem();
  const double by = kernels::dot(p.b, y);
  if (!(by < 0.0)) return std::nullopt;
  Certificate cert{CertificateKind::PrimalInfeasible, std::vector<double>(y.begin(), y.end()), {}, {}, 0.0};
  for (double& v : cert.y) v /= -by;
  ops_->At_times(cert.y, nbuf_);
  cert.residual = kernels::norm_inf(nbuf_);
  return cert;
}

std::optional<Certificate> Evaluator::dual_certificate(std::span<const double> x) {
  const QcpProblem& p = ops_->problem();
  const double cx = kernels::dot(p.c, x);
  if (!(cx < 0.0)) return std::nullopt;
  Certificate cert{CertificateKind::DualInfeasible, {}, std::vector<double>(x.begin(), x.end()), {}, 0.0};
  for (double& v : cert.x) v /= -cx;
  ops_->P_times(cert.x, nbuf_);
  const double px = kernels::norm_inf(nbuf_);
  ops_->A_times(cert.x, mbuf_);
  cert.s.resize(p.m);
  for (Index i = 0; i < p.m; ++i) cert.s[i] = -mbuf_[i];
  project_cone_inplace(p.cones, cert.s, ws_);
  for (Index i = 0; i < p.m; ++i) mbuf_[i] += cert.s[i];
  cert.residual = std::max(px, kernels::norm_inf(mbuf_));
  return cert;
}

TerminationCheck check_candidates(Evaluator& eval, const Candidate* sol, std::span<const double> y_dir,
                                  std::span<const double> x_dir, const SolverSettings& settings) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  TerminationCheck out;
  out.primal_cert = inf;
  out.dual_cert = inf;
  if (sol != nullptr) {
    out.report = eval.residuals(*sol);
    if (out.report.solved(settings.eps_abs, settings.eps_rel)) {
      out.status = Status::Solved;
      return out;
    }
  }
  if (auto cert = y_dir.empty() ? std::nullopt : eval.primal_certificate(y_dir)) {
    out.primal_cert = cert->residual;
    if (cert->residual < settings.eps_infeas) {
      out.status = Status::PrimalInfeasible;
      out.certificate = std::move(cert);
      return out;
    }
  }
  if (auto cert = x_dir.empty() ? std::nullopt : eval.dual_certificate(x_dir)) {
    out.dual_cert = cert->residual;
    if (cert->residual < settings.eps_infeas) {
      out.status = Status::DualInfeasible;
      out.certificate = std::move(cert);
      return out;
    }
  }
  return out;
}

void SolverSettings::validate() const {
  if (!(eps_abs > 0.0)) throw std::invalid_argument("eps_abs must be positive");
  if (!(eps_rel >= 0.0)) throw std::invalid_argument("eps_rel must be nonnegative");
  if (!(eps_infeas > 0.0)) throw std::invalid_argument("eps_infeas must be positive");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  if (!(time_limit_s > 0.0)) throw std::invalid_argument("time_limit_s must be positive");
  if (check_interval < 1) throw std::invalid_argument("check_interval must be at least 1");
  if (!(cg.cap > 0.0) || !(cg.floor >= 0.0) || !(cg.setup_tol > 0.0))
    throw std::invalid_argument("CG tolerances must be positive");
}

std::string_view to_string(LinsysBackend b) { return b == LinsysBackend::Direct ? "direct" : "indirect"; }

}  // namespace drqcp
