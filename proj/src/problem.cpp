#include "drqcp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "drqcp/errors.hpp"
#include "drqcp/kernels.hpp"
#include "drqcp/kkt.hpp"

namespace drqcp {
namespace {

void check_finite(std::span<const double> v, const std::string& name, std::vector<ValidationIssue>& out) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i]))
      out.push_back({Severity::Error, name + "[" + std::to_string(i) + "]", "non-finite value"});
}

// LDL^T of P + delta I with delta tiny relative to |P|; a non-positive
// pivot means P has a clearly negative direction.
bool looks_psd(const SparseMatrix& p_upper) {
  if (p_upper.nnz() == 0) return true;
  double scale = 0.0;
  for (double v : p_upper.values()) scale = std::max(scale, std::abs(v));
  const double delta = 1e-9 * std::max(1.0, scale);
  std::vector<Triplet> t = p_upper.triplets();
  for (Index j = 0; j < p_upper.cols(); ++j) t.push_back({j, j, delta});
  const auto shifted = SparseMatrix::from_triplets(p_upper.rows(), p_upper.cols(), std::move(t));
  try {
    const auto ldl = ldl_factor(shifted, fill_reducing_ordering(shifted, Ordering::Amd));
    return ldl.negative_pivots() == 0;
  } catch (const FactorizationError&) {
    return false;
  }
}

std::string format_issues(const std::vector<ValidationIssue>& issues) {
  std::ostringstream os;
  os << "invalid problem:";
  for (const auto& i : issues)
    if (i.severity == Severity::Error) os << "\n  " << i.path << ": " << i.message;
  return os.str();
}

}  // namespace

double QcpProblem::objective(std::span<const double> x) const {
  std::vector<double> px(n);
  symv_upper_into(P, x, px);
  return 0.5 * kernels::dot(x, px) + kernels::dot(c, x);
}

std::vector<ValidationIssue> validate(const QcpProblem& p, bool strict_psd) {
  std::vector<ValidationIssue> out;
  if (p.n < 1) out.push_back({Severity::Error, "n", "must be at least 1"});
  if (p.m < 0) out.push_back({Severity::Error, "m", "must be nonnegative"});
  const bool p_dims_ok = p.P.rows() == p.n && p.P.cols() == p.n;
  if (!p_dims_ok)
    out.push_back({Severity::Error, "P",
                   "expected " + std::to_string(p.n) + "x" + std::to_string(p.n) + ", got " +
                       std::to_string(p.P.rows()) + "x" + std::to_string(p.P.cols())});
  else if (!p.P.is_upper_triangular())
    out.push_back({Severity::Error, "P.rowidx", "P must be stored as its upper triangle"});
  if (p.A.rows() != p.m || p.A.cols() != p.n)
    out.push_back({Severity::Error, "A",
                   "expected " + std::to_string(p.m) + "x" + std::to_string(p.n) + ", got " +
                       std::to_string(p.A.rows()) + "x" + std::to_string(p.A.cols())});
  if (static_cast<Index>(p.c.size()) != p.n)
    out.push_back({Severity::Error, "c", "length " + std::to_string(p.c.size()) + " does not match n"});
  if (static_cast<Index>(p.b.size()) != p.m)
    out.push_back({Severity::Error, "b", "length " + std::to_string(p.b.size()) + " does not match m"});
  check_finite(p.c, "c", out);
  check_finite(p.b, "b", out);
  check_finite(p.P.values(), "P.values", out);
  check_finite(p.A.values(), "A.values", out);
  if (p.cones.total_dim() != p.m)
    out.push_back({Severity::Error, "cones",
                   "cone dimension mismatch: cones cover " + std::to_string(p.cones.total_dim()) +
                       " rows, m = " + std::to_string(p.m)});
  if (!p.cones.has_canonical_order())
    out.push_back({Severity::Error, "cones", "cone blocks must be ordered zero, nonneg, box, soc"});
  for (std::size_t i = 0; i < p.cones.cones().size(); ++i)
    if (std::holds_alternative<FreeCone>(p.cones.cones()[i]))
      out.push_back({Severity::Error, "cones[" + std::to_string(i) + "]", "free cone not allowed in K"});

  if (p_dims_ok && p.P.is_upper_triangular() && !has_errors(out) && !looks_psd(p.P))
    out.push_back({strict_psd ? Severity::Error : Severity::Warning, "P",
                   "P does not appear to be positive semidefinite"});
  return out;
}

bool has_errors(const std::vector<ValidationIssue>& issues) {
  return std::any_of(issues.begin(), issues.end(),
                     [](const ValidationIssue& i) { return i.severity == Severity::Error; });
}

ValidationError::ValidationError(std::vector<ValidationIssue> issues)
    : std::runtime_error(format_issues(issues)), issues_(std::move(issues)) {}

void validate_or_throw(const QcpProblem& p, bool strict_psd) {
  auto issues = validate(p, strict_psd);
  if (has_errors(issues)) throw ValidationError(std::move(issues));
}

LcpView::LcpView(const QcpProblem& p) : problem_(&p) {
  q_.reserve(p.n + p.m);
  q_.insert(q_.end(), p.c.begin(), p.c.end());
  q_.insert(q_.end(), p.b.begin(), p.b.end());
}

void LcpView::apply_M(std::span<const double> z, std::span<double> out) const {
  const Index n = problem_->n;
  const Index m = problem_->m;
  if (static_cast<Index>(z.size()) != n + m || static_cast<Index>(out.size()) != n + m)
    throw DimensionError("apply_M: vectors must have n+m entries");
  const auto x = z.first(n);
  const auto y = z.subspan(n);
  symv_upper_into(problem_->P, x, out.first(n));
  spmv_into(problem_->A, y, out.first(n), true, 1.0, true);
  spmv_into(problem_->A, x, out.subspan(n), false, -1.0, false);
}

std::vector<double> LcpView::apply_M(std::span<const double> z) const {
  std::vector<double> out(z.size());
  apply_M(z, out);
  return out;
}

void LcpView::project_C(std::span<double> z, ProjectionWorkspace& ws) const {
  project_dual_cone_inplace(problem_->cones, z.subspan(problem_->n), ws);
}

void LcpView::project_C_dual(std::span<double> z, ProjectionWorkspace& ws) const {
  std::fill(z.begin(), z.begin() + problem_->n, 0.0);
  project_cone_inplace(problem_->cones, z.subspan(problem_->n), ws);
}

LcpView to_lcp(const QcpProblem& p) { return LcpView(p); }

CertificateCheck verify_certificate(const QcpProblem& p, const Certificate& cert, double eps_infeas,
                                    double cone_tol) {
  CertificateCheck out;
  if (cert.kind == CertificateKind::PrimalInfeasible) {
    if (static_cast<Index>(cert.y.size()) != p.m) {
      out.reason = "y has wrong length";
      return out;
    }
    std::vector<double> aty(p.n);
    spmv_into(p.A, cert.y, aty, true);
    out.residual = kernels::serial::norm_inf(aty);
    out.normalization_error = std::abs(kernels::serial::dot(p.b, cert.y) + 1.0);
    out.cone_distance = distance_to_dual_cone(p.cones, cert.y);
  } else {
    if (static_cast<Index>(cert.x.size()) != p.n || static_cast<Index>(cert.s.size()) != p.m) {
      out.reason = "x or s has wrong length";
      return out;
    }
    std::vector<double> px(p.n);
    std::vector<double> axs(cert.s);
    symv_upper_into(p.P, cert.x, px);
    spmv_into(p.A, cert.x, axs, false, 1.0, true);
    out.residual = std::max(kernels::serial::norm_inf(px), kernels::serial::norm_inf(axs));
    out.normalization_error = std::abs(kernels::serial::dot(p.c, cert.x) + 1.0);
    out.cone_distance = distance_to_cone(p.cones, cert.s);
  }
  if (!(out.residual < eps_infeas))
    out.reason = "residual " + std::to_string(out.residual) + " not below " + std::to_string(eps_infeas);
  else if (!(out.normalization_error <= 1e-9))
    out.reason = "normalization off by " + std::to_string(out.normalization_error);
  else if (!(out.cone_distance <= cone_tol))
    out.reason = "cone distance " + std::to_string(out.cone_distance);
  else
    out.valid = true;
  return out;
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Solved: return "solved";
    case Status::PrimalInfeasible: return "primal_infeasible";
    case Status::DualInfeasible: return "dual_infeasible";
    case Status::MaxIterations: return "max_iterations";
    case Status::TimeLimit: return "time_limit";
  }
  return "unknown";
}

Status status_from_string(std::string_view s) {
  for (Status st : {Status::Solved, Status::PrimalInfeasible, Status::DualInfeasible, Status::MaxIterations,
                    Status::TimeLimit})
    if (to_string(st) == s) return st;
  throw FormatError("unknown status '" + std::string(s) + "'");
}

std::string_view to_string(CertificateKind k) {
  return k == CertificateKind::PrimalInfeasible ? "primal_infeasible" : "dual_infeasible";
}

CertificateKind certificate_kind_from_string(std::string_view s) {
  if (s == "primal_infeasible") return CertificateKind::PrimalInfeasible;
  if (s == "dual_infeasible") return CertificateKind::DualInfeasible;
  throw FormatError("unknown certificate kind '" + std::string(s) + "'");
}

}  // namespace drqcp
