#pragma once

// Quadratic cone program
//
//   minimize (1/2) x'Px + c'x   subject to  Ax + s = b,  s in K
//
// its embedding as the monotone LCP  C ∋ z ⊥ Mz + q ∈ C*  with
// z = (x, y), M = [[P, A'], [-A, 0]], q = (c, b), C = R^n x K*,
// infeasibility certificates, and solve results.

#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "drqcp/cones.hpp"
#include "drqcp/sparse.hpp"

namespace drqcp {

struct QcpProblem {
  Index n = 0;
  Index m = 0;
  SparseMatrix P;  // n x n, upper triangle only
  SparseMatrix A;  // m x n
  std::vector<double> c;
  std::vector<double> b;
  ConeSpec cones;  // total_dim == m

  double objective(std::span<const double> x) const;
  friend bool operator==(const QcpProblem&, const QcpProblem&) = default;
};

enum class Severity { Error, Warning };

struct ValidationIssue {
  Severity severity;
  std::string path;  // e.g. "b[3]", "cones", "P.rowidx"
  std::string message;
};

// Dimensions, cone ordering, finite data, upper-triangular P. A P that does
// not look positive semidefinite is reported as a Warning unless strict_psd.
std::vector<ValidationIssue> validate(const QcpProblem& p, bool strict_psd = false);
bool has_errors(const std::vector<ValidationIssue>& issues);

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<ValidationIssue> issues);
  const std::vector<ValidationIssue>& issues() const { return issues_; }

 private:
  std::vector<ValidationIssue> issues_;
};

void validate_or_throw(const QcpProblem& p, bool strict_psd = false);

class LcpView {
 public:
  explicit LcpView(const QcpProblem& p);

  Index n() const { return problem_->n; }
  Index dim() const { return problem_->n + problem_->m; }
  std::span<const double> q() const { return q_; }
  // out = M z = (P x + A'y, -A x).
  void apply_M(std::span<const double> z, std::span<double> out) const;
  std::vector<double> apply_M(std::span<const double> z) const;
  // Projection onto C = R^n x K*, and onto C* = {0}^n x K.
  void project_C(std::span<double> z, ProjectionWorkspace& ws) const;
  void project_C_dual(std::span<double> z, ProjectionWorkspace& ws) const;

 private:
  const QcpProblem* problem_;
  std::vector<double> q_;
};

LcpView to_lcp(const QcpProblem& p);

enum class CertificateKind { PrimalInfeasible, DualInfeasible };

struct Certificate {
  CertificateKind kind;
  std::vector<double> y;  // primal infeasibility: b'y = -1, y in K*
  std::vector<double> x;  // dual infeasibility: c'x = -1
  std::vector<double> s;  // dual infeasibility: s = proj_K(-Ax)
  double residual = 0.0;  // ||A'y||_inf, or max(||Px||_inf, ||Ax + s||_inf)

  friend bool operator==(const Certificate&, const Certificate&) = default;
};

struct CertificateCheck {
  bool valid = false;
  double residual = std::numeric_limits<double>::infinity();
  double normalization_error = std::numeric_limits<double>::infinity();
  double cone_distance = std::numeric_limits<double>::infinity();
  std::string reason;
};

// Checks A'y = 0, y in K*, b'y = -1 (or Px = 0, Ax + s = 0, s in K,
// c'x = -1) with residual < eps_infeas and cone distance <= cone_tol.
CertificateCheck verify_certificate(const QcpProblem& p, const Certificate& cert, double eps_infeas,
                                    double cone_tol = 1e-9);

enum class Status { Solved, PrimalInfeasible, DualInfeasible, MaxIterations, TimeLimit };

std::string_view to_string(Status s);
Status status_from_string(std::string_view s);
std::string_view to_string(CertificateKind k);
CertificateKind certificate_kind_from_string(std::string_view s);

struct Residuals {
  double primal = std::numeric_limits<double>::infinity();
  double dual = std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();

  friend bool operator==(const Residuals&, const Residuals&) = default;
};

struct SolveResult {
  Status status = Status::MaxIterations;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> s;
  std::optional<Certificate> certificate;
  Index iterations = 0;
  Residuals residuals;
  double solve_time_s = 0.0;
  // The iterate stopped moving exactly without a solution or certificate.
  // Only ever set together with MaxIterations.
  bool stalled = false;

  friend bool operator==(const SolveResult&, const SolveResult&) = default;
};

}  // namespace drqcp
