#pragma once

#include <functional>
#include <string_view>

#include "drqcp/kkt.hpp"
#include "drqcp/sparse.hpp"

namespace drqcp {

enum class LinsysBackend { Direct, Indirect };

// How the direct engine turns successive differences of w into a
// certificate candidate.
enum class DirectAveraging {
  Exponential,  // d <- 0.5 d + 0.5 (w^{k+1} - w^k)
  Cesaro,       // d = (w^k - w^0) / k
};

// CG tolerance for the per-iteration solve at iteration k (1-based):
// ||residual||_2 <= max(min(cap, k^-exponent) * ||rhs||_2, floor).
struct CgSettings {
  double cap = 0.1;
  double exponent = 1.5;
  double floor = 1e-12;
  // Relative tolerance for the one-off solve of (I+M) r = q.
  double setup_tol = 1e-12;
};

struct TraceRecord {
  std::string_view engine;  // "homogeneous" or "direct"
  Index iteration = 0;
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double tau = 0.0;
  double kappa = 0.0;
  double fixed_point_residual = 0.0;
  double primal_cert = 0.0;  // ||A^T y||_inf of the normalized candidate, inf if none
  double dual_cert = 0.0;    // max(||Px||_inf, ||Ax + s||_inf), inf if none
};

using TraceCallback = std::function<void(const TraceRecord&)>;

struct SolverSettings {
  double eps_abs = 1e-3;
  double eps_rel = 1e-4;
  double eps_infeas = 1e-4;
  Index max_iters = 100000;
  double time_limit_s = 1000.0;
  Index check_interval = 25;
  LinsysBackend linsys = LinsysBackend::Direct;
  Ordering ordering = Ordering::Amd;
  CgSettings cg;
  DirectAveraging averaging = DirectAveraging::Exponential;
  // Called at every termination check.
  TraceCallback trace;

  // Throws std::invalid_argument on a non-positive tolerance or limit.
  void validate() const;
};

std::string_view to_string(LinsysBackend b);

}  // namespace drqcp
