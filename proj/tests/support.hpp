#pragma once

// Dense oracles and random data shared by the unit and acceptance tests.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "drqcp/probgen.hpp"
#include "drqcp/problem.hpp"
#include "drqcp/sparse.hpp"

namespace testsupport {

using drqcp::Index;
using drqcp::QcpProblem;
using drqcp::Rng;
using drqcp::SparseMatrix;
using Vec = std::vector<double>;

Eigen::MatrixXd dense(const SparseMatrix& a);
// Full symmetric matrix from upper-triangular storage.
Eigen::MatrixXd dense_symmetric(const SparseMatrix& upper);
Eigen::VectorXd eig(std::span<const double> v);
Vec vec(const Eigen::VectorXd& v);

Vec randn(Index len, Rng& rng);
double max_abs_diff(std::span<const double> a, std::span<const double> b);
double inf_norm(std::span<const double> a);

SparseMatrix random_sparse(Index rows, Index cols, double density, Rng& rng);
// Upper triangle of G'G + shift I with G rank x n.
SparseMatrix random_psd_upper(Index n, Index rank, double density, double shift, Rng& rng);

// Dense M = [[P, A'], [-A, 0]].
Eigen::MatrixXd dense_M(const QcpProblem& p);

// Small QCP over K = Zero(zero_rows) x NonNegative(m - zero_rows) with
// P positive definite and b = A x0 + s0, where s0 has random sign so that
// some draws are infeasible.
QcpProblem random_orthant_qcp(Index n, Index m, Index zero_rows, Rng& rng);

// Active-set enumeration over the nonnegative rows. For every pattern S the
// equality-constrained KKT system
//   [[P, A_E'], [A_E, 0]] (x, y_E) = (-c, b_E),  E = zero rows and S
// is solved densely; the pattern is kept when y_S >= 0 and b - Ax >= 0 off E.
struct OracleAnswer {
  bool solvable = false;
  Index feasible_patterns = 0;
  Vec x;
  Vec y;
};

OracleAnswer enumerate_orthant(const QcpProblem& p, double tol = 1e-9);

// Draws random_orthant_qcp instances until the oracle either finds no
// solution or one with entries at most bound in magnitude. Draws near the
// feasibility boundary have huge multipliers, and absolute agreement at 1e-6
// is then below the rounding error of the data.
struct OracleInstance {
  QcpProblem problem;
  OracleAnswer answer;
};
OracleInstance random_oracle_instance(Index n, Index m, Index zero_rows, Rng& rng, double bound = 1e3);

}  // namespace testsupport
