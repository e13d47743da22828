#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace testsupport {

Eigen::MatrixXd dense(const SparseMatrix& a) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.rows(), a.cols());
  for (const auto& t : a.triplets()) out(t.row, t.col) += t.value;
  return out;
}

Eigen::MatrixXd dense_symmetric(const SparseMatrix& upper) {
  Eigen::MatrixXd u = dense(upper);
  Eigen::MatrixXd out = u + u.transpose();
  out.diagonal() = u.diagonal();
  return out;
}

Eigen::VectorXd eig(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Vec vec(const Eigen::VectorXd& v) { return Vec(v.data(), v.data() + v.size()); }

Vec randn(Index len, Rng& rng) {
  Vec v(len);
  for (double& x : v) x = rng.normal();
  return v;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("max_abs_diff: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double inf_norm(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

SparseMatrix random_sparse(Index rows, Index cols, double density, Rng& rng) {
  std::vector<drqcp::Triplet> t;
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i)
      if (rng.uniform() < density) t.push_back({i, j, rng.normal()});
  return SparseMatrix::from_triplets(rows, cols, std::move(t));
}

SparseMatrix random_psd_upper(Index n, Index rank, double density, double shift, Rng& rng) {
  const Eigen::MatrixXd g = dense(random_sparse(rank, n, density, rng));
  Eigen::MatrixXd p = g.transpose() * g;
  p.diagonal().array() += shift;
  std::vector<drqcp::Triplet> t;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i <= j; ++i)
      if (p(i, j) != 0.0) t.push_back({i, j, p(i, j)});
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

Eigen::MatrixXd dense_M(const QcpProblem& p) {
  const Index n = p.n, m = p.m;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + m, n + m);
  const Eigen::MatrixXd a = dense(p.A);
  M.topLeftCorner(n, n) = dense_symmetric(p.P);
  M.topRightCorner(n, m) = a.transpose();
  M.bottomLeftCorner(m, n) = -a;
  return M;
}

QcpProblem random_orthant_qcp(Index n, Index m, Index zero_rows, Rng& rng) {
  QcpProblem p;
  p.n = n;
  p.m = m;
  p.P = random_psd_upper(n, n, 0.7, 0.1, rng);
  // Every row must constrain x and the equality rows must be independent,
  // otherwise the oracle's KKT systems are singular for every pattern.
  for (;;) {
    p.A = random_sparse(m, n, 0.8, rng);
    const Eigen::MatrixXd a = dense(p.A);
    if ((a.rowwise().norm().array() > 0.0).all() &&
        Eigen::FullPivLU<Eigen::MatrixXd>(a.topRows(zero_rows)).rank() == zero_rows)
      break;
  }
  const Vec x0 = randn(n, rng);
  p.b = drqcp::spmv(p.A, x0);
  for (Index i = zero_rows; i < m; ++i) p.b[i] += rng.normal();
  p.c = randn(n, rng);
  std::vector<drqcp::Cone> cones;
  if (zero_rows > 0) cones.push_back(drqcp::ZeroCone{zero_rows});
  if (m > zero_rows) cones.push_back(drqcp::NonNegativeCone{m - zero_rows});
  p.cones = drqcp::ConeSpec(std::move(cones));
  return p;
}

namespace {

Index zero_rows_of(const QcpProblem& p) {
  Index z = 0;
  for (const auto& c : p.cones.cones())
    if (std::holds_alternative<drqcp::ZeroCone>(c)) z += drqcp::cone_dim(c);
    else if (!std::holds_alternative<drqcp::NonNegativeCone>(c))
      throw std::invalid_argument("enumerate_orthant: only zero and nonnegative cones");
  return z;
}

}  // namespace

OracleAnswer enumerate_orthant(const QcpProblem& p, double tol) {
  const Index n = p.n, m = p.m, z = zero_rows_of(p);
  const Index free_rows = m - z;
  if (free_rows > 20) throw std::invalid_argument("enumerate_orthant: too many rows");
  const Eigen::MatrixXd P = dense_symmetric(p.P);
  const Eigen::MatrixXd A = dense(p.A);
  const Eigen::VectorXd b = eig(p.b), c = eig(p.c);
  const double scale = 1.0 + std::max({P.cwiseAbs().maxCoeff(), A.cwiseAbs().maxCoeff(),
                                       b.cwiseAbs().maxCoeff(), c.cwiseAbs().maxCoeff()});

  OracleAnswer out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << free_rows); ++mask) {
    std::vector<Index> active;
    for (Index i = 0; i < z; ++i) active.push_back(i);
    for (Index i = 0; i < free_rows; ++i)
      if (mask & (std::uint64_t{1} << i)) active.push_back(z + i);
    const Index k = static_cast<Index>(active.size());
    if (k > n) continue;  // generically inconsistent

    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
    Eigen::VectorXd rhs(n + k);
    kkt.topLeftCorner(n, n) = P;
    rhs.head(n) = -c;
    for (Index r = 0; r < k; ++r) {
      kkt.block(n + r, 0, 1, n) = A.row(active[r]);
      kkt.block(0, n + r, n, 1) = A.row(active[r]).transpose();
      rhs[n + r] = b[active[r]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    const Eigen::VectorXd x = sol.head(n);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
    for (Index r = 0; r < k; ++r) y[active[r]] = sol[n + r];
    const Eigen::VectorXd s = b - A * x;

    bool ok = true;
    for (Index i = z; i < m && ok; ++i) ok = y[i] >= -tol * scale && s[i] >= -tol * scale;
    if (!ok) continue;
    if (out.feasible_patterns++ == 0) {
      out.solvable = true;
      out.x = vec(x);
      out.y = vec(y);
    }
  }
  return out;
}

OracleInstance random_oracle_instance(Index n, Index m, Index zero_rows, Rng& rng, double bound) {
  for (;;) {
    OracleInstance inst{random_orthant_qcp(n, m, zero_rows, rng), {}};
    inst.answer = enumerate_orthant(inst.problem);
    if (!inst.answer.solvable ||
        std::max(inf_norm(inst.answer.x), inf_norm(inst.answer.y)) <= bound)
      return inst;
  }
}

}  // namespace testsupport
