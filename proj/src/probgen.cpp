#include "drqcp/probgen.hpp"

#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "drqcp/errors.hpp"
#include "drqcp/kernels.hpp"

namespace drqcp {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t st = seed + stream * 0x9E3779B97F4A7C15ULL;
  engine_.seed(splitmix64(st));
}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

std::string_view to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::Feasible: return "feasible";
    case ProblemKind::Infeasible: return "infeasible";
    case ProblemKind::Unbounded: return "unbounded";
  }
  return "unknown";
}

ProblemKind problem_kind_from_string(std::string_view s) {
  if (s == "feasible") return ProblemKind::Feasible;
  if (s == "infeasible") return ProblemKind::Infeasible;
  if (s == "unbounded") return ProblemKind::Unbounded;
  throw std::invalid_argument("unknown problem kind '" + std::string(s) + "'");
}

void GenSpec::validate() const {
  if (n < 1 || m < 1) throw std::invalid_argument("n and m must be at least 1");
  if (!(density > 0.0 && density <= 1.0)) throw std::invalid_argument("density must lie in (0, 1]");
  if (density * static_cast<double>(m) * static_cast<double>(n) < 1.0)
    throw std::invalid_argument("density * m * n must be at least 1");
  if (kind == ProblemKind::Infeasible && m <= n)
    throw std::invalid_argument("infeasible generation needs m > n");
}

namespace {

using EigenSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, std::int64_t>;
using Dense = std::vector<double>;

enum Stream : std::uint64_t { kStreamA = 1, kStreamG = 2, kStreamVectors = 3 };

// Each entry present with probability density, values standard normal.
EigenSparse random_sparse(Index rows, Index cols, double density, Rng& rng) {
  std::vector<Eigen::Triplet<double, std::int64_t>> t;
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i)
      if (rng.uniform() < density) t.emplace_back(i, j, rng.normal());
  EigenSparse out(rows, cols);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

// The P factor G is (n/2) x n: one entry per row in a spread of columns,
// scaled into [1, 3), plus weak sparse noise. P = G'G is then rank deficient
// with a moderate spread of nonzero eigenvalues.
constexpr double kFactorRowFraction = 0.5;
constexpr double kFactorDiagScale = 2.0;
constexpr double kFactorNoiseScale = 0.1;
constexpr double kFactorNoiseDensity = 0.1;
// Infeasibility margin: b'y* = -gamma ||b|| ||y*|| before normalization, and
// likewise c'x* for unbounded problems.
constexpr double kMargin = 0.6;

EigenSparse random_factor(Index n, Rng& rng) {
  const Index rows = std::max<Index>(1, static_cast<Index>(kFactorRowFraction * static_cast<double>(n)));
  EigenSparse g = random_sparse(rows, n, kFactorNoiseDensity, rng) * kFactorNoiseScale;
  std::vector<Eigen::Triplet<double, std::int64_t>> t;
  for (Index i = 0; i < rows; ++i) t.emplace_back(i, (i * n) / rows, (0.5 + rng.uniform()) * kFactorDiagScale);
  EigenSparse d(rows, n);
  d.setFromTriplets(t.begin(), t.end());
  return g + d;
}

// v <- v - u (v'u + gamma ||v|| ||u||) / ||u||^2, so that v'u = -gamma ||v0|| ||u||.
void impose_margin(Dense& v, const Dense& u) {
  Eigen::Map<Eigen::VectorXd> vv(v.data(), static_cast<Eigen::Index>(v.size()));
  const Eigen::Map<const Eigen::VectorXd> uu(u.data(), static_cast<Eigen::Index>(u.size()));
  const double target = kMargin * std::max(vv.norm(), 1.0) * uu.norm();
  vv -= uu * ((vv.dot(uu) + target) / uu.squaredNorm());
}

Dense randn(Index len, Rng& rng) {
  Dense v(len);
  for (double& x : v) x = rng.normal();
  return v;
}

SparseMatrix to_csc(const EigenSparse& e, bool upper_only) {
  std::vector<Triplet> t;
  for (Index j = 0; j < e.outerSize(); ++j)
    for (EigenSparse::InnerIterator it(e, j); it; ++it)
      if ((!upper_only || it.row() <= it.col()) && it.value() != 0.0) t.push_back({it.row(), it.col(), it.value()});
  return SparseMatrix::from_triplets(e.rows(), e.cols(), std::move(t));
}

// M - (M v) v' / ||v||^2 applied to the rows of M, i.e. M (I - v v'/||v||^2).
EigenSparse project_out_columns(const EigenSparse& m, const Dense& v) {
  const Eigen::Map<const Eigen::VectorXd> vv(v.data(), static_cast<Eigen::Index>(v.size()));
  const Eigen::VectorXd mv = m * vv;
  const Eigen::MatrixXd dense = Eigen::MatrixXd(m) - mv * vv.transpose() / vv.squaredNorm();
  return dense.sparseView(0.0, 0.0);
}

QcpProblem assemble(const EigenSparse& g, const EigenSparse& a, Dense c, Dense b, Index n, Index m) {
  const EigenSparse p = EigenSparse(g.transpose()) * g;
  QcpProblem out;
  out.n = n;
  out.m = m;
  out.P = to_csc(p, true);
  out.A = to_csc(a, false);
  out.c = std::move(c);
  out.b = std::move(b);
  out.cones = ConeSpec({NonNegativeCone{m}});
  return out;
}

double inf_norm(const Dense& v) { return kernels::serial::norm_inf(v); }

void require(bool ok, const std::string& what) {
  if (!ok) throw std::logic_error("generator plant check failed: " + what);
}

// Px + A^T y + c = 0, Ax + s = b, s'y = 0, s, y >= 0.
void check_plant(const QcpProblem& p, const Dense& x, const Dense& y, const Dense& s) {
  Dense r(p.n);
  symv_upper_into(p.P, x, r);
  spmv_into(p.A, y, r, true, 1.0, true);
  double scale = std::max(1.0, inf_norm(p.c));
  for (Index j = 0; j < p.n; ++j) r[j] += p.c[j];
  require(inf_norm(r) <= 1e-10 * scale, "dual residual");
  Dense pr = s;
  spmv_into(p.A, x, pr, false, 1.0, true);
  scale = std::max(1.0, inf_norm(p.b));
  for (Index i = 0; i < p.m; ++i) pr[i] -= p.b[i];
  require(inf_norm(pr) <= 1e-10 * scale, "primal residual");
  for (Index i = 0; i < p.m; ++i) require(s[i] >= 0.0 && y[i] >= 0.0 && s[i] * y[i] == 0.0, "complementarity");
}

GeneratedProblem make_feasible(const GenSpec& spec) {
  const Index n = spec.n, m = spec.m;
  Rng ra(spec.seed, kStreamA), rg(spec.seed, kStreamG), rv(spec.seed, kStreamVectors);
  const EigenSparse a = random_sparse(m, n, spec.density, ra);
  const EigenSparse g = random_factor(n, rg);
  const Dense x = randn(n, rv);
  const Dense z = randn(m, rv);
  Dense y(m), s(m);
  for (Index i = 0; i < m; ++i) {
    y[i] = std::max(z[i], 0.0);
    s[i] = std::max(-z[i], 0.0);
  }
  QcpProblem p = assemble(g, a, Dense(n), Dense(m), n, m);
  spmv_into(p.A, x, p.b);
  for (Index i = 0; i < m; ++i) p.b[i] += s[i];
  symv_upper_into(p.P, x, p.c);
  spmv_into(p.A, y, p.c, true, 1.0, true);
  for (double& v : p.c) v = -v;
  check_plant(p, x, y, s);
  return GeneratedProblem{std::move(p), x, y, s, std::nullopt};
}

GeneratedProblem make_infeasible(const GenSpec& spec) {
  const Index n = spec.n, m = spec.m;
  Rng ra(spec.seed, kStreamA), rg(spec.seed, kStreamG), rv(spec.seed, kStreamVectors);
  const EigenSparse a0 = random_sparse(m, n, spec.density, ra);
  const EigenSparse g = random_factor(n, rg);
  Dense ystar(m);
  // Strictly positive, so every constraint takes part in the certificate.
  for (double& v : ystar) v = std::abs(rv.normal()) + 1e-3;
  // A = (I - y y'/||y||^2) A0, so that A'y = 0.
  const EigenSparse a = EigenSparse(project_out_columns(EigenSparse(a0.transpose()), ystar).transpose());

  const Dense x0 = randn(n, rv);
  Dense y0(m);
  for (double& v : y0) v = std::max(rv.normal(), 0.0);
  Dense b = randn(m, rv);
  impose_margin(b, ystar);

  QcpProblem p = assemble(g, a, Dense(n), std::move(b), n, m);
  // c chosen so the dual is feasible: Px0 + A'y0 + c = 0 with y0 >= 0.
  symv_upper_into(p.P, x0, p.c);
  spmv_into(p.A, y0, p.c, true, 1.0, true);
  for (double& v : p.c) v = -v;

  const double by = kernels::serial::dot(p.b, ystar);
  for (double& v : ystar) v /= -by;
  Certificate cert{CertificateKind::PrimalInfeasible, ystar, {}, {}, 0.0};
  cert.residual = inf_norm(spmv(p.A, cert.y, true));
  const CertificateCheck chk = verify_certificate(p, cert, 1e-10 * std::max(1.0, inf_norm(cert.y)));
  require(chk.valid, chk.reason);
  return GeneratedProblem{std::move(p), {}, {}, {}, std::move(cert)};
}

GeneratedProblem make_unbounded(const GenSpec& spec) {
  const Index n = spec.n, m = spec.m;
  Rng ra(spec.seed, kStreamA), rg(spec.seed, kStreamG), rv(spec.seed, kStreamVectors);
  EigenSparse a = random_sparse(m, n, spec.density, ra);
  const EigenSparse g0 = random_factor(n, rg);
  const Dense xstar = randn(n, rv);
  const Eigen::Map<const Eigen::VectorXd> xs(xstar.data(), n);
  // G x* = 0, hence P x* = 0.
  const EigenSparse g = project_out_columns(g0, xstar);

  // Rows with a_i x* > 0 are bent so that a_i x* = -zeta_i < 0.
  Eigen::MatrixXd ad(a);
  const Eigen::VectorXd ax = ad * xs;
  for (Index i = 0; i < m; ++i) {
    const double zeta = std::abs(rv.normal());
    if (ax[i] > 0.0) ad.row(i) -= ((ax[i] + zeta) / xs.squaredNorm()) * xs.transpose();
  }
  a = ad.sparseView(0.0, 0.0);

  Dense c = randn(n, rv);
  impose_margin(c, xstar);

  const Dense x0 = randn(n, rv);
  Dense s0(m);
  for (double& v : s0) v = std::max(rv.normal(), 0.0);
  QcpProblem p = assemble(g, a, std::move(c), Dense(m), n, m);
  spmv_into(p.A, x0, p.b);
  for (Index i = 0; i < m; ++i) p.b[i] += s0[i];

  const double cx = kernels::serial::dot(p.c, xstar);
  Certificate cert{CertificateKind::DualInfeasible, {}, xstar, {}, 0.0};
  for (double& v : cert.x) v /= -cx;
  cert.s = spmv(p.A, cert.x);
  for (double& v : cert.s) v = std::max(-v, 0.0);
  Dense px(n);
  symv_upper_into(p.P, cert.x, px);
  Dense axs = cert.s;
  spmv_into(p.A, cert.x, axs, false, 1.0, true);
  cert.residual = std::max(inf_norm(px), inf_norm(axs));
  const CertificateCheck chk = verify_certificate(p, cert, 1e-10 * std::max(1.0, inf_norm(cert.x)));
  require(chk.valid, chk.reason);
  return GeneratedProblem{std::move(p), {}, {}, {}, std::move(cert)};
}

}  // namespace

GeneratedProblem generate(const GenSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case ProblemKind::Feasible: return make_feasible(spec);
    case ProblemKind::Infeasible: return make_infeasible(spec);
    case ProblemKind::Unbounded: return make_unbounded(spec);
  }
  throw std::invalid_argument("unknown problem kind");
}

QcpProblem gen_feasible(const GenSpec& spec) {
  GenSpec s = spec;
  s.kind = ProblemKind::Feasible;
  return generate(s).problem;
}

QcpProblem gen_infeasible(const GenSpec& spec) {
  GenSpec s = spec;
  s.kind = ProblemKind::Infeasible;
  return generate(s).problem;
}

QcpProblem gen_unbounded(const GenSpec& spec) {
  GenSpec s = spec;
  s.kind = ProblemKind::Unbounded;
  return generate(s).problem;
}

}  // namespace drqcp
