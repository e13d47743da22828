#include <cmath>

#include "doctest.h"
#include "drqcp/errors.hpp"
#include "drqcp/homogeneous.hpp"
#include "drqcp/kernels.hpp"
#include "drqcp/probgen.hpp"
#include "support.hpp"

using namespace drqcp;
using testsupport::max_abs_diff;

namespace {

QcpProblem hand_qp() {
  QcpProblem p;
  p.n = 1;
  p.m = 1;
  p.P = SparseMatrix::identity(1);
  p.A = SparseMatrix::identity(1);
  p.c = {1.0};
  p.b = {0.0};
  p.cones = ConeSpec({ZeroCone{1}});
  return p;
}

// n = 1, m = 0, M = [2], q = [1].
QcpProblem scalar_problem(double pval, double c) {
  QcpProblem p;
  p.n = 1;
  p.m = 0;
  p.P = SparseMatrix::identity(1, pval);
  p.A = SparseMatrix::zeros(0, 1);
  p.c = {c};
  p.b = {};
  return p;
}

SolverSettings tight() {
  SolverSettings s;
  s.eps_abs = 1e-9;
  s.eps_rel = 0.0;
  s.eps_infeas = 1e-9;
  s.check_interval = 1;
  return s;
}

// w* = (x*, y* + s*, 1) is a fixed point of the homogeneous DR map for a
// planted optimal triple.
std::vector<double> planted_fixed_point(const GeneratedProblem& g) {
  std::vector<double> w(g.x);
  for (std::size_t i = 0; i < g.y.size(); ++i) w.push_back(g.y[i] + g.s[i]);
  w.push_back(1.0);
  return w;
}

std::vector<double> current_w(const HomogeneousSolver& s) {
  std::vector<double> w = s.state().mu;
  w.push_back(s.state().eta);
  return w;
}

}  // namespace

TEST_SUITE("homogeneous") {
  TEST_CASE("root_plus degenerate cases") {
    const std::vector<double> mu{0.3, -1.2}, r{0.0, 0.0};
    CHECK(root_plus(mu, 2.0, mu, r) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(root_plus(mu, -3.0, mu, r) == 0.0);
  }

  TEST_CASE("root_plus on the scalar example") {
    const std::vector<double> mu{1.0}, p{1.0 / 3.0}, r{1.0 / 3.0};
    const double tau = root_plus(mu, 1.0, p, r);
    CHECK(tau == doctest::Approx(1.0).epsilon(1e-14));
    const double z = p[0] - r[0] * tau;
    CHECK(std::abs(z) <= 1e-15);
    // (I + M) z + q tau - mu = 0 and tau^2 - tau (eta + z q) - z M z = 0.
    CHECK(std::abs(3.0 * z + tau - 1.0) <= 1e-14);
    CHECK(std::abs(tau * tau - tau * (1.0 + z) - 2.0 * z * z) <= 1e-14);
  }

  TEST_CASE("root_plus rejects a clearly negative discriminant") {
    const std::vector<double> mu{0.0}, p{1.0}, r{0.0};
    CHECK_THROWS_AS(root_plus(mu, 0.0, p, r), NumericalError);
    CHECK_THROWS_AS(root_plus(mu, 0.0, p, std::vector<double>{0.0, 1.0}), DimensionError);
  }

  TEST_CASE("root_plus returns the nonnegative root of its quadratic") {
    Rng rng(51);
    for (int t = 0; t < 500; ++t) {
      // p and r from an actual resolvent so that the discriminant is nonnegative.
      const QcpProblem prob = testsupport::random_orthant_qcp(3, 3, 0, rng);
      HomogeneousSolver solver(prob);
      const auto mu = testsupport::randn(6, rng);
      const double eta = 2.0 * rng.normal();
      const auto [z, tau] = solver.resolvent(mu, eta);
      CHECK(tau >= 0.0);
      std::vector<double> p = z;
      kernels::axpy(tau, solver.state().r, p);
      const auto& r = solver.state().r;
      const double a = 1.0 + kernels::dot(r, r);
      const double b = kernels::dot(r, mu) - 2.0 * kernels::dot(r, p) - eta;
      const double c = kernels::dot(p, p) - kernels::dot(p, mu);
      if (tau > 0.0) CHECK(std::abs(a * tau * tau + b * tau + c) <= 1e-9 * (1.0 + tau * tau));
    }
  }

  TEST_CASE("resolvent at the origin with q = 0") {
    QcpProblem p = hand_qp();
    p.c = {0.0};
    HomogeneousSolver solver(p);
    const auto [z, tau] = solver.resolvent(std::vector<double>{0.0, 0.0}, 1.0);
    CHECK(z == std::vector<double>{0.0, 0.0});
    CHECK(tau == 1.0);
  }

  TEST_CASE("resolvent on the scalar example") {
    const QcpProblem p = scalar_problem(2.0, 1.0);
    HomogeneousSolver solver(p);
    const auto [z, tau] = solver.resolvent(std::vector<double>{1.0}, 1.0);
    CHECK(std::abs(z[0]) <= 1e-15);
    CHECK(tau == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("resolvent is monotone") {
    Rng rng(52);
    for (int t = 0; t < 100; ++t) {
      const QcpProblem p = testsupport::random_orthant_qcp(4, 3, 1, rng);
      HomogeneousSolver solver(p);
      const auto mu1 = testsupport::randn(7, rng), mu2 = testsupport::randn(7, rng);
      const double eta1 = rng.normal(), eta2 = rng.normal();
      const auto [z1, t1] = solver.resolvent(mu1, eta1);
      const auto [z2, t2] = solver.resolvent(mu2, eta2);
      double inner = (t1 - t2) * (eta1 - eta2);
      for (int i = 0; i < 7; ++i) inner += (z1[i] - z2[i]) * (mu1[i] - mu2[i]);
      CHECK(inner >= -1e-10);
    }
  }

  TEST_CASE("initialization") {
    const GeneratedProblem g = generate(GenSpec{20, 30, 1, ProblemKind::Feasible, 0.2});
    HomogeneousSolver solver(g.problem);
    CHECK(solver.state().eta == 1.0);
    CHECK(testsupport::inf_norm(solver.state().mu) == 0.0);
    // (I + M) r = q.
    const auto& r = solver.state().r;
    const Eigen::MatrixXd M = testsupport::dense_M(g.problem);
    Eigen::VectorXd q(50);
    q << testsupport::eig(g.problem.c), testsupport::eig(g.problem.b);
    const Eigen::VectorXd res = testsupport::eig(r) + M * testsupport::eig(r) - q;
    CHECK(res.cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + q.cwiseAbs().maxCoeff()));

    HomogeneousSolver again(g.problem);
    for (int k = 0; k < 5; ++k) solver.step();
    solver.reset();
    CHECK(solver.state().mu == again.state().mu);
    CHECK(solver.state().r == again.state().r);
    for (int k = 0; k < 5; ++k) {
      solver.step();
      again.step();
    }
    CHECK(solver.state().mu == again.state().mu);
  }

  TEST_CASE("a planted fixed point is not moved") {
    const GeneratedProblem g = generate(GenSpec{20, 30, 2, ProblemKind::Feasible, 0.2});
    HomogeneousSolver solver(g.problem);
    const auto w = planted_fixed_point(g);
    solver.warm_start(std::span<const double>(w).first(50), 1.0);
    solver.step();
    CHECK(max_abs_diff(current_w(solver), w) <= 1e-12 * (1.0 + testsupport::inf_norm(w)));
    CHECK(solver.check_termination().status == Status::Solved);
  }

  TEST_CASE("fixed-point residual is nonincreasing and obeys the averaged-operator rate") {
    const GeneratedProblem g = generate(GenSpec{20, 30, 3, ProblemKind::Feasible, 0.2});
    HomogeneousSolver solver(g.problem);
    const auto wstar = planted_fixed_point(g);
    double dist0 = 0.0;
    for (std::size_t i = 0; i < wstar.size(); ++i) {
      const double w0 = i + 1 == wstar.size() ? 1.0 : 0.0;
      dist0 += (wstar[i] - w0) * (wstar[i] - w0);
    }
    double prev = INFINITY;
    for (int k = 0; k < 1000; ++k) {
      solver.step();
      const double f = solver.state().fixed_point_residual;
      CHECK(f <= prev + 1e-12 * std::max(1.0, testsupport::inf_norm(current_w(solver))));
      CHECK(f * f <= dist0 / (k + 1) * (1.0 + 1e-9));
      prev = f;
    }
  }

  TEST_CASE("iterates are positively homogeneous in the starting point") {
    const GeneratedProblem g = generate(GenSpec{15, 25, 4, ProblemKind::Infeasible, 0.3});
    HomogeneousSolver a(g.problem), b(g.problem);
    b.warm_start(std::vector<double>(40, 0.0), 2.0);
    for (int k = 0; k < 100; ++k) {
      a.step();
      b.step();
      const auto wa = current_w(a), wb = current_w(b);
      for (std::size_t i = 0; i < wa.size(); ++i)
        CHECK(std::abs(wb[i] - 2.0 * wa[i]) <= 1e-9 * (1.0 + std::abs(wb[i])));
    }
    // Candidates are ratios and therefore identical.
    const double ca = a.check_termination().primal_cert, cb = b.check_termination().primal_cert;
    REQUIRE(std::isfinite(ca));
    CHECK(std::abs(ca - cb) <= 1e-9 * (1.0 + ca));
  }

  TEST_CASE("candidate satisfies cone membership and complementarity at every iterate") {
    for (ProblemKind kind : {ProblemKind::Feasible, ProblemKind::Infeasible, ProblemKind::Unbounded}) {
      const GeneratedProblem g = generate(GenSpec{15, 25, 5, kind, 0.3});
      HomogeneousSolver solver(g.problem);
      for (int k = 0; k < 300; ++k) {
        solver.step();
        const Candidate c = solver.candidate();
        if (c.x.empty()) continue;
        CHECK(distance_to_cone(g.problem.cones, c.s) == 0.0);
        CHECK(distance_to_dual_cone(g.problem.cones, c.y) == 0.0);
        const double tau = solver.state().tau;
        CHECK(std::abs(kernels::dot(c.s, c.y)) <= 1e-10 * std::max(1.0, 1.0 / (tau * tau)));
      }
    }
  }

  TEST_CASE("hand QP residuals vanish at the KKT point") {
    const QcpProblem p = hand_qp();
    QcpOperators ops(p);
    Evaluator eval(ops);
    const ResidualReport r = eval.residuals(Candidate{{0.0}, {-1.0}, {0.0}});
    CHECK(r.res.primal == 0.0);
    CHECK(r.res.dual == 0.0);
    CHECK(r.res.gap == 0.0);
    CHECK(r.solved(1e-12, 0.0));
  }

  TEST_CASE("termination check outcomes") {
    const GeneratedProblem g = generate(GenSpec{10, 15, 6, ProblemKind::Infeasible, 0.3});
    QcpOperators ops(g.problem);
    Evaluator eval(ops);
    SolverSettings s = tight();
    // y with b'y = -1 and A'y = 0.
    TerminationCheck chk = check_candidates(eval, nullptr, g.certificate->y, {}, s);
    REQUIRE(chk.status.has_value());
    CHECK(*chk.status == Status::PrimalInfeasible);
    CHECK(verify_certificate(g.problem, *chk.certificate, 1e-9).valid);
    // A positive multiple is renormalized.
    std::vector<double> y3 = g.certificate->y;
    for (double& v : y3) v *= 3.0;
    chk = check_candidates(eval, nullptr, y3, {}, s);
    CHECK(chk.status == Status::PrimalInfeasible);
    CHECK(std::abs(chk.certificate->y[0] - g.certificate->y[0]) <= 1e-12);
    // Neither normalization is defined and the solution residuals are large.
    std::vector<double> yneg = g.certificate->y;
    for (double& v : yneg) v = -v;
    std::vector<double> x(10, 0.0);
    const Candidate bad{std::vector<double>(10, 100.0), std::vector<double>(15, 0.0), std::vector<double>(15, 0.0)};
    chk = check_candidates(eval, &bad, yneg, x, s);
    CHECK_FALSE(chk.status.has_value());
  }

  TEST_CASE("hand QP solves") {
    const SolveResult r = solve(hand_qp(), tight());
    REQUIRE(r.status == Status::Solved);
    CHECK(std::abs(r.x[0]) <= 1e-6);
    CHECK(std::abs(r.y[0] + 1.0) <= 1e-6);
    CHECK(std::abs(hand_qp().objective(r.x)) <= 1e-6);
    CHECK_FALSE(r.certificate.has_value());
  }

  TEST_CASE("scalar problem without constraints") {
    const SolveResult r = solve(scalar_problem(2.0, 1.0), tight());
    REQUIRE(r.status == Status::Solved);
    CHECK(r.x[0] == doctest::Approx(-0.5).epsilon(1e-8));
  }

  TEST_CASE("generated problems get the planted verdict") {
    SolverSettings s = tight();
    s.eps_abs = 1e-7;
    s.eps_infeas = 1e-7;
    const GeneratedProblem f = generate(GenSpec{15, 25, 7, ProblemKind::Feasible, 0.3});
    const SolveResult rf = solve(f.problem, s);
    REQUIRE(rf.status == Status::Solved);
    CHECK(std::abs(f.problem.objective(rf.x) - f.problem.objective(f.x)) <=
          1e-5 * (1.0 + std::abs(f.problem.objective(f.x))));

    const GeneratedProblem i = generate(GenSpec{15, 25, 7, ProblemKind::Infeasible, 0.3});
    const SolveResult ri = solve(i.problem, s);
    REQUIRE(ri.status == Status::PrimalInfeasible);
    CHECK(verify_certificate(i.problem, *ri.certificate, s.eps_infeas).valid);
    CHECK(ri.x.empty());

    const GeneratedProblem u = generate(GenSpec{15, 25, 7, ProblemKind::Unbounded, 0.3});
    const SolveResult ru = solve(u.problem, s);
    REQUIRE(ru.status == Status::DualInfeasible);
    CHECK(verify_certificate(u.problem, *ru.certificate, s.eps_infeas).valid);
  }

  TEST_CASE("indirect backend reaches the same solution") {
    // The CG tolerance decays like k^-1.5, so ask for a moderate accuracy.
    const GeneratedProblem g = generate(GenSpec{15, 25, 8, ProblemKind::Feasible, 0.3});
    SolverSettings s = tight();
    s.eps_abs = 1e-6;
    const SolveResult d = solve(g.problem, s);
    s.linsys = LinsysBackend::Indirect;
    const SolveResult i = solve(g.problem, s);
    REQUIRE(d.status == Status::Solved);
    REQUIRE(i.status == Status::Solved);
    CHECK(g.problem.objective(i.x) == doctest::Approx(g.problem.objective(d.x)).epsilon(1e-4));
  }

  TEST_CASE("small problems match the enumeration oracle") {
    Rng rng(53);
    for (int t = 0; t < 20; ++t) {
      const auto [p, oracle] = testsupport::random_oracle_instance(3, 4, t % 2, rng);
      SolverSettings s = tight();
      s.eps_abs = 1e-10;
      s.eps_infeas = 1e-10;
      const SolveResult r = solve(p, s);
      if (oracle.solvable) {
        REQUIRE(r.status == Status::Solved);
        CHECK(max_abs_diff(r.x, oracle.x) <= 1e-6);
        CHECK(max_abs_diff(r.y, oracle.y) <= 1e-6);
      } else {
        CHECK(r.status == Status::PrimalInfeasible);
      }
    }
  }

  TEST_CASE("limits") {
    const GeneratedProblem g = generate(GenSpec{300, 450, 9, ProblemKind::Feasible, 0.05});
    SolverSettings s = tight();
    s.eps_abs = 1e-14;
    s.max_iters = 7;
    const SolveResult r = solve(g.problem, s);
    CHECK(r.status == Status::MaxIterations);
    CHECK(r.iterations == 7);
    s.max_iters = 1000000;
    s.time_limit_s = 1e-3;
    CHECK(solve(g.problem, s).status == Status::TimeLimit);
  }

  TEST_CASE("trace callback sees every check") {
    SolverSettings s = tight();
    s.check_interval = 5;
    s.max_iters = 23;
    s.eps_abs = 1e-15;
    std::vector<Index> iters;
    s.trace = [&](const TraceRecord& t) {
      CHECK(t.engine == "homogeneous");
      iters.push_back(t.iteration);
    };
    const GeneratedProblem g = generate(GenSpec{15, 25, 10, ProblemKind::Feasible, 0.3});
    solve(g.problem, s);
    CHECK(iters == std::vector<Index>{5, 10, 15, 20, 23});
  }

  TEST_CASE("settings are validated") {
    SolverSettings s;
    s.eps_abs = 0.0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = SolverSettings{};
    s.check_interval = 0;
    CHECK_THROWS_AS(HomogeneousSolver(hand_qp(), s), std::invalid_argument);
    s = SolverSettings{};
    s.eps_rel = 0.0;
    CHECK_NOTHROW(s.validate());
  }
}
