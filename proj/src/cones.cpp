#include "drqcp/cones.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "drqcp/errors.hpp"
#include "drqcp/kernels.hpp"

namespace drqcp {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr int kBoxNewtonMaxIters = 100;
constexpr double kBoxTol = 1e-12;

int order_rank(const Cone& c) {
  return std::visit(overloaded{[](const FreeCone&) { return -1; }, [](const ZeroCone&) { return 0; },
                               [](const NonNegativeCone&) { return 1; }, [](const BoxCone&) { return 2; },
                               [](const SecondOrderCone&) { return 3; }},
                    c);
}

// Half the derivative of t -> (t - t0)^2 + dist(s0, [t l, t u])^2, and the
// generalized second derivative on the current piece.
std::pair<double, double> box_derivative(std::span<const double> l, std::span<const double> u, double t0,
                                         std::span<const double> s0, double t) {
  double g = t - t0;
  double h = 1.0;
  for (std::size_t i = 0; i < s0.size(); ++i) {
    if (std::isfinite(l[i]) && s0[i] < t * l[i]) {
      g += l[i] * (t * l[i] - s0[i]);
      h += l[i] * l[i];
    } else if (std::isfinite(u[i]) && s0[i] > t * u[i]) {
      g += u[i] * (t * u[i] - s0[i]);
      h += u[i] * u[i];
    }
  }
  return {g, h};
}

double clamp_to_box(double s, double lo, double hi, double t) {
  if (std::isfinite(lo)) s = std::max(s, t * lo);
  if (std::isfinite(hi)) s = std::min(s, t * hi);
  return s;
}

// In place: x = (t, s).
void project_box_block(std::span<const double> l, std::span<const double> u, std::span<double> x,
                       Index& newton_iters, Index& bisection_steps) {
  const double t0 = x[0];
  const auto s0 = x.subspan(1);

  bool inside = t0 >= 0.0;
  for (std::size_t i = 0; inside && i < s0.size(); ++i)
    inside = clamp_to_box(s0[i], l[i], u[i], t0) == s0[i];
  if (inside) return;

  double scale = std::max(1.0, std::abs(t0));
  double norm_sq = t0 * t0;
  for (double v : s0) {
    scale = std::max(scale, std::abs(v));
    norm_sq += v * v;
  }
  const double tol = kBoxTol * scale;

  double t = 0.0;
  if (box_derivative(l, u, t0, s0, 0.0).first < 0.0) {
    double lo = 0.0;
    double hi = std::sqrt(norm_sq);
    while (box_derivative(l, u, t0, s0, hi).first < 0.0) hi = 2.0 * hi + 1.0;
    t = std::clamp(t0, lo, hi);
    bool converged = false;
    for (int it = 0; it < kBoxNewtonMaxIters; ++it) {
      const auto [g, h] = box_derivative(l, u, t0, s0, t);
      ++newton_iters;
      if (std::abs(g) <= tol) {
        converged = true;
        break;
      }
      (g < 0.0 ? lo : hi) = t;
      double next = t - g / h;
      if (!(next > lo && next < hi)) {
        next = 0.5 * (lo + hi);
        ++bisection_steps;
      }
      if (next == t) {
        converged = true;
        break;
      }
      t = next;
    }
    if (!converged) {
      while (hi - lo > std::numeric_limits<double>::epsilon() * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        const double g = box_derivative(l, u, t0, s0, mid).first;
        ++bisection_steps;
        if (std::abs(g) <= tol) {
          lo = hi = mid;
          break;
        }
        (g < 0.0 ? lo : hi) = mid;
      }
      t = 0.5 * (lo + hi);
    }
  }
  x[0] = t;
  for (std::size_t i = 0; i < s0.size(); ++i) x[i + 1] = clamp_to_box(x[i + 1], l[i], u[i], t);
}

void project_soc_block(std::span<double> x) {
  const double t = x[0];
  const auto v = x.subspan(1);
  double vnorm = 0.0;
  for (double e : v) vnorm += e * e;
  vnorm = std::sqrt(vnorm);
  if (vnorm <= t) return;
  if (vnorm <= -t) {
    std::fill(x.begin(), x.end(), 0.0);
    return;
  }
  const double alpha = 0.5 * (t + vnorm);
  const double ratio = alpha / vnorm;
  x[0] = alpha;
  for (double& e : v) e *= ratio;
}

void project_block(const Cone& cone, std::span<double> x, std::span<double> scratch, bool dual,
                   Index& newton_iters, Index& bisection_steps) {
  std::visit(overloaded{
                 [&](const FreeCone&) {
                   if (dual) std::fill(x.begin(), x.end(), 0.0);
                 },
                 [&](const ZeroCone&) {
                   if (!dual) std::fill(x.begin(), x.end(), 0.0);
                 },
                 [&](const NonNegativeCone&) {
                   for (double& e : x) e = std::max(e, 0.0);
                 },
                 [&](const SecondOrderCone&) { project_soc_block(x); },
                 [&](const BoxCone& box) {
                   if (!dual) {
                     project_box_block(box.lower, box.upper, x, newton_iters, bisection_steps);
                     return;
                   }
                   // Moreau: proj_{K*}(x) = x + proj_K(-x).
                   auto neg = scratch.first(x.size());
                   for (std::size_t i = 0; i < x.size(); ++i) neg[i] = -x[i];
                   project_box_block(box.lower, box.upper, neg, newton_iters, bisection_steps);
                   for (std::size_t i = 0; i < x.size(); ++i) x[i] += neg[i];
                 },
             },
             cone);
}

void check_dim(const ConeSpec& spec, std::size_t n, const char* who) {
  if (static_cast<Index>(n) != spec.total_dim())
    throw DimensionError(std::string(who) + ": vector has " + std::to_string(n) +
                         " entries, cone dimension is " + std::to_string(spec.total_dim()));
}

void ensure_scratch(const ConeSpec& spec, ProjectionWorkspace& ws) {
  if (static_cast<Index>(ws.scratch.size()) < spec.total_dim()) ws.scratch.resize(spec.total_dim());
}

void project_serial(const ConeSpec& spec, std::span<double> x, ProjectionWorkspace& ws, bool dual) {
  check_dim(spec, x.size(), dual ? "project_dual_cone" : "project_cone");
  ensure_scratch(spec, ws);
  const auto& cones = spec.cones();
  const auto off = spec.offsets();
  for (std::size_t b = 0; b < cones.size(); ++b) {
    const Index len = off[b + 1] - off[b];
    project_block(cones[b], x.subspan(off[b], len), std::span(ws.scratch).subspan(off[b], len), dual,
                  ws.box_newton_iterations, ws.box_bisection_steps);
  }
}

void project_parallel(const ConeSpec& spec, std::span<double> x, ProjectionWorkspace& ws, bool dual) {
  check_dim(spec, x.size(), dual ? "project_dual_cone" : "project_cone");
  ensure_scratch(spec, ws);
  const auto& cones = spec.cones();
  const auto off = spec.offsets();
  const Index nblocks = static_cast<Index>(cones.size());
  Index newton = 0;
  Index bisect = 0;
  std::vector<char> done(nblocks, 0);
  for (Index b = 0; b < nblocks; ++b) {
    const Index len = off[b + 1] - off[b];
    if (!std::holds_alternative<NonNegativeCone>(cones[b]) || len < kernels::kParallelThreshold) continue;
    auto xb = x.subspan(off[b], len);
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < len; ++i) xb[i] = std::max(xb[i], 0.0);
    done[b] = 1;
  }
  // Each block writes only its own slice of x and of the scratch buffer.
#pragma omp parallel for schedule(dynamic) reduction(+ : newton, bisect)
  for (Index b = 0; b < nblocks; ++b) {
    if (done[b]) continue;
    const Index len = off[b + 1] - off[b];
    project_block(cones[b], x.subspan(off[b], len), std::span(ws.scratch).subspan(off[b], len), dual,
                  newton, bisect);
  }
  ws.box_newton_iterations += newton;
  ws.box_bisection_steps += bisect;
}

bool use_parallel(const ConeSpec& spec) {
  return spec.total_dim() >= kernels::kParallelThreshold;
}

}  // namespace

Index cone_dim(const Cone& cone) {
  return std::visit(overloaded{[](const BoxCone& b) { return static_cast<Index>(b.lower.size()) + 1; },
                               [](const auto& c) { return c.dim; }},
                    cone);
}

std::string cone_name(const Cone& cone) {
  return std::visit(overloaded{[](const FreeCone&) { return std::string("free"); },
                               [](const ZeroCone&) { return std::string("zero"); },
                               [](const NonNegativeCone&) { return std::string("nonneg"); },
                               [](const BoxCone&) { return std::string("box"); },
                               [](const SecondOrderCone&) { return std::string("soc"); }},
                    cone);
}

ConeSpec::ConeSpec(std::vector<Cone> cones) : cones_(std::move(cones)) {
  offsets_.reserve(cones_.size() + 1);
  offsets_.push_back(0);
  for (std::size_t b = 0; b < cones_.size(); ++b) {
    const auto& c = cones_[b];
    const std::string where = "cone " + std::to_string(b) + " (" + cone_name(c) + ")";
    if (const auto* box = std::get_if<BoxCone>(&c)) {
      if (box->lower.size() != box->upper.size())
        throw std::invalid_argument(where + ": l and u lengths differ");
      for (std::size_t i = 0; i < box->lower.size(); ++i) {
        const double l = box->lower[i];
        const double u = box->upper[i];
        if (std::isnan(l) || std::isnan(u) || l == std::numeric_limits<double>::infinity() ||
            u == -std::numeric_limits<double>::infinity() || l > u)
          throw std::invalid_argument(where + ": invalid bounds at index " + std::to_string(i));
      }
    } else if (cone_dim(c) < 1) {
      throw std::invalid_argument(where + ": dimension must be at least 1");
    }
    offsets_.push_back(offsets_.back() + cone_dim(c));
  }
  total_dim_ = offsets_.back();
}

bool ConeSpec::has_canonical_order() const {
  int prev = 0;
  for (const auto& c : cones_) {
    const int r = order_rank(c);
    if (r < prev) return false;
    prev = r;
  }
  return true;
}

bool operator==(const ConeSpec& a, const ConeSpec& b) {
  if (a.cones_.size() != b.cones_.size()) return false;
  for (std::size_t i = 0; i < a.cones_.size(); ++i) {
    const auto& x = a.cones_[i];
    const auto& y = b.cones_[i];
    if (x.index() != y.index()) return false;
    if (const auto* bx = std::get_if<BoxCone>(&x)) {
      const auto& by = std::get<BoxCone>(y);
      if (bx->lower != by.lower || bx->upper != by.upper) return false;
    } else if (cone_dim(x) != cone_dim(y)) {
      return false;
    }
  }
  return true;
}

namespace serial {
void project_cone_inplace(const ConeSpec& spec, std::span<double> x, ProjectionWorkspace& ws) {
  project_serial(spec, x, ws, false);
}
void project_dual_cone_inplace(const ConeSpec& spec, std::span<double> x, ProjectionWorkspace& ws) {
  project_serial(spec, x, ws, true);
}
}  // namespace serial

namespace parallel {
void project_cone_inplace(const ConeSpec& spec, std::span<double> x, ProjectionWorkspace& ws) {
  project_parallel(spec, x, ws, false);
}
void project_dual_cone_inplace(const ConeSpec& spec, std::span<double> x, ProjectionWorkspace& ws) {
  project_parallel(spec, x, ws, true);
}
}  // namespace parallel

void project_cone_inplace(const ConeSpec& spec, std::span<double> x, ProjectionWorkspace& ws) {
  use_parallel(spec) ? project_parallel(spec, x, ws, false) : project_serial(spec, x, ws, false);
}

void project_dual_cone_inplace(const ConeSpec& spec, std::span<double> x, ProjectionWorkspace& ws) {
  use_parallel(spec) ? project_parallel(spec, x, ws, true) : project_serial(spec, x, ws, true);
}

std::vector<double> project_cone(const ConeSpec& spec, std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  ProjectionWorkspace ws(spec.total_dim());
  project_cone_inplace(spec, out, ws);
  return out;
}

std::vector<double> project_dual_cone(const ConeSpec& spec, std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  ProjectionWorkspace ws(spec.total_dim());
  project_dual_cone_inplace(spec, out, ws);
  return out;
}

std::pair<double, std::vector<double>> project_box_cone(std::span<const double> lower,
                                                        std::span<const double> upper, double t,
                                                        std::span<const double> s) {
  if (lower.size() != upper.size() || lower.size() != s.size())
    throw DimensionError("project_box_cone: l, u and s must have equal length");
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (!(lower[i] <= upper[i])) throw std::invalid_argument("project_box_cone: requires l <= u");
  std::vector<double> x(s.size() + 1);
  x[0] = t;
  std::copy(s.begin(), s.end(), x.begin() + 1);
  Index newton = 0;
  Index bisect = 0;
  project_box_block(lower, upper, x, newton, bisect);
  return {x[0], std::vector<double>(x.begin() + 1, x.end())};
}

double distance_to_cone(const ConeSpec& spec, std::span<const double> x) {
  const auto p = project_cone(spec, x);
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - p[i]));
  return d;
}

double distance_to_dual_cone(const ConeSpec& spec, std::span<const double> x) {
  const auto p = project_dual_cone(spec, x);
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - p[i]));
  return d;
}

bool in_cone(const ConeSpec& spec, std::span<const double> x, double tol) {
  return distance_to_cone(spec, x) <= tol;
}

bool in_dual_cone(const ConeSpec& spec, std::span<const double> x, double tol) {
  return distance_to_dual_cone(spec, x) <= tol;
}

}  // namespace drqcp
