#pragma once

// Primitive convex cones, Euclidean projections onto them and onto their
// duals, and membership tests. A ConeSpec is an ordered Cartesian product;
// vectors are laid out block by block in that order.

#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "drqcp/sparse.hpp"

namespace drqcp {

struct FreeCone {
  Index dim;
};
struct ZeroCone {
  Index dim;
};
struct NonNegativeCone {
  Index dim;
};
// {(t, s) | t l <= s <= t u, t >= 0}; entries of l may be -inf and of u +inf.
struct BoxCone {
  std::vector<double> lower;
  std::vector<double> upper;
};
// {(t, v) | ||v||_2 <= t}.
struct SecondOrderCone {
  Index dim;
};

using Cone = std::variant<FreeCone, ZeroCone, NonNegativeCone, BoxCone, SecondOrderCone>;

Index cone_dim(const Cone& cone);
std::string cone_name(const Cone& cone);

class ConeSpec {
 public:
  ConeSpec() = default;
  explicit ConeSpec(std::vector<Cone> cones);

  const std::vector<Cone>& cones() const { return cones_; }
  std::span<const Index> offsets() const { return offsets_; }
  Index total_dim() const { return total_dim_; }
  bool empty() const { return cones_.empty(); }

  // Zero, NonNegative, Box, SecondOrder in that order, no Free blocks.
  bool has_canonical_order() const;

  friend bool operator==(const ConeSpec& a, const ConeSpec& b);

 private:
  std::vector<Cone> cones_;
  std::vector<Index> offsets_;
  Index total_dim_ = 0;
};

// Scratch storage for in-place projections; one per concurrent caller.
struct ProjectionWorkspace {
  std::vector<double> scratch;
  Index box_newton_iterations = 0;
  Index box_bisection_steps = 0;

  explicit ProjectionWorkspace(Index dim = 0) : scratch(dim) {}
};

void project_cone_inplace(const ConeSpec& spec, std::span<double> x, ProjectionWorkspace& ws);
void project_dual_cone_inplace(const ConeSpec& spec, std::span<double> x, ProjectionWorkspace& ws);

std::vector<double> project_cone(const ConeSpec& spec, std::span<const double> x);
std::vector<double> project_dual_cone(const ConeSpec& spec, std::span<const double> x);

// Projection of (t, s) onto the box cone with bounds (l, u).
std::pair<double, std::vector<double>> project_box_cone(std::span<const double> lower,
                                                        std::span<const double> upper, double t,
                                                        std::span<const double> s);

// ||x - proj(x)||_inf <= tol.
bool in_cone(const ConeSpec& spec, std::span<const double> x, double tol);
bool in_dual_cone(const ConeSpec& spec, std::span<const double> x, double tol);
double distance_to_cone(const ConeSpec& spec, std::span<const double> x);
double distance_to_dual_cone(const ConeSpec& spec, std::span<const double> x);

namespace serial {
// Block-by-block reference used to check the OpenMP path.
void project_cone_inplace(const ConeSpec& spec, std::span<double> x, ProjectionWorkspace& ws);
void project_dual_cone_inplace(const ConeSpec& spec, std::span<double> x, ProjectionWorkspace& ws);
}  // namespace serial

namespace parallel {
void project_cone_inplace(const ConeSpec& spec, std::span<double> x, ProjectionWorkspace& ws);
void project_dual_cone_inplace(const ConeSpec& spec, std::span<double> x, ProjectionWorkspace& ws);
}  // namespace parallel

}  // namespace drqcp
