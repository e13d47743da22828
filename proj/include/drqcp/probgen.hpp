#pragma once

// Seeded random QCPs over the nonnegative orthant with a planted answer:
// an optimal primal-dual triple, a primal infeasibility certificate, or a
// dual infeasibility certificate.

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "drqcp/problem.hpp"

namespace drqcp {

// mt19937_64 seeded from SplitMix64(seed + stream * golden ratio), so that
// independent streams of one seed never overlap in practice. Uniforms take the
// top 53 bits; normals use Box-Muller. Neither depends on the standard
// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  double uniform();  // [0, 1)
  double normal();

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

std::uint64_t splitmix64(std::uint64_t& state);

enum class ProblemKind { Feasible, Infeasible, Unbounded };

std::string_view to_string(ProblemKind k);
ProblemKind problem_kind_from_string(std::string_view s);

struct GenSpec {
  Index n = 50;
  Index m = 75;
  std::uint64_t seed = 0;
  ProblemKind kind = ProblemKind::Feasible;
  double density = 0.1;

  // Throws std::invalid_argument: m > n is required for Infeasible, and
  // density * m * n must be at least 1.
  void validate() const;
};

struct GeneratedProblem {
  QcpProblem problem;
  // Planted optimal (x, y, s) for Feasible.
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> s;
  // Planted normalized certificate for Infeasible and Unbounded.
  std::optional<Certificate> certificate;
};

// Throws std::logic_error if the planted answer does not check out.
GeneratedProblem generate(const GenSpec& spec);

QcpProblem gen_feasible(const GenSpec& spec);
QcpProblem gen_infeasible(const GenSpec& spec);
QcpProblem gen_unbounded(const GenSpec& spec);

}  // namespace drqcp
