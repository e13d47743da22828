#pragma once

// Comparative benchmark of the homogeneous and direct engines on generated
// problems, with per-instance records, per-kind ratio summaries and log2
// ratio histograms written as CSV. Every CSV starts with "schema_version,1".

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "drqcp/probgen.hpp"
#include "drqcp/settings.hpp"

namespace drqcp {

struct BenchConfig {
  std::vector<ProblemKind> kinds{ProblemKind::Feasible, ProblemKind::Infeasible, ProblemKind::Unbounded};
  Index n = 50;
  Index m = 75;
  Index count = 20;
  std::uint64_t seed = 0;  // instance i of each kind uses seed + i
  double density = 0.1;
  // Both engines get these settings. Defaults stop on an absolute 1e-6
  // violation of every condition and check every iteration, so iteration
  // counts are exact rather than rounded up to the check interval.
  SolverSettings settings = [] {
    SolverSettings s;
    s.eps_abs = 1e-6;
    s.eps_rel = 0.0;
    s.eps_infeas = 1e-6;
    s.check_interval = 1;
    return s;
  }();
  // Per-instance trace CSVs are written here when set.
  std::optional<std::filesystem::path> trace_dir;
};

struct BenchRecord {
  std::string instance;  // {kind}_{n}x{m}_{seed}
  ProblemKind kind = ProblemKind::Feasible;
  std::uint64_t seed = 0;
  std::string engine;  // "homogeneous" or "direct"
  Status status = Status::MaxIterations;
  Index iterations = 0;  // max_iters when the run failed
  double solve_time_s = 0.0;
  Residuals residuals;

  // The status expected for the kind: Solved, PrimalInfeasible or DualInfeasible.
  bool success() const;
};

struct RatioSummary {
  ProblemKind kind = ProblemKind::Feasible;
  Index instances = 0;
  Index pairs = 0;                        // both engines succeeded
  double geomean_ratio = 0.0;             // direct / homogeneous iterations over pairs; NaN if no pairs
  double homogeneous_faster_fraction = 0.0;  // over all instances
  Index failures_homogeneous = 0;
  Index failures_direct = 0;
};

inline constexpr int kHistogramBins = 24;
inline constexpr double kHistogramLo = 0.25;   // 2^-2
inline constexpr double kHistogramHi = 1024.0;  // 2^10

struct HistogramBin {
  ProblemKind kind;
  double lo;
  double hi;
  Index count;
};

std::vector<BenchRecord> run_bench(const BenchConfig& config);
std::vector<RatioSummary> summarize(const std::vector<BenchRecord>& records);
// Ratios of successful pairs; values outside [2^-2, 2^10] land in the end bins.
std::vector<HistogramBin> histogram(const std::vector<BenchRecord>& records);

void write_records_csv(const std::vector<BenchRecord>& records, const std::filesystem::path& path);
std::vector<BenchRecord> read_records_csv(const std::filesystem::path& path);
void write_summary_csv(const std::vector<RatioSummary>& summary, const std::filesystem::path& path);
void write_histogram_csv(const std::vector<HistogramBin>& bins, const std::filesystem::path& path);

}  // namespace drqcp
