#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "drqcp/bench.hpp"
#include "drqcp/errors.hpp"

using namespace drqcp;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("drqcp_test_bench_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

BenchRecord record(ProblemKind kind, std::uint64_t seed, const char* engine, Status status, Index iters) {
  BenchRecord r;
  r.instance = std::string(to_string(kind)) + "_" + std::to_string(seed);
  r.kind = kind;
  r.seed = seed;
  r.engine = engine;
  r.status = status;
  r.iterations = iters;
  return r;
}

// Bitwise equality that treats NaN as equal to itself.
bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

TEST_SUITE("bench") {
  TEST_CASE("summary follows the failure policy") {
    const auto F = ProblemKind::Feasible;
    std::vector<BenchRecord> recs{
        record(F, 0, "homogeneous", Status::Solved, 100), record(F, 0, "direct", Status::Solved, 400),
        record(F, 1, "homogeneous", Status::Solved, 100), record(F, 1, "direct", Status::Solved, 100),
        record(F, 2, "homogeneous", Status::Solved, 50), record(F, 2, "direct", Status::MaxIterations, 1000),
        record(F, 3, "homogeneous", Status::MaxIterations, 1000), record(F, 3, "direct", Status::Solved, 10),
    };
    const auto s = summarize(recs);
    REQUIRE(s.size() == 1);
    CHECK(s[0].instances == 4);
    CHECK(s[0].pairs == 2);
    CHECK(s[0].geomean_ratio == doctest::Approx(2.0));  // sqrt(4 * 1)
    CHECK(s[0].homogeneous_faster_fraction == doctest::Approx(0.5));  // seeds 0 and 2
    CHECK(s[0].failures_homogeneous == 1);
    CHECK(s[0].failures_direct == 1);
  }

  TEST_CASE("histogram bins are log2 spaced and clamp the ends") {
    const auto I = ProblemKind::Infeasible;
    std::vector<BenchRecord> recs{
        record(I, 0, "homogeneous", Status::PrimalInfeasible, 100), record(I, 0, "direct", Status::PrimalInfeasible, 1),
        record(I, 1, "homogeneous", Status::PrimalInfeasible, 1), record(I, 1, "direct", Status::PrimalInfeasible, 5000),
        record(I, 2, "homogeneous", Status::PrimalInfeasible, 10), record(I, 2, "direct", Status::PrimalInfeasible, 30),
    };
    const auto bins = histogram(recs);
    REQUIRE(bins.size() == static_cast<std::size_t>(kHistogramBins));
    CHECK(bins.front().lo == kHistogramLo);
    CHECK(bins.back().hi == doctest::Approx(kHistogramHi));
    for (std::size_t i = 0; i < bins.size(); ++i)
      CHECK(bins[i].hi / bins[i].lo == doctest::Approx(std::pow(2.0, 12.0 / kHistogramBins)));
    CHECK(bins.front().count == 1);
    CHECK(bins.back().count == 1);
    Index total = 0;
    for (const auto& b : bins) total += b.count;
    CHECK(total == 3);
    // ratio 3 lies in [2^1.5, 2^2).
    CHECK(bins[7].count == 1);
  }

  TEST_CASE("small run writes CSVs that reproduce the summary") {
    BenchConfig cfg;
    cfg.n = 10;
    cfg.m = 15;
    cfg.count = 3;
    cfg.density = 0.3;
    cfg.settings.max_iters = 20000;
    const fs::path dir = temp_dir("run");
    cfg.trace_dir = dir / "traces";
    const auto recs = run_bench(cfg);
    CHECK(recs.size() == 18);
    for (const auto& r : recs) {
      CHECK(r.iterations <= cfg.settings.max_iters);
      if (!r.success()) CHECK(r.iterations == cfg.settings.max_iters);
    }
    write_records_csv(recs, dir / "records.csv");
    write_summary_csv(summarize(recs), dir / "summary.csv");
    write_histogram_csv(histogram(recs), dir / "histogram.csv");
    for (const char* f : {"records.csv", "summary.csv", "histogram.csv"}) CHECK(first_line(dir / f) == "schema_version,1");
    CHECK(fs::exists(dir / "traces" / "feasible_10x15_0_homogeneous.csv"));
    CHECK(first_line(dir / "traces" / "unbounded_10x15_2_direct.csv") == "schema_version,1");

    const auto back = read_records_csv(dir / "records.csv");
    REQUIRE(back.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
      CHECK(back[i].instance == recs[i].instance);
      CHECK(back[i].status == recs[i].status);
      CHECK(back[i].iterations == recs[i].iterations);
      CHECK(back[i].solve_time_s == recs[i].solve_time_s);
      CHECK(same(back[i].residuals.primal, recs[i].residuals.primal));
      CHECK(same(back[i].residuals.dual, recs[i].residuals.dual));
      CHECK(same(back[i].residuals.gap, recs[i].residuals.gap));
    }
    const auto s1 = summarize(recs), s2 = summarize(back);
    REQUIRE(s1.size() == s2.size());
    for (std::size_t i = 0; i < s1.size(); ++i) {
      CHECK(s1[i].geomean_ratio == s2[i].geomean_ratio);
      CHECK(s1[i].homogeneous_faster_fraction == s2[i].homogeneous_faster_fraction);
    }
  }

  TEST_CASE("both engines see identical problems") {
    BenchConfig cfg;
    cfg.kinds = {ProblemKind::Feasible};
    cfg.n = 8;
    cfg.m = 12;
    cfg.count = 2;
    cfg.density = 0.3;
    const auto a = run_bench(cfg), b = run_bench(cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].iterations == b[i].iterations);
      CHECK(same(a[i].residuals.primal, b[i].residuals.primal));
    }
  }

  TEST_CASE("malformed records are rejected") {
    const fs::path dir = temp_dir("bad");
    {
      std::ofstream out(dir / "records.csv");
      out << "schema_version,2\n";
    }
    CHECK_THROWS_AS(read_records_csv(dir / "records.csv"), FormatError);
    {
      std::ofstream out(dir / "records.csv");
      out << "schema_version,1\ninstance,kind,seed,engine,status,iterations,solve_time_s,primal,dual,gap\n"
          << "x,feasible,0,homogeneous,solved,abc,0,0,0,0\n";
    }
    CHECK_THROWS_AS(read_records_csv(dir / "records.csv"), FormatError);
  }
}
