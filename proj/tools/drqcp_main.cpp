// drqcp command-line front end.
//
//   drqcp solve PROBLEM.json [--algorithm homogeneous|direct] [--out RESULT.json] ...
//   drqcp gen --kind feasible --n 50 --m 75 --seed 0 --count 10 --out DIR
//   drqcp bench --n 50 --m 75 --count 20 --out DIR
//   drqcp summarize RECORDS.csv --out DIR
//
// Exit status: 0 solved or certified, 1 usage or data error, 2 iteration or
// time limit reached.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "drqcp/bench.hpp"
#include "drqcp/direct.hpp"
#include "drqcp/homogeneous.hpp"
#include "drqcp/io.hpp"
#include "drqcp/probgen.hpp"

namespace fs = std::filesystem;
using namespace drqcp;

namespace {

struct SettingsFlags {
  double eps_abs;
  double eps_rel;
  double eps_infeas;
  Index max_iters;
  double time_limit_s;
  Index check_interval;
  std::string linsys = "direct";
};

void add_settings_flags(CLI::App* cmd, SettingsFlags& f, const SolverSettings& defaults) {
  f.eps_abs = defaults.eps_abs;
  f.eps_rel = defaults.eps_rel;
  f.eps_infeas = defaults.eps_infeas;
  f.max_iters = defaults.max_iters;
  f.time_limit_s = defaults.time_limit_s;
  f.check_interval = defaults.check_interval;
  cmd->add_option("--linsys", f.linsys, "Linear system backend")
      ->check(CLI::IsMember({"direct", "indirect"}))
      ->capture_default_str();
  cmd->add_option("--eps-abs", f.eps_abs, "Absolute tolerance")->capture_default_str();
  cmd->add_option("--eps-rel", f.eps_rel, "Relative tolerance")->capture_default_str();
  cmd->add_option("--eps-infeas", f.eps_infeas, "Infeasibility tolerance")->capture_default_str();
  cmd->add_option("--max-iters", f.max_iters, "Iteration limit")->capture_default_str();
  cmd->add_option("--time-limit-s", f.time_limit_s, "Time limit in seconds")->capture_default_str();
  cmd->add_option("--check-interval", f.check_interval, "Iterations between termination checks")
      ->capture_default_str();
}

SolverSettings to_settings(const SettingsFlags& f, SolverSettings s) {
  s.eps_abs = f.eps_abs;
  s.eps_rel = f.eps_rel;
  s.eps_infeas = f.eps_infeas;
  s.max_iters = f.max_iters;
  s.time_limit_s = f.time_limit_s;
  s.check_interval = f.check_interval;
  s.linsys = f.linsys == "indirect" ? LinsysBackend::Indirect : LinsysBackend::Direct;
  s.validate();
  return s;
}

const std::vector<std::string> kKinds{"feasible", "infeasible", "unbounded"};

int exit_code(Status s) {
  return s == Status::MaxIterations || s == Status::TimeLimit ? 2 : 0;
}

void print_summary(const std::vector<RatioSummary>& summary) {
  for (const RatioSummary& s : summary)
    std::printf("%-10s instances=%lld pairs=%lld geomean_ratio=%.3f homogeneous_faster=%.3f failures(h/d)=%lld/%lld\n",
                std::string(to_string(s.kind)).c_str(), static_cast<long long>(s.instances),
                static_cast<long long>(s.pairs), s.geomean_ratio, s.homogeneous_faster_fraction,
                static_cast<long long>(s.failures_homogeneous), static_cast<long long>(s.failures_direct));
}

void write_bench_outputs(const std::vector<BenchRecord>& records, const fs::path& dir, bool with_records) {
  fs::create_directories(dir);
  if (with_records) write_records_csv(records, dir / "records.csv");
  const auto summary = summarize(records);
  write_summary_csv(summary, dir / "summary.csv");
  write_histogram_csv(histogram(records), dir / "histogram.csv");
  print_summary(summary);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Douglas-Rachford solver for quadratic cone programs"};
  app.require_subcommand(1);

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Solve a problem file");
  std::string problem_path, out_path, trace_path, algorithm = "homogeneous";
  SettingsFlags solve_flags;
  solve_cmd->add_option("problem", problem_path, "Problem JSON file")->required();
  solve_cmd->add_option("--algorithm", algorithm, "Engine")
      ->check(CLI::IsMember({"homogeneous", "direct"}))
      ->capture_default_str();
  solve_cmd->add_option("--out", out_path, "Result JSON file (stdout when omitted)");
  solve_cmd->add_option("--trace", trace_path, "Write a CSV trace of every termination check");
  add_settings_flags(solve_cmd, solve_flags, SolverSettings{});

  // gen
  auto* gen_cmd = app.add_subcommand("gen", "Generate random problems");
  std::string gen_kind = "feasible";
  Index gen_n = 50, gen_m = 75, gen_count = 1;
  std::uint64_t gen_seed = 0;
  double gen_density = 0.1;
  std::string gen_out = ".";
  gen_cmd->add_option("--kind", gen_kind, "Problem kind")->check(CLI::IsMember(kKinds))->capture_default_str();
  gen_cmd->add_option("--n", gen_n, "Variables")->capture_default_str();
  gen_cmd->add_option("--m", gen_m, "Constraints")->capture_default_str();
  gen_cmd->add_option("--seed", gen_seed, "First seed")->capture_default_str();
  gen_cmd->add_option("--count", gen_count, "Number of problems (seeds seed..seed+count-1)")->capture_default_str();
  gen_cmd->add_option("--density", gen_density, "Nonzero density of A")->capture_default_str();
  gen_cmd->add_option("--out", gen_out, "Output directory")->capture_default_str();

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Compare the homogeneous and direct engines");
  BenchConfig bench;
  SettingsFlags bench_flags;
  std::vector<std::string> bench_kinds;
  std::string bench_out = "bench_out", bench_trace;
  bench_cmd->add_option("--kind", bench_kinds, "Problem kinds (default: all)")->check(CLI::IsMember(kKinds));
  bench_cmd->add_option("--n", bench.n, "Variables")->capture_default_str();
  bench_cmd->add_option("--m", bench.m, "Constraints")->capture_default_str();
  bench_cmd->add_option("--count", bench.count, "Instances per kind")->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed, "First seed")->capture_default_str();
  bench_cmd->add_option("--density", bench.density, "Nonzero density of A")->capture_default_str();
  bench_cmd->add_option("--out", bench_out, "Output directory")->capture_default_str();
  bench_cmd->add_option("--trace", bench_trace, "Directory for per-instance trace CSVs");
  add_settings_flags(bench_cmd, bench_flags, bench.settings);

  // summarize
  auto* sum_cmd = app.add_subcommand("summarize", "Recompute summary and histogram from a records CSV");
  std::string records_path, sum_out = ".";
  sum_cmd->add_option("records", records_path, "records.csv from a bench run")->required();
  sum_cmd->add_option("--out", sum_out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*solve_cmd) {
      SolverSettings settings = to_settings(solve_flags, SolverSettings{});
      std::ofstream trace;
      if (!trace_path.empty()) {
        trace.open(trace_path, std::ios::trunc);
        if (!trace) throw std::runtime_error("cannot write " + trace_path);
        trace << "schema_version,1\n"
              << "engine,iteration,primal,dual,gap,tau,kappa,fixed_point_residual,primal_cert,dual_cert\n";
        trace.precision(17);
        settings.trace = [&trace](const TraceRecord& t) {
          trace << t.engine << ',' << t.iteration << ',' << t.primal << ',' << t.dual << ',' << t.gap << ','
                << t.tau << ',' << t.kappa << ',' << t.fixed_point_residual << ',' << t.primal_cert << ','
                << t.dual_cert << '\n';
        };
      }
      const QcpProblem p = read_problem(problem_path);
      const SolveResult r = algorithm == "direct" ? solve_direct(p, settings) : solve(p, settings);
      if (out_path.empty()) {
        std::cout << result_to_json(r) << '\n';
      } else {
        write_result(r, out_path);
      }
      std::fprintf(out_path.empty() ? stderr : stdout,
                   "status=%s iterations=%lld primal=%.3e dual=%.3e gap=%.3e time=%.3fs\n",
                   std::string(to_string(r.status)).c_str(), static_cast<long long>(r.iterations),
                   r.residuals.primal, r.residuals.dual, r.residuals.gap, r.solve_time_s);
      return exit_code(r.status);
    }
    if (*gen_cmd) {
      if (gen_count < 1) throw std::invalid_argument("--count must be at least 1");
      fs::create_directories(gen_out);
      for (Index i = 0; i < gen_count; ++i) {
        const GenSpec spec{gen_n, gen_m, gen_seed + static_cast<std::uint64_t>(i), problem_kind_from_string(gen_kind),
                           gen_density};
        const GeneratedProblem g = generate(spec);
        const fs::path path = fs::path(gen_out) / (gen_kind + "_" + std::to_string(gen_n) +
                                                   "x" + std::to_string(gen_m) + "_" + std::to_string(spec.seed) +
                                                   ".json");
        write_problem(g.problem, path);
        std::cout << path.string() << '\n';
      }
      return 0;
    }
    if (*bench_cmd) {
      if (!bench_kinds.empty()) {
        bench.kinds.clear();
        for (const std::string& k : bench_kinds) bench.kinds.push_back(problem_kind_from_string(k));
      }
      bench.settings = to_settings(bench_flags, bench.settings);
      if (!bench_trace.empty()) bench.trace_dir = bench_trace;
      const auto records = run_bench(bench);
      write_bench_outputs(records, bench_out, true);
      return 0;
    }
    if (*sum_cmd) {
      write_bench_outputs(read_records_csv(records_path), sum_out, false);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
