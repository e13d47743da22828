#include "drqcp/bench.hpp"

#include <omp.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "drqcp/direct.hpp"
#include "drqcp/errors.hpp"
#include "drqcp/homogeneous.hpp"

namespace drqcp {
namespace {

constexpr std::string_view kSchemaLine = "schema_version,1";
constexpr std::string_view kRecordHeader = "instance,kind,seed,engine,status,iterations,solve_time_s,primal,dual,gap";

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw FormatError("bad number '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << kSchemaLine << '\n';
  return out;
}

std::string instance_name(ProblemKind kind, Index n, Index m, std::uint64_t seed) {
  return std::string(to_string(kind)) + "_" + std::to_string(n) + "x" + std::to_string(m) + "_" + std::to_string(seed);
}

void write_trace(const std::filesystem::path& path, const std::vector<TraceRecord>& trace) {
  std::ofstream out = open_csv(path);
  out << "engine,iteration,primal,dual,gap,tau,kappa,fixed_point_residual,primal_cert,dual_cert\n";
  for (const TraceRecord& t : trace)
    out << t.engine << ',' << t.iteration << ',' << fmt(t.primal) << ',' << fmt(t.dual) << ',' << fmt(t.gap) << ','
        << fmt(t.tau) << ',' << fmt(t.kappa) << ',' << fmt(t.fixed_point_residual) << ',' << fmt(t.primal_cert)
        << ',' << fmt(t.dual_cert) << '\n';
}

BenchRecord run_one(const QcpProblem& p, const std::string& name, ProblemKind kind, std::uint64_t seed,
                    bool homogeneous, const BenchConfig& config) {
  SolverSettings settings = config.settings;
  std::vector<TraceRecord> trace;
  if (config.trace_dir) settings.trace = [&trace](const TraceRecord& t) { trace.push_back(t); };
  const SolveResult r = homogeneous ? HomogeneousSolver(p, settings).solve() : DirectSolver(p, settings).solve();
  BenchRecord rec;
  rec.instance = name;
  rec.kind = kind;
  rec.seed = seed;
  rec.engine = homogeneous ? "homogeneous" : "direct";
  rec.status = r.status;
  rec.iterations = r.iterations;
  rec.solve_time_s = r.solve_time_s;
  rec.residuals = r.residuals;
  if (!rec.success()) rec.iterations = settings.max_iters;
  if (config.trace_dir) write_trace(*config.trace_dir / (name + "_" + rec.engine + ".csv"), trace);
  return rec;
}

}  // namespace

bool BenchRecord::success() const {
  switch (kind) {
    case ProblemKind::Feasible: return status == Status::Solved;
    case ProblemKind::Infeasible: return status == Status::PrimalInfeasible;
    case ProblemKind::Unbounded: return status == Status::DualInfeasible;
  }
  return false;
}

std::vector<BenchRecord> run_bench(const BenchConfig& config) {
  config.settings.validate();
  if (config.count < 1) throw std::invalid_argument("count must be at least 1");
  if (config.trace_dir) std::filesystem::create_directories(*config.trace_dir);
  const Index per_kind = config.count;
  const Index tasks = static_cast<Index>(config.kinds.size()) * per_kind;
  std::vector<BenchRecord> records(2 * tasks);
  std::vector<std::string> errors(tasks);

#pragma omp parallel for schedule(dynamic, 1)
  for (Index t = 0; t < tasks; ++t) {
    const ProblemKind kind = config.kinds[t / per_kind];
    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(t % per_kind);
    const std::string name = instance_name(kind, config.n, config.m, seed);
    try {
      const GeneratedProblem g = generate(GenSpec{config.n, config.m, seed, kind, config.density});
      records[2 * t] = run_one(g.problem, name, kind, seed, true, config);
      records[2 * t + 1] = run_one(g.problem, name, kind, seed, false, config);
    } catch (const std::exception& e) {
      errors[t] = name + ": " + e.what();
    }
  }
  for (const std::string& e : errors)
    if (!e.empty()) throw std::runtime_error("bench failed on " + e);
  return records;
}

std::vector<RatioSummary> summarize(const std::vector<BenchRecord>& records) {
  // instance -> (homogeneous, direct)
  std::map<std::pair<int, std::string>, std::pair<const BenchRecord*, const BenchRecord*>> by_instance;
  for (const BenchRecord& r : records) {
    auto& slot = by_instance[{static_cast<int>(r.kind), r.instance}];
    (r.engine == "homogeneous" ? slot.first : slot.second) = &r;
  }
  std::map<int, RatioSummary> acc;
  std::map<int, double> log_sum;
  std::map<int, Index> faster;
  for (const auto& [key, pair] : by_instance) {
    const auto [h, d] = pair;
    if (h == nullptr || d == nullptr) throw FormatError("instance " + key.second + " lacks one engine's record");
    RatioSummary& s = acc[key.first];
    s.kind = h->kind;
    ++s.instances;
    if (!h->success()) ++s.failures_homogeneous;
    if (!d->success()) ++s.failures_direct;
    if (h->success() && (!d->success() || h->iterations < d->iterations)) ++faster[key.first];
    if (h->success() && d->success()) {
      ++s.pairs;
      log_sum[key.first] += std::log(static_cast<double>(d->iterations) / static_cast<double>(h->iterations));
    }
  }
  std::vector<RatioSummary> out;
  for (auto& [k, s] : acc) {
    s.geomean_ratio = s.pairs > 0 ? std::exp(log_sum[k] / static_cast<double>(s.pairs))
                                  : std::numeric_limits<double>::quiet_NaN();
    s.homogeneous_faster_fraction = static_cast<double>(faster[k]) / static_cast<double>(s.instances);
    out.push_back(s);
  }
  return out;
}

std::vector<HistogramBin> histogram(const std::vector<BenchRecord>& records) {
  std::map<std::pair<int, std::string>, std::pair<const BenchRecord*, const BenchRecord*>> by_instance;
  for (const BenchRecord& r : records) {
    auto& slot = by_instance[{static_cast<int>(r.kind), r.instance}];
    (r.engine == "homogeneous" ? slot.first : slot.second) = &r;
  }
  const double lo_log = std::log2(kHistogramLo);
  const double width = (std::log2(kHistogramHi) - lo_log) / kHistogramBins;
  std::map<int, std::vector<Index>> counts;
  std::map<int, ProblemKind> kinds;
  for (const auto& [key, pair] : by_instance) {
    const auto [h, d] = pair;
    if (h == nullptr || d == nullptr) continue;
    kinds[key.first] = h->kind;
    auto& c = counts[key.first];
    c.resize(kHistogramBins, 0);
    if (!h->success() || !d->success()) continue;
    const double ratio = static_cast<double>(d->iterations) / static_cast<double>(h->iterations);
    int bin = static_cast<int>(std::floor((std::log2(ratio) - lo_log) / width));
    bin = std::clamp(bin, 0, kHistogramBins - 1);
    ++c[bin];
  }
  std::vector<HistogramBin> out;
  for (const auto& [k, c] : counts)
    for (int b = 0; b < kHistogramBins; ++b)
      out.push_back({kinds[k], std::exp2(lo_log + b * width), std::exp2(lo_log + (b + 1) * width), c[b]});
  return out;
}

void write_records_csv(const std::vector<BenchRecord>& records, const std::filesystem::path& path) {
  std::ofstream out = open_csv(path);
  out << kRecordHeader << '\n';
  for (const BenchRecord& r : records)
    out << r.instance << ',' << to_string(r.kind) << ',' << r.seed << ',' << r.engine << ',' << to_string(r.status)
        << ',' << r.iterations << ',' << fmt(r.solve_time_s) << ',' << fmt(r.residuals.primal) << ','
        << fmt(r.residuals.dual) << ',' << fmt(r.residuals.gap) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<BenchRecord> read_records_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kSchemaLine)
    throw FormatError(path.string() + ": expected '" + std::string(kSchemaLine) + "' on line 1");
  if (!std::getline(in, line) || line != kRecordHeader)
    throw FormatError(path.string() + ": unexpected header on line 2");
  std::vector<BenchRecord> out;
  Index lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (f.size() != 10) throw FormatError(where + ": expected 10 fields");
    try {
      BenchRecord r;
      r.instance = f[0];
      r.kind = problem_kind_from_string(f[1]);
      r.seed = std::stoull(f[2]);
      r.engine = f[3];
      if (r.engine != "homogeneous" && r.engine != "direct") throw FormatError("unknown engine " + r.engine);
      r.status = status_from_string(f[4]);
      r.iterations = std::stoll(f[5]);
      r.solve_time_s = parse_double(f[6]);
      r.residuals = {parse_double(f[7]), parse_double(f[8]), parse_double(f[9])};
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw FormatError(where + ": " + e.what());
    }
  }
  return out;
}

void write_summary_csv(const std::vector<RatioSummary>& summary, const std::filesystem::path& path) {
  std::ofstream out = open_csv(path);
  out << "failure_policy,instances where either engine fails are excluded from geomean_ratio and counted in "
         "failures_*\n";
  out << "kind,instances,pairs,geomean_ratio,homogeneous_faster_fraction,failures_homogeneous,failures_direct\n";
  for (const RatioSummary& s : summary)
    out << to_string(s.kind) << ',' << s.instances << ',' << s.pairs << ',' << fmt(s.geomean_ratio) << ','
        << fmt(s.homogeneous_faster_fraction) << ',' << s.failures_homogeneous << ',' << s.failures_direct << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_histogram_csv(const std::vector<HistogramBin>& bins, const std::filesystem::path& path) {
  std::ofstream out = open_csv(path);
  out << "binning,log2," << kHistogramBins << ',' << fmt(kHistogramLo) << ',' << fmt(kHistogramHi)
      << ",out-of-range ratios counted in the end bins\n";
  out << "kind,bin_lo,bin_hi,count\n";
  for (const HistogramBin& b : bins)
    out << to_string(b.kind) << ',' << fmt(b.lo) << ',' << fmt(b.hi) << ',' << b.count << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace drqcp
