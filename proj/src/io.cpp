#include "drqcp/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "drqcp/errors.hpp"
#include "json.hpp"

namespace drqcp {
namespace {

using json = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line and column.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw FormatError("JSON parse error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                      ": " + e.what());
  }
}

const json& at(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw FormatError(path + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw FormatError(path + ": missing key \"" + key + "\"");
  return *it;
}

template <class T>
T get(const json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

Index get_index(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw FormatError(path + ": expected an integer");
  return j.get<Index>();
}

std::vector<double> get_reals(const json& j, const std::string& path) {
  if (!j.is_array()) throw FormatError(path + ": expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& v = j[i];
    if (v.is_null()) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
    } else if (v.is_number()) {
      out.push_back(v.get<double>());
    } else {
      throw FormatError(path + "[" + std::to_string(i) + "]: expected a number");
    }
  }
  return out;
}

std::vector<Index> get_indices(const json& j, const std::string& path) {
  if (!j.is_array()) throw FormatError(path + ": expected an array");
  std::vector<Index> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_index(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

// Reads a real that may have been written as null for a non-finite value.
double get_real_or(const json& j, double if_null, const std::string& path) {
  if (j.is_null()) return if_null;
  if (!j.is_number()) throw FormatError(path + ": expected a number");
  return j.get<double>();
}

json real(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json reals(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(real(x));
  return a;
}

json matrix_json(const SparseMatrix& a) {
  json j;
  j["ncols"] = a.cols();
  j["colptr"] = std::vector<Index>(a.colptr().begin(), a.colptr().end());
  j["rowidx"] = std::vector<Index>(a.rowidx().begin(), a.rowidx().end());
  j["values"] = reals(a.values());
  return j;
}

SparseMatrix matrix_from(const json& j, Index nrows, const std::string& path) {
  const Index ncols = get_index(at(j, "ncols", path), path + ".ncols");
  auto colptr = get_indices(at(j, "colptr", path), path + ".colptr");
  auto rowidx = get_indices(at(j, "rowidx", path), path + ".rowidx");
  auto values = get_reals(at(j, "values", path), path + ".values");
  try {
    return SparseMatrix(nrows, ncols, std::move(colptr), std::move(rowidx), std::move(values));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

json bounds(std::span<const double> v) {
  json a = json::array();
  for (double x : v) {
    if (std::isinf(x))
      a.push_back(x > 0 ? "inf" : "-inf");
    else
      a.push_back(x);
  }
  return a;
}

json cone_json(const Cone& c) {
  json j;
  j["type"] = cone_name(c);
  if (const auto* box = std::get_if<BoxCone>(&c)) {
    j["l"] = bounds(box->lower);
    j["u"] = bounds(box->upper);
  } else {
    j["dim"] = cone_dim(c);
  }
  return j;
}

// Infinite box bounds travel as the strings "inf" and "-inf".
std::vector<double> get_bounds(const json& j, const std::string& path) {
  if (!j.is_array()) throw FormatError(path + ": expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& v = j[i];
    if (v.is_string() && v.get<std::string>() == "inf") {
      out.push_back(std::numeric_limits<double>::infinity());
    } else if (v.is_string() && v.get<std::string>() == "-inf") {
      out.push_back(-std::numeric_limits<double>::infinity());
    } else if (v.is_number()) {
      out.push_back(v.get<double>());
    } else {
      throw FormatError(path + "[" + std::to_string(i) + "]: expected a number, \"inf\" or \"-inf\"");
    }
  }
  return out;
}

Cone cone_from(const json& j, const std::string& path) {
  const std::string type = get<std::string>(at(j, "type", path), path + ".type");
  if (type == "box")
    return BoxCone{get_bounds(at(j, "l", path), path + ".l"), get_bounds(at(j, "u", path), path + ".u")};
  const Index dim = get_index(at(j, "dim", path), path + ".dim");
  if (type == "zero") return ZeroCone{dim};
  if (type == "nonneg") return NonNegativeCone{dim};
  if (type == "soc") return SecondOrderCone{dim};
  if (type == "free") return FreeCone{dim};
  throw FormatError(path + ".type: unknown cone type \"" + type + "\"");
}

json certificate_json(const Certificate& c) {
  json j;
  j["kind"] = std::string(to_string(c.kind));
  if (c.kind == CertificateKind::PrimalInfeasible) {
    j["y"] = reals(c.y);
  } else {
    j["x"] = reals(c.x);
    j["s"] = reals(c.s);
  }
  j["residual"] = real(c.residual);
  return j;
}

Certificate certificate_from(const json& j, const std::string& path) {
  Certificate c;
  try {
    c.kind = certificate_kind_from_string(get<std::string>(at(j, "kind", path), path + ".kind"));
  } catch (const FormatError& e) {
    throw FormatError(path + ".kind: " + e.what());
  }
  if (c.kind == CertificateKind::PrimalInfeasible) {
    c.y = get_reals(at(j, "y", path), path + ".y");
  } else {
    c.x = get_reals(at(j, "x", path), path + ".x");
    c.s = get_reals(at(j, "s", path), path + ".s");
  }
  c.residual = get_real_or(at(j, "residual", path), std::numeric_limits<double>::infinity(), path + ".residual");
  return c;
}

}  // namespace

std::string problem_to_json(const QcpProblem& p, int indent) {
  json j;
  j["n"] = p.n;
  j["m"] = p.m;
  j["P"] = matrix_json(p.P);
  j["A"] = matrix_json(p.A);
  j["c"] = reals(p.c);
  j["b"] = reals(p.b);
  json cones = json::array();
  for (const Cone& c : p.cones.cones()) cones.push_back(cone_json(c));
  j["cones"] = std::move(cones);
  return j.dump(indent);
}

QcpProblem problem_from_json(const std::string& text) {
  const json j = parse(text);
  const std::string root = "problem";
  QcpProblem p;
  p.n = get_index(at(j, "n", root), "n");
  p.m = get_index(at(j, "m", root), "m");
  if (p.n < 0 || p.m < 0) throw FormatError("n and m must be nonnegative");
  p.P = matrix_from(at(j, "P", root), p.n, "P");
  p.A = matrix_from(at(j, "A", root), p.m, "A");
  p.c = get_reals(at(j, "c", root), "c");
  p.b = get_reals(at(j, "b", root), "b");
  const json& cones = at(j, "cones", root);
  if (!cones.is_array()) throw FormatError("cones: expected an array");
  std::vector<Cone> list;
  for (std::size_t i = 0; i < cones.size(); ++i) list.push_back(cone_from(cones[i], "cones[" + std::to_string(i) + "]"));
  try {
    p.cones = ConeSpec(std::move(list));
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("cones: ") + e.what());
  }
  validate_or_throw(p);
  return p;
}

QcpProblem read_problem(const std::filesystem::path& path) {
  try {
    return problem_from_json(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_problem(const QcpProblem& p, const std::filesystem::path& path) {
  write_file(path, problem_to_json(p) + "\n");
}

std::string result_to_json(const SolveResult& r, int indent) {
  json j;
  j["status"] = std::string(to_string(r.status));
  j["x"] = reals(r.x);
  j["y"] = reals(r.y);
  j["s"] = reals(r.s);
  j["certificate"] = r.certificate ? certificate_json(*r.certificate) : json(nullptr);
  j["iterations"] = r.iterations;
  j["residuals"] = {{"primal", real(r.residuals.primal)}, {"dual", real(r.residuals.dual)}, {"gap", real(r.residuals.gap)}};
  j["solve_time_s"] = real(r.solve_time_s);
  if (r.stalled) j["stalled"] = true;
  return j.dump(indent);
}

SolveResult result_from_json(const std::string& text) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const json j = parse(text);
  const std::string root = "result";
  SolveResult r;
  try {
    r.status = status_from_string(get<std::string>(at(j, "status", root), "status"));
  } catch (const FormatError& e) {
    throw FormatError(std::string("status: ") + e.what());
  }
  r.x = get_reals(at(j, "x", root), "x");
  r.y = get_reals(at(j, "y", root), "y");
  r.s = get_reals(at(j, "s", root), "s");
  const json& cert = at(j, "certificate", root);
  if (!cert.is_null()) r.certificate = certificate_from(cert, "certificate");
  r.iterations = get_index(at(j, "iterations", root), "iterations");
  const json& res = at(j, "residuals", root);
  r.residuals.primal = get_real_or(at(res, "primal", "residuals"), inf, "residuals.primal");
  r.residuals.dual = get_real_or(at(res, "dual", "residuals"), inf, "residuals.dual");
  r.residuals.gap = get_real_or(at(res, "gap", "residuals"), inf, "residuals.gap");
  r.solve_time_s = get_real_or(at(j, "solve_time_s", root), 0.0, "solve_time_s");
  if (auto it = j.find("stalled"); it != j.end()) r.stalled = get<bool>(*it, "stalled");
  return r;
}

void write_result(const SolveResult& r, const std::filesystem::path& path) {
  write_file(path, result_to_json(r) + "\n");
}

SolveResult read_result(const std::filesystem::path& path) {
  try {
    return result_from_json(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace drqcp
