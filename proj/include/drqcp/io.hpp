#pragma once

// JSON problem and result files.
//
// Problem: {"n", "m", "P": {"ncols", "colptr", "rowidx", "values"}, "A": {...},
//           "c", "b", "cones": [{"type": "zero"|"nonneg"|"soc", "dim"} | {"type": "box", "l", "u"}]}
// with P stored as its upper triangle.
// Result:  {"status", "x", "y", "s", "certificate", "iterations",
//           "residuals": {"primal", "dual", "gap"}, "solve_time_s"}
// Non-finite numbers in results are written as null.

#include <filesystem>
#include <string>

#include "drqcp/problem.hpp"

namespace drqcp {

std::string problem_to_json(const QcpProblem& p, int indent = -1);
// Throws FormatError (with key path or line/column) and ValidationError.
QcpProblem problem_from_json(const std::string& text);

QcpProblem read_problem(const std::filesystem::path& path);
void write_problem(const QcpProblem& p, const std::filesystem::path& path);

std::string result_to_json(const SolveResult& r, int indent = 2);
SolveResult result_from_json(const std::string& text);

void write_result(const SolveResult& r, const std::filesystem::path& path);
SolveResult read_result(const std::filesystem::path& path);

}  // namespace drqcp
