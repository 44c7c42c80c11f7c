#ifndef KREINSPEC_PROBLEM_HPP
#define KREINSPEC_PROBLEM_HPP

#include <string>
#include <vector>

#include "kreinspec/boundary.hpp"
#include "kreinspec/coefficients.hpp"

namespace kreinspec {

struct GridParams {
  int subdiv = 2;
  int order = 12;
  std::vector<double> graded;  // extra grading targets besides singular anchors
};

// A fully validated problem: -(p f')' + q f = lambda r f on [-1,1] with
// boundary conditions M b(f) = lambda N b(f).
struct ProblemSpec {
  std::string name;
  CoefficientDescriptor p, q, r;
  Mat2x4 M, N;
  Tolerances tol;
  GridParams grid;
};

// Parses and validates a problem file (JSON text). Diagnostics carry the
// failing invariant and its location; unknown keys are rejected.
ProblemSpec parse_problem(const std::string& path);
ProblemSpec parse_problem_text(const std::string& text, const std::string& where = "<text>");

// Canonical serialized form: fixed key order, round-trip stable numbers.
// Parsing canonical_text(spec) and re-emitting reproduces it byte for byte.
std::string canonical_text(const ProblemSpec& spec);
void write_problem(const ProblemSpec& spec, const std::string& path);

// Sampling grid for the problem: panel boundaries at every coefficient
// breakpoint, geometric grading toward power-law anchors.
Grid build_grid(const ProblemSpec& spec);
// Same with a node-count floor (refines subdiv until reached).
Grid build_grid(const ProblemSpec& spec, int min_nodes);

} // namespace kreinspec

#endif
