#ifndef KREINSPEC_NUMERICS_HPP
#define KREINSPEC_NUMERICS_HPP

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kreinspec/errors.hpp"

namespace kreinspec {

using Complex = std::complex<double>;

struct Tolerances {
  double ode_rel = 1e-12;
  double ode_abs = 1e-14;
  double quad_tol = 1e-10;
  double root_tol = 1e-9;
  double eig_tol = 1e-10;

  void validate() const;
};

// Composite Gauss-Lobatto grid on [-1,1]. Panel boundaries carry the
// coefficient breakpoints, so a jumping weight is only ever evaluated
// one-sided (0 is always a panel boundary). Shared panel endpoints map
// to a single global node; their quadrature weight is split between the
// two adjacent panels.
struct Panel {
  double lo = 0.0, hi = 0.0;
  std::vector<double> x;   // local nodes, ascending, x.front()==lo, x.back()==hi
  std::vector<double> w;   // positive local weights
  std::vector<int> g;      // global node indices
  double mid() const { return 0.5 * (lo + hi); }
};

struct Grid {
  std::vector<double> nodes;   // strictly increasing, includes all panel boundaries
  std::vector<Panel> panels;

  int size() const { return static_cast<int>(nodes.size()); }
  int node_index(double x, double tol = 1e-13) const;  // exact node lookup, -1 if absent
  int panel_of(double x) const;                        // panel whose closure contains x

  // breakpoints must include -1, -1/2, 0, 1/2, 1; each breakpoint interval is
  // cut into `subdiv` panels (geometrically graded toward entries of `graded`)
  // carrying `order`-point Lobatto rules.
  static Grid build(std::vector<double> breakpoints, int subdiv, int order,
                    const std::vector<double>& graded = {}, double grade_ratio = 0.6);
};

// Gauss-Lobatto rule of n >= 2 points on [-1,1].
void gauss_lobatto(int n, std::vector<double>& x, std::vector<double>& w);

// Barycentric interpolation from the panel's Lobatto nodes.
Eigen::RowVectorXd panel_interp_row(const Panel& p, double x);
// n_targets x n_nodes global interpolation matrix.
Eigen::MatrixXd interpolation_matrix(const Grid& g, std::span<const double> targets);
Complex interp_value(const Grid& g, const Eigen::VectorXcd& values, double x);
// Per-panel spectral derivative of a sampled function (one value per node;
// at shared panel boundaries the two one-sided derivatives are averaged).
Eigen::VectorXcd grid_derivative(const Grid& g, const Eigen::VectorXcd& values);

struct QuadResult {
  Complex value{};
  double error = 0.0;
};

// Adaptive Gauss-Kronrod quadrature of f over [a,b], split at the given
// interior breakpoints. Integrable endpoint singularities are fine as long
// as the singular point is an interval endpoint. Throws EvaluationError on
// non-finite integrand values.
QuadResult quad_adaptive(const std::function<Complex(double)>& f, double a, double b,
                         double tol, std::span<const double> breakpoints = {});

// ---------------------------------------------------------------------------
// Adaptive Dormand-Prince 5(4) with stored dense output. The state is the
// real/imaginary split of (f, pf'):  y = (Re f, Im f, Re pf', Im pf').
// pf' is the continuous second variable, so coefficient jumps in p are
// harmless provided they sit on step boundaries (pass them as breakpoints).
// ---------------------------------------------------------------------------
using OdeState = Eigen::Vector4d;
using OdeRhs = std::function<void(double, const OdeState&, OdeState&)>;

class DenseTrajectory {
public:
  struct Step {
    double t0 = 0.0, h = 0.0;
    OdeState r1, r2, r3, r4, r5;  // dense-output coefficients
  };

  double t_begin() const { return t0_; }
  double t_end() const { return t1_; }
  OdeState eval(double x) const;
  Complex f(double x) const {
    OdeState y = eval(x);
    return {y[0], y[1]};
  }
  Complex pf(double x) const {
    OdeState y = eval(x);
    return {y[2], y[3]};
  }

private:
  friend DenseTrajectory ode_integrate(const OdeRhs&, const OdeState&, double, double,
                                       std::span<const double>, const Tolerances&);
  std::vector<Step> steps_;
  double t0_ = 0.0, t1_ = 0.0;
};

// Integrates forward from x0 to x1 (x0 < x1), stepping exactly onto each
// interior breakpoint. Throws StiffnessError on step-size underflow.
DenseTrajectory ode_integrate(const OdeRhs& rhs, const OdeState& y0, double x0, double x1,
                              std::span<const double> breakpoints, const Tolerances& tol);

// ---------------------------------------------------------------------------
// Dense Hermitian eigensolve (ascending eigenvalues, orthonormal vectors,
// deterministic phase: first non-negligible component positive real).
// ---------------------------------------------------------------------------
struct EigResult {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
};

EigResult herm_eig(const Eigen::MatrixXcd& H, double eig_tol = 1e-10);
// Real symmetric fast path (used by the large certification forms).
Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& S);

} // namespace kreinspec

#endif
