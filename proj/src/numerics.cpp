#include "kreinspec/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/tanh_sinh.hpp>

namespace kreinspec {

void Tolerances::validate() const {
  if (!(ode_rel > 0 && ode_abs > 0 && quad_tol > 0 && root_tol > 0 && eig_tol > 0))
    fail("InvalidTolerances", "all tolerances must be strictly positive");
  if (root_tol < 100.0 * std::numeric_limits<double>::epsilon())
    fail("InvalidTolerances", "root_tol below 100*machine epsilon");
}

// ---------------------------------------------------------------------------
// Gauss-Lobatto rule
// ---------------------------------------------------------------------------

namespace {

// Legendre P_n(x) and P_n'(x) by recurrence.
void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) { p = 1.0; dp = 0.0; return; }
  for (int k = 2; k <= n; ++k) {
    double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

} // namespace

void gauss_lobatto(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 2) fail("InvalidGrid", "Lobatto rule needs at least 2 points");
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = n - 1;
  x[0] = -1.0;
  x[m] = 1.0;
  // interior nodes: roots of P'_{n-1}, Chebyshev-Gauss-Lobatto initial guesses
  for (int i = 1; i < m; ++i) {
    double xi = -std::cos(M_PI * i / m);
    for (int it = 0; it < 100; ++it) {
      double p, dp;
      legendre(m, xi, p, dp);
      // Newton on P'_m using the Legendre ODE: (1-x^2)P'' = 2xP' - m(m+1)P
      double d2p = (2.0 * xi * dp - m * (m + 1) * p) / (1.0 - xi * xi);
      double step = dp / d2p;
      xi -= step;
      if (std::abs(step) < 1e-15) break;
    }
    x[i] = xi;
  }
  for (int i = 0; i < n; ++i) {
    double p, dp;
    legendre(m, x[i], p, dp);
    w[i] = 2.0 / (m * n * p * p);
  }
}

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

Grid Grid::build(std::vector<double> breakpoints, int subdiv, int order,
                 const std::vector<double>& graded, double grade_ratio) {
  for (double req : {-1.0, -0.5, 0.0, 0.5, 1.0}) breakpoints.push_back(req);
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end(),
                                [](double a, double b) { return std::abs(a - b) < 1e-13; }),
                    breakpoints.end());
  if (breakpoints.front() < -1.0 - 1e-13 || breakpoints.back() > 1.0 + 1e-13)
    fail("InvalidGrid", "breakpoints outside [-1,1]");
  if (subdiv < 1 || order < 2) fail("InvalidGrid", "bad subdivision or order");

  auto is_graded = [&](double pt) {
    return std::any_of(graded.begin(), graded.end(),
                       [&](double gpt) { return std::abs(gpt - pt) < 1e-13; });
  };

  std::vector<double> lx, lw;
  gauss_lobatto(order, lx, lw);

  Grid g;
  auto add_node = [&](double x) -> int {
    if (!g.nodes.empty() && std::abs(g.nodes.back() - x) < 1e-14)
      return static_cast<int>(g.nodes.size()) - 1;
    g.nodes.push_back(x);
    return static_cast<int>(g.nodes.size()) - 1;
  };

  for (size_t bi = 0; bi + 1 < breakpoints.size(); ++bi) {
    double a = breakpoints[bi], b = breakpoints[bi + 1];
    // panel edges inside [a,b]
    std::vector<double> edges{a, b};
    bool grade_left = is_graded(a), grade_right = is_graded(b);
    for (int k = 1; k <= subdiv - 1; ++k) edges.push_back(a + (b - a) * k / subdiv);
    if (grade_left != grade_right) {
      // geometric refinement toward the graded endpoint, continued below the
      // uniform panel width so that refining subdiv shrinks every panel; the
      // relative depth floor keeps power tails resolved at any subdiv
      double len = b - a, h = len / subdiv;
      double anchor = grade_left ? a : b, sgn = grade_left ? 1.0 : -1.0;
      for (double d = len * grade_ratio; d > 1e-8 * len; d *= grade_ratio)
        if (d < h) edges.push_back(anchor + sgn * d);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](double x, double y) { return std::abs(x - y) < 1e-14; }),
                edges.end());

    for (size_t e = 0; e + 1 < edges.size(); ++e) {
      Panel p;
      p.lo = edges[e];
      p.hi = edges[e + 1];
      double c = 0.5 * (p.lo + p.hi), h = 0.5 * (p.hi - p.lo);
      p.x.resize(order);
      p.w.resize(order);
      p.g.resize(order);
      for (int i = 0; i < order; ++i) {
        p.x[i] = (i == 0) ? p.lo : (i == order - 1 ? p.hi : c + h * lx[i]);
        p.w[i] = h * lw[i];
        p.g[i] = add_node(p.x[i]);
      }
      g.panels.push_back(std::move(p));
    }
  }
  return g;
}

int Grid::node_index(double x, double tol) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), x - tol);
  if (it != nodes.end() && std::abs(*it - x) <= tol)
    return static_cast<int>(it - nodes.begin());
  return -1;
}

int Grid::panel_of(double x) const {
  int lo = 0, hi = static_cast<int>(panels.size()) - 1;
  while (lo < hi) {
    int mid = (lo + hi) / 2;
    if (x > panels[mid].hi)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

// ---------------------------------------------------------------------------
// Barycentric interpolation
// ---------------------------------------------------------------------------

Eigen::RowVectorXd panel_interp_row(const Panel& p, double x) {
  const int n = static_cast<int>(p.x.size());
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
  // barycentric weights for the panel nodes
  Eigen::VectorXd bw(n);
  for (int i = 0; i < n; ++i) {
    double prod = 1.0;
    for (int j = 0; j < n; ++j)
      if (j != i) prod *= (p.x[i] - p.x[j]);
    bw[i] = 1.0 / prod;
  }
  for (int i = 0; i < n; ++i) {
    if (std::abs(x - p.x[i]) < 1e-14) {
      row.setZero();
      row[i] = 1.0;
      return row;
    }
  }
  double denom = 0.0;
  for (int i = 0; i < n; ++i) {
    row[i] = bw[i] / (x - p.x[i]);
    denom += row[i];
  }
  row /= denom;
  return row;
}

Eigen::MatrixXd interpolation_matrix(const Grid& g, std::span<const double> targets) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<int>(targets.size()), g.size());
  for (size_t t = 0; t < targets.size(); ++t) {
    const Panel& p = g.panels[g.panel_of(targets[t])];
    Eigen::RowVectorXd row = panel_interp_row(p, targets[t]);
    for (size_t i = 0; i < p.g.size(); ++i) M(static_cast<int>(t), p.g[i]) += row[static_cast<int>(i)];
  }
  return M;
}

Complex interp_value(const Grid& g, const Eigen::VectorXcd& values, double x) {
  const Panel& p = g.panels[g.panel_of(x)];
  Eigen::RowVectorXd row = panel_interp_row(p, x);
  Complex s = 0.0;
  for (size_t i = 0; i < p.g.size(); ++i) s += row[static_cast<int>(i)] * values[p.g[i]];
  return s;
}

Eigen::VectorXcd grid_derivative(const Grid& g, const Eigen::VectorXcd& values) {
  Eigen::VectorXcd d = Eigen::VectorXcd::Zero(g.size());
  Eigen::VectorXd count = Eigen::VectorXd::Zero(g.size());
  for (const Panel& p : g.panels) {
    const int n = static_cast<int>(p.x.size());
    Eigen::VectorXd bw(n);
    for (int i = 0; i < n; ++i) {
      double prod = 1.0;
      for (int j = 0; j < n; ++j)
        if (j != i) prod *= (p.x[i] - p.x[j]);
      bw[i] = 1.0 / prod;
    }
    // differentiation matrix D_ij = (bw_j/bw_i)/(x_i-x_j), D_ii = -sum
    for (int i = 0; i < n; ++i) {
      Complex acc = 0.0;
      double diag = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        double dij = (bw[j] / bw[i]) / (p.x[i] - p.x[j]);
        acc += dij * values[p.g[j]];
        diag -= dij;
      }
      acc += diag * values[p.g[i]];
      d[p.g[i]] += acc;
      count[p.g[i]] += 1.0;
    }
  }
  for (int i = 0; i < g.size(); ++i) d[i] /= count[i];
  return d;
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

QuadResult quad_adaptive(const std::function<Complex(double)>& f, double a, double b,
                         double tol, std::span<const double> breakpoints) {
  std::vector<double> cuts{a, b};
  for (double c : breakpoints)
    if (c > a + 1e-15 && c < b - 1e-15) cuts.push_back(c);
  std::sort(cuts.begin(), cuts.end());

  auto checked = [&](double x) {
    Complex v = f(x);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      fail("EvaluationError", "non-finite integrand value");
    return v;
  };

  // tanh-sinh absorbs integrable endpoint singularities; breakpoints cut the
  // interval so interior singular/jump points always land on endpoints
  boost::math::quadrature::tanh_sinh<double> integrator;
  QuadResult out;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    double err = 0.0, l1 = 0.0;
    Complex v = integrator.integrate(checked, cuts[i], cuts[i + 1], tol, &err, &l1);
    out.value += v;
    out.error += err * std::max(l1, 1.0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4) with dense output (Hairer's DOPRI5 coefficients)
// ---------------------------------------------------------------------------

namespace dp {
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
} // namespace dp

OdeState DenseTrajectory::eval(double x) const {
  if (steps_.empty()) fail("InvalidInput", "empty trajectory");
  double xl = std::min(t0_, t1_), xr = std::max(t0_, t1_);
  if (x < xl - 1e-12 || x > xr + 1e-12) fail("InvalidInput", "query outside trajectory span");
  x = std::clamp(x, xl, xr);
  // binary search for the step containing x
  int lo = 0, hi = static_cast<int>(steps_.size()) - 1;
  while (lo < hi) {
    int mid = (lo + hi) / 2;
    if (x > steps_[mid].t0 + steps_[mid].h)
      lo = mid + 1;
    else
      hi = mid;
  }
  const Step& s = steps_[lo];
  double th = (x - s.t0) / s.h;
  double th1 = 1.0 - th;
  return s.r1 + th * (s.r2 + th1 * (s.r3 + th * (s.r4 + th1 * s.r5)));
}

DenseTrajectory ode_integrate(const OdeRhs& rhs, const OdeState& y0, double x0, double x1,
                              std::span<const double> breakpoints, const Tolerances& tol) {
  if (!(x1 > x0)) fail("InvalidInput", "ode_integrate requires x0 < x1");
  std::vector<double> stops;
  for (double b : breakpoints)
    if (b > x0 + 1e-14 && b < x1 - 1e-14) stops.push_back(b);
  std::sort(stops.begin(), stops.end());
  stops.push_back(x1);

  DenseTrajectory traj;
  traj.t0_ = x0;
  traj.t1_ = x1;

  OdeState y = y0;
  double t = x0;
  OdeState k1, k2, k3, k4, k5, k6, k7, ytmp, yerr, ynew;
  rhs(t, y, k1);
  double h = (x1 - x0) / 100.0;

  for (double stop : stops) {
    bool first = true;
    while (t < stop - 1e-14) {
      if (first) {
        rhs(t, y, k1);  // re-evaluate at segment start (coefficients may jump)
        first = false;
      }
      h = std::min(h, stop - t);
      if (h < 1e-14 * std::max(1.0, std::abs(t)))
        fail("StiffnessError", "step size underflow in ode_integrate");

      ytmp = y + h * dp::a21 * k1;
      rhs(t + dp::c2 * h, ytmp, k2);
      ytmp = y + h * (dp::a31 * k1 + dp::a32 * k2);
      rhs(t + dp::c3 * h, ytmp, k3);
      ytmp = y + h * (dp::a41 * k1 + dp::a42 * k2 + dp::a43 * k3);
      rhs(t + dp::c4 * h, ytmp, k4);
      ytmp = y + h * (dp::a51 * k1 + dp::a52 * k2 + dp::a53 * k3 + dp::a54 * k4);
      rhs(t + dp::c5 * h, ytmp, k5);
      ytmp = y + h * (dp::a61 * k1 + dp::a62 * k2 + dp::a63 * k3 + dp::a64 * k4 + dp::a65 * k5);
      rhs(t + h, ytmp, k6);
      ynew = y + h * (dp::b1 * k1 + dp::b3 * k3 + dp::b4 * k4 + dp::b5 * k5 + dp::b6 * k6);
      rhs(t + h, ynew, k7);
      yerr = h * (dp::e1 * k1 + dp::e3 * k3 + dp::e4 * k4 + dp::e5 * k5 + dp::e6 * k6 +
                  dp::e7 * k7);

      // state-wide relative scale: a single component passing through zero
      // must not collapse its error weight while the solution is large
      double ymag = 0.0;
      for (int i = 0; i < 4; ++i)
        ymag = std::max({ymag, std::abs(y[i]), std::abs(ynew[i])});
      double sk = tol.ode_abs + tol.ode_rel * ymag;
      double err = 0.0;
      for (int i = 0; i < 4; ++i) err += std::pow(yerr[i] / sk, 2);
      err = std::sqrt(err / 4.0);

      if (err <= 1.0) {
        DenseTrajectory::Step s;
        s.t0 = t;
        s.h = h;
        OdeState dy = ynew - y;
        s.r1 = y;
        s.r2 = dy;
        s.r3 = h * k1 - dy;
        s.r4 = dy - h * k7 - s.r3;
        s.r5 = h * (dp::d1 * k1 + dp::d3 * k3 + dp::d4 * k4 + dp::d5 * k5 + dp::d6 * k6 +
                    dp::d7 * k7);
        traj.steps_.push_back(s);
        t += h;
        y = ynew;
        k1 = k7;
      }
      double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
      h *= std::clamp(fac, 0.2, 5.0);
    }
    t = stop;
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Hermitian eigensolve
// ---------------------------------------------------------------------------

EigResult herm_eig(const Eigen::MatrixXcd& H, double eig_tol) {
  double dev = (H - H.adjoint()).norm();
  double scale = std::max(H.norm(), 1e-300);
  if (dev > eig_tol * scale)
    fail("NotHermitian", "matrix deviates from Hermitian beyond tolerance");
  Eigen::MatrixXcd Hs = 0.5 * (H + H.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Hs);
  if (es.info() != Eigen::Success) fail("EigFailure", "eigensolver did not converge");
  EigResult out{es.eigenvalues(), es.eigenvectors()};
  // deterministic phase: first non-negligible component positive real
  for (int c = 0; c < out.vectors.cols(); ++c) {
    for (int r = 0; r < out.vectors.rows(); ++r) {
      Complex v = out.vectors(r, c);
      if (std::abs(v) > 1e-12) {
        out.vectors.col(c) *= std::conj(v) / std::abs(v);
        break;
      }
    }
  }
  return out;
}

Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()),
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) fail("EigFailure", "eigensolver did not converge");
  return es.eigenvalues();
}

} // namespace kreinspec
