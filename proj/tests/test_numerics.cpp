#include "doctest.h"

#include <cmath>

#include "kreinspec/numerics.hpp"

using namespace kreinspec;

TEST_CASE("lobatto rule integrates polynomials exactly") {
  std::vector<double> x, w;
  gauss_lobatto(8, x, w);
  CHECK(x.front() == -1.0);
  CHECK(x.back() == 1.0);
  double s0 = 0, s2 = 0, s12 = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    CHECK(w[i] > 0);
    s0 += w[i];
    s2 += w[i] * x[i] * x[i];
    s12 += w[i] * std::pow(x[i], 12);
  }
  CHECK(s0 == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s2 == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  // degree 12 < 2n-3 = 13, still exact
  CHECK(s12 == doctest::Approx(2.0 / 13.0).epsilon(1e-13));
}

TEST_CASE("grid covers [-1,1] with positive weights and required breakpoints") {
  Grid g = Grid::build({}, 4, 10);
  for (double req : {-1.0, -0.5, 0.0, 0.5, 1.0}) CHECK(g.node_index(req) >= 0);
  double total = 0;
  for (const Panel& p : g.panels) {
    CHECK(p.lo < p.hi);
    for (double wi : p.w) {
      CHECK(wi > 0);
      total += wi;
    }
    // 0 never strictly interior to a panel
    CHECK(!(p.lo < 0.0 && 0.0 < p.hi));
  }
  CHECK(total == doctest::Approx(2.0).epsilon(1e-13));
  for (size_t i = 1; i < g.nodes.size(); ++i) CHECK(g.nodes[i] > g.nodes[i - 1]);
}

TEST_CASE("grid quadrature of node samples") {
  Grid g = Grid::build({}, 3, 12);
  double s = 0;
  for (const Panel& p : g.panels)
    for (size_t i = 0; i < p.x.size(); ++i) s += p.w[i] * std::cos(p.x[i]);
  CHECK(s == doctest::Approx(2 * std::sin(1.0)).epsilon(1e-12));
}

TEST_CASE("graded grid handles endpoint power singularity") {
  // int_0^1 x^{-1/2} = 2 as a panel-weighted sum needs grading toward 0
  Grid g = Grid::build({}, 12, 12, {0.0}, 0.3);
  double s = 0;
  for (const Panel& p : g.panels) {
    if (p.hi <= 0) continue;
    for (size_t i = 0; i < p.x.size(); ++i)
      if (p.x[i] > 0) s += p.w[i] / std::sqrt(p.x[i]);
  }
  // the sampling grid only needs rough resolution of power tails; exact
  // singular quadrature goes through quad_adaptive
  CHECK(s == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("barycentric interpolation reproduces panel polynomials") {
  Grid g = Grid::build({}, 2, 9);
  Eigen::VectorXcd vals(g.size());
  for (int i = 0; i < g.size(); ++i)
    vals[i] = Complex(std::pow(g.nodes[i], 5), std::cos(g.nodes[i]));
  Complex v = interp_value(g, vals, 0.3217);
  CHECK(v.real() == doctest::Approx(std::pow(0.3217, 5)).epsilon(1e-10));
  CHECK(v.imag() == doctest::Approx(std::cos(0.3217)).epsilon(1e-10));
  // exact node hit
  Complex vn = interp_value(g, vals, g.nodes[3]);
  CHECK(std::abs(vn - vals[3]) < 1e-14);
}

TEST_CASE("grid derivative is spectrally accurate") {
  Grid g = Grid::build({}, 3, 14);
  Eigen::VectorXcd vals(g.size());
  for (int i = 0; i < g.size(); ++i) vals[i] = std::sin(3 * g.nodes[i]);
  Eigen::VectorXcd d = grid_derivative(g, vals);
  for (int i = 0; i < g.size(); ++i)
    CHECK(std::abs(d[i] - 3.0 * std::cos(3 * g.nodes[i])) < 1e-8);
}

TEST_CASE("adaptive quadrature on sign-type integrands") {
  auto sgn = [](double x) { return Complex(x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0), 0.0); };
  double bp[] = {0.0};
  QuadResult odd = quad_adaptive(sgn, -1, 1, 1e-10, bp);
  CHECK(std::abs(odd.value) < 1e-12);
  QuadResult even = quad_adaptive([&](double x) { return Complex(std::abs(sgn(x).real()), 0); },
                                  -1, 1, 1e-10, bp);
  CHECK(even.value.real() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("adaptive quadrature handles endpoint power singularity") {
  QuadResult q = quad_adaptive([](double x) { return Complex(1.0 / std::sqrt(x), 0); },
                               0, 1, 1e-10);
  CHECK(q.value.real() == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("quadrature rejects non-finite integrands") {
  CHECK_THROWS_AS(quad_adaptive([](double) { return Complex(std::nan(""), 0); }, 0, 1, 1e-8),
                  Error);
}

static OdeRhs make_rhs(double lambda) {
  // -(f')' = lambda*sgn(x)*f  as first-order system in (f, f')
  return [lambda](double x, const OdeState& y, OdeState& dy) {
    double s = x >= 0 ? 1.0 : -1.0;
    dy[0] = y[2];
    dy[1] = y[3];
    dy[2] = -lambda * s * y[0];
    dy[3] = -lambda * s * y[1];
  };
}

TEST_CASE("ode constant solution") {
  Tolerances tol;
  double bp[] = {0.0};
  auto traj = ode_integrate(make_rhs(0.0), OdeState(1, 0, 0, 0), -1, 1, bp, tol);
  CHECK(std::abs(traj.f(1.0) - 1.0) < 1e-12);
  CHECK(std::abs(traj.pf(0.37)) < 1e-12);
}

TEST_CASE("ode linear solution") {
  Tolerances tol;
  double bp[] = {0.0};
  auto traj = ode_integrate(make_rhs(0.0), OdeState(0, 0, 1, 0), -1, 1, bp, tol);
  CHECK(std::abs(traj.f(1.0) - 2.0) < 1e-11);
  CHECK(std::abs(traj.pf(1.0) - 1.0) < 1e-12);
  CHECK(std::abs(traj.f(-0.25) - 0.75) < 1e-11);
}

TEST_CASE("ode cosh solution with sign weight") {
  // lambda=4: on [-1,0] r=-1 so -(f')' = -4 f, f = cosh(2(x+1))
  Tolerances tol;
  double bp[] = {0.0};
  auto traj = ode_integrate(make_rhs(4.0), OdeState(1, 0, 0, 0), -1, 1, bp, tol);
  CHECK(std::abs(traj.f(0.0) - std::cosh(2.0)) < 1e-8);
  CHECK(std::abs(traj.f(-0.5) - std::cosh(1.0)) < 1e-8);
}

TEST_CASE("dense output matches tighter re-integration") {
  Tolerances loose;
  Tolerances tight;
  tight.ode_rel = loose.ode_rel / 2;
  tight.ode_abs = loose.ode_abs / 2;
  double bp[] = {0.0};
  auto a = ode_integrate(make_rhs(9.0), OdeState(1, 0, 0.5, 0), -1, 1, bp, loose);
  auto b = ode_integrate(make_rhs(9.0), OdeState(1, 0, 0.5, 0), -1, 1, bp, tight);
  for (double x : {-0.7, -0.2, 0.1, 0.9, 1.0})
    CHECK(std::abs(a.f(x) - b.f(x)) < 10 * loose.ode_rel * std::abs(b.f(x)) + 1e-9);
}

TEST_CASE("herm_eig on 2x2 swap matrix") {
  Eigen::MatrixXcd H(2, 2);
  H << 0, 1, 1, 0;
  EigResult e = herm_eig(H);
  CHECK(e.values[0] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(e.values[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK((H * e.vectors - e.vectors * e.values.asDiagonal().toDenseMatrix().cast<Complex>())
            .norm() < 1e-12);
}

TEST_CASE("herm_eig trivial cases") {
  EigResult id3 = herm_eig(Eigen::MatrixXcd::Identity(3, 3));
  for (int i = 0; i < 3; ++i) CHECK(id3.values[i] == doctest::Approx(1.0));
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(2, 2);
  D(0, 0) = 2;
  D(1, 1) = 5;
  EigResult de = herm_eig(D);
  CHECK(de.values[0] == doctest::Approx(2.0));
  CHECK(de.values[1] == doctest::Approx(5.0));
}

TEST_CASE("herm_eig rejects non-Hermitian input") {
  Eigen::MatrixXcd H(2, 2);
  H << 0, 1, 3, 0;
  CHECK_THROWS_AS(herm_eig(H), Error);
}

TEST_CASE("herm_eig eigenvalues invariant under unitary conjugation") {
  Eigen::MatrixXcd H(3, 3);
  H << 2, Complex(0, 1), 0.5, Complex(0, -1), -1, 0.25, 0.5, 0.25, 4;
  // unitary from QR of a fixed complex matrix
  Eigen::MatrixXcd A(3, 3);
  A << 1, 2, Complex(0, 1), 0, 1, 3, Complex(2, 1), 0, 1;
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(A);
  Eigen::MatrixXcd U = qr.householderQ();
  EigResult e1 = herm_eig(H);
  EigResult e2 = herm_eig((U * H * U.adjoint()).eval());
  CHECK((e1.values - e2.values).norm() < 1e-10);
}

TEST_CASE("tolerance validation") {
  Tolerances t;
  CHECK_NOTHROW(t.validate());
  t.root_tol = 0;
  CHECK_THROWS_AS(t.validate(), Error);
}
