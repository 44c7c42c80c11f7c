#include "kreinspec/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace kreinspec {

namespace {

std::vector<double> interior_breakpoints(const ProblemSpec& prob) {
  std::vector<double> bp;
  for (const CoefficientDescriptor* c : {&prob.p, &prob.q, &prob.r})
    for (double b : c->breakpoints())
      if (b > -1.0 + 1e-12 && b < 1.0 - 1e-12) bp.push_back(b);
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end(),
                       [](double a, double b) { return std::abs(a - b) < 1e-12; }),
           bp.end());
  return bp;
}

double eval_side(const CoefficientDescriptor& c, double x) {
  return c.evaluate(x, x >= 1.0 ? -1.0 : +1.0);
}

// rhs of the first-order system for (f, pf'); state y = (Re f, Im f,
// Re pf', Im pf'). inhom, when set, adds -r(x) h(x) to (pf')'.
OdeRhs make_rhs(const ProblemSpec& prob, Complex lambda,
                std::function<Complex(double)> inhom = {}) {
  return [&prob, lambda, inhom](double x, const OdeState& y, OdeState& dy) {
    double p = eval_side(prob.p, x);
    double q = eval_side(prob.q, x);
    double r = eval_side(prob.r, x);
    Complex f(y[0], y[1]);
    Complex rhs = (q - lambda * r) * f;
    if (inhom) rhs -= r * inhom(x);
    dy[0] = y[2] / p;
    dy[1] = y[3] / p;
    dy[2] = rhs.real();
    dy[3] = rhs.imag();
  };
}

OdeState pack(Complex f, Complex pf) { return OdeState(f.real(), f.imag(), pf.real(), pf.imag()); }

Eigen::Vector4cd boundary_vector(const DenseTrajectory& t) {
  Eigen::Vector4cd b;
  b << t.f(-1.0), t.f(1.0), t.pf(-1.0), t.pf(1.0);
  return b;
}

DenseTrajectory shoot(const ProblemSpec& prob, Complex lambda, const OdeState& y0,
                      std::function<Complex(double)> inhom = {}) {
  return ode_integrate(make_rhs(prob, lambda, std::move(inhom)), y0, -1.0, 1.0,
                       interior_breakpoints(prob), prob.tol);
}

void parallel_for(int n, const std::function<void(int)>& body) {
  int threads = std::min(max_threads(), n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (int i = t; i < n; i += threads) body(i);
    });
  for (std::thread& th : pool) th.join();
}

} // namespace

int max_threads() {
  if (const char* env = std::getenv("KREINSPEC_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min(hw == 0 ? 1u : hw, 8u));
}

FundamentalSystem fundamental_b_vectors(const ProblemSpec& prob, Complex lambda) {
  FundamentalSystem fs;
  fs.lambda = lambda;
  fs.f1 = shoot(prob, lambda, pack(1.0, 0.0));
  fs.f2 = shoot(prob, lambda, pack(0.0, 1.0));
  fs.B.col(0) = boundary_vector(fs.f1);
  fs.B.col(1) = boundary_vector(fs.f2);
  return fs;
}

namespace {

// det((M - lambda N) B) expanded in the entries of the fundamental matrix
// Phi = [[f1(1), f2(1)], [pf1'(1), pf2'(1)]], with the exact Wronskian
// identity det Phi = 1 substituted. The naive 2x2 determinant forms the
// product Phi11 Phi22 - Phi12 Phi21 numerically, whose integration noise is
// amplified by the square of the fundamental-system magnitude; the expanded
// form is linear in Phi, so the noise stays on the scale of the entries.
Complex det_from_fundamental(const ProblemSpec& prob, Complex lambda,
                             const Eigen::Matrix<Complex, 4, 2>& B) {
  Mat2x4 R = prob.M - lambda * prob.N;
  auto d = [&](int i, int j) {
    return R(0, i) * R(1, j) - R(0, j) * R(1, i);
  };
  Complex phi11 = B(1, 0), phi12 = B(1, 1), phi21 = B(3, 0), phi22 = B(3, 1);
  return d(0, 2) + d(1, 3) + phi12 * d(0, 1) + phi22 * d(0, 3) + phi11 * d(1, 2) -
         phi21 * d(2, 3);
}

} // namespace

Complex characteristic_det(const ProblemSpec& prob, Complex lambda) {
  FundamentalSystem fs = fundamental_b_vectors(prob, lambda);
  return det_from_fundamental(prob, lambda, fs.B);
}

CharacteristicValue characteristic(const ProblemSpec& prob, Complex lambda,
                                   bool with_derivative) {
  CharacteristicValue cv;
  cv.lambda = lambda;
  FundamentalSystem fs = fundamental_b_vectors(prob, lambda);
  cv.B = fs.B;
  cv.C = (prob.M - lambda * prob.N) * fs.B;
  cv.D = det_from_fundamental(prob, lambda, fs.B);
  cv.Dprime = 0.0;
  if (with_derivative) {
    double h = 1e-4 * std::max(1.0, std::abs(lambda));
    Complex d1 = characteristic_det(prob, lambda + h) - characteristic_det(prob, lambda - h);
    Complex d2 =
        characteristic_det(prob, lambda + 2 * h) - characteristic_det(prob, lambda - 2 * h);
    cv.Dprime = (8.0 * d1 - d2) / (12.0 * h);
  }
  return cv;
}

namespace {

// d/dx of a coefficient piece sign*|x-a|^nu*poly(x), away from the anchor.
double coef_derivative(const CoefficientDescriptor& c, double x) {
  const CoefPiece& pc = c.piece_at(x, x >= 1.0 ? -1.0 : +1.0);
  double u = x - pc.anchor;
  double poly = pc.poly_value(x);
  double dpoly = 0.0;
  for (size_t k = 1; k < pc.poly.size(); ++k)
    dpoly += static_cast<double>(k) * pc.poly[k] * std::pow(x, static_cast<double>(k - 1));
  double pw = pc.exponent == 0.0 ? 1.0 : std::pow(std::abs(u), pc.exponent);
  double dpw = pc.exponent == 0.0
                   ? 0.0
                   : pc.exponent * std::pow(std::abs(u), pc.exponent - 1.0) * (u < 0 ? -1.0 : 1.0);
  return pc.sign * (dpw * poly + pw * dpoly);
}

} // namespace

Complex lagrange_residual(const ProblemSpec& prob, const SmoothFunction& f,
                          const SmoothFunction& g) {
  auto ell = [&](const SmoothFunction& h, double x) {
    double p = eval_side(prob.p, x);
    double dp = coef_derivative(prob.p, x);
    double q = eval_side(prob.q, x);
    return -dp * h.df(x) - p * h.d2f(x) + q * h.f(x);
  };
  auto integrand = [&](double x) {
    return ell(f, x) * std::conj(g.f(x)) - f.f(x) * std::conj(ell(g, x));
  };
  QuadResult lhs =
      quad_adaptive(integrand, -1.0, 1.0, prob.tol.quad_tol, interior_breakpoints(prob));

  auto bvec = [&](const SmoothFunction& h) {
    Eigen::Vector4cd b;
    double pm = prob.p.evaluate(-1.0, +1.0), pp = prob.p.evaluate(1.0, -1.0);
    b << h.f(-1.0), h.f(1.0), pm * h.df(-1.0), pp * h.df(1.0);
    return b;
  };
  Complex rhs =
      Complex(0.0, 1.0) * (bvec(g).adjoint() * concomitant_q() * bvec(f)).value();
  return lhs.value - rhs;
}

std::vector<RealRoot> find_real_eigenvalues(const ProblemSpec& prob, double lmin,
                                            double lmax, double points_per_sqrt_unit) {
  if (!(lmin < lmax)) fail("InvalidInput", "empty eigenvalue window");
  auto s_of = [](double l) { return l < 0 ? -std::sqrt(-l) : std::sqrt(l); };
  auto l_of = [](double s) { return s < 0 ? -s * s : s * s; };
  double s0 = s_of(lmin), s1 = s_of(lmax);
  int n = std::max(8, static_cast<int>(std::ceil((s1 - s0) * points_per_sqrt_unit))) + 1;

  std::vector<double> lam(n), dval(n);
  parallel_for(n, [&](int i) {
    lam[i] = l_of(s0 + (s1 - s0) * i / (n - 1));
    Complex d = characteristic_det(prob, lam[i]);
    if (std::abs(d.imag()) > 1e-6 * std::max(1.0, std::abs(d)))
      fail("ComplexOnAxis", "characteristic function not real on the real axis");
    dval[i] = d.real();
  });

  auto dreal = [&](double l) { return characteristic_det(prob, l).real(); };
  std::vector<RealRoot> roots;
  double typical = 0.0;
  for (double v : dval) typical = std::max(typical, std::abs(v));

  for (int i = 0; i + 1 < n; ++i) {
    if (dval[i] == 0.0) {
      roots.push_back({lam[i], true, 1});
      continue;
    }
    if (dval[i] * dval[i + 1] < 0.0) {
      boost::uintmax_t iters = 128;
      auto res = boost::math::tools::toms748_solve(
          dreal, lam[i], lam[i + 1], dval[i], dval[i + 1],
          [&](double a, double b) { return std::abs(b - a) < prob.tol.root_tol; }, iters);
      roots.push_back({0.5 * (res.first + res.second), true, 1});
    } else if (i > 0 && dval[i - 1] * dval[i] > 0.0 &&
               std::abs(dval[i]) < std::abs(dval[i - 1]) &&
               std::abs(dval[i]) <= std::abs(dval[i + 1]) &&
               std::abs(dval[i]) < 1e-4 * std::max(typical, 1.0)) {
      // sign-preserving dip: probe for an even-order root
      auto absd = [&](double l) {
        double v = dreal(l);
        return v * v;
      };
      auto min_res =
          boost::math::tools::brent_find_minima(absd, lam[i - 1], lam[i + 1], 40);
      double lhat = min_res.first;
      CharacteristicValue cv = characteristic(prob, lhat);
      if (std::abs(cv.D) <= prob.tol.root_tol * std::max(1.0, std::abs(cv.Dprime)))
        roots.push_back({lhat, false, 2});
    }
  }

  std::sort(roots.begin(), roots.end(),
            [](const RealRoot& a, const RealRoot& b) { return a.lambda < b.lambda; });
  // collapse duplicates from adjacent brackets hitting the same root
  std::vector<RealRoot> unique_roots;
  for (const RealRoot& r : roots)
    if (unique_roots.empty() ||
        std::abs(r.lambda - unique_roots.back().lambda) > 10 * prob.tol.root_tol)
      unique_roots.push_back(r);

  // cluster detection: roots closer than two scan cells need a denser scan
  for (size_t i = 0; i + 1 < unique_roots.size(); ++i) {
    double a = unique_roots[i].lambda, b = unique_roots[i + 1].lambda;
    double cell = 2.0 * (std::abs(s_of(b)) + 1.0) / points_per_sqrt_unit;  // d lambda / d s = 2|s|
    if (b - a < 2.0 * cell)
      fail("RefineRequested", "adjacent roots closer than two scan cells near lambda = " +
                                  std::to_string(a));
  }

  // Stall check on the Newton step |D| / |D'|: the raw residual |D| sits on
  // a noise floor that grows with the fundamental-system magnitude, so it is
  // compared in lambda units, relative to the eigenvalue's size.
  for (const RealRoot& r : unique_roots) {
    CharacteristicValue cv = characteristic(prob, r.lambda);
    double step = std::abs(cv.D) / std::max(1.0, std::abs(cv.Dprime));
    if (step > 100.0 * prob.tol.root_tol * (1.0 + std::abs(r.lambda)))
      fail("RefineRequested",
           "root refinement stalled at lambda = " + std::to_string(r.lambda));
  }
  return unique_roots;
}

namespace {

// winding of D along the polyline; subdivides until each argument step is
// below pi/2, failing when the needed depth suggests a nearby zero.
double arg_sweep(const ProblemSpec& prob, const std::function<Complex(double)>& path,
                 double t0, double t1, Complex d0, Complex d1, int depth) {
  double dphi = std::arg(d1 / d0);
  if (std::abs(dphi) < 1.5) return dphi;
  if (depth >= 24) fail("ContourTooClose", "argument tracking did not converge");
  double tm = 0.5 * (t0 + t1);
  Complex dm = characteristic_det(prob, path(tm));
  if (std::abs(dm) == 0.0) fail("ContourTooClose", "zero on the contour");
  return arg_sweep(prob, path, t0, tm, d0, dm, depth + 1) +
         arg_sweep(prob, path, tm, t1, dm, d1, depth + 1);
}

int winding_number(const ProblemSpec& prob, const std::function<Complex(double)>& path,
                   int samples) {
  std::vector<Complex> d(samples + 1);
  parallel_for(samples + 1,
               [&](int i) { d[i] = characteristic_det(prob, path(double(i) / samples)); });
  double dmax = 0.0;
  for (const Complex& v : d) dmax = std::max(dmax, std::abs(v));
  for (const Complex& v : d)
    if (std::abs(v) < 1e-8 * std::max(dmax, 1e-30))
      fail("ContourTooClose", "characteristic function vanishes on the contour");
  double total = 0.0;
  for (int i = 0; i < samples; ++i)
    total += arg_sweep(prob, path, double(i) / samples, double(i + 1) / samples, d[i],
                       d[i + 1], 0);
  double raw = total / (2.0 * M_PI);
  double rounded = std::round(raw);
  if (std::abs(raw - rounded) > 0.25)
    fail("ContourTooClose", "winding integral not close to an integer");
  return static_cast<int>(rounded);
}

} // namespace

int count_zeros_rect(const ProblemSpec& prob, Complex lo, Complex hi, int pts_per_side) {
  double x0 = lo.real(), y0 = lo.imag(), x1 = hi.real(), y1 = hi.imag();
  if (!(x0 < x1) || !(y0 < y1)) fail("InvalidInput", "degenerate rectangle");
  auto path = [=](double t) -> Complex {
    double s = t * 4.0;
    if (s < 1.0) return {x0 + (x1 - x0) * s, y0};
    if (s < 2.0) return {x1, y0 + (y1 - y0) * (s - 1.0)};
    if (s < 3.0) return {x1 - (x1 - x0) * (s - 2.0), y1};
    return {x0, y1 - (y1 - y0) * (s - 3.0)};
  };
  return winding_number(prob, path, 4 * pts_per_side);
}

RootChain jordan_chain(const ProblemSpec& prob, Complex lambda0,
                       const Eigen::Vector2cd& coeffs0, int max_depth) {
  CharacteristicValue cv = characteristic(prob, lambda0, false);
  double scale = std::max(1.0, cv.C.norm()) * std::max(1e-30, coeffs0.norm());
  if ((cv.C * coeffs0).norm() > 1e-6 * scale)
    fail("InvalidInput", "supplied coefficients are not an eigenfunction");

  RootChain chain;
  chain.lambda = lambda0;

  ChainFunction f0;
  f0.traj = shoot(prob, lambda0, pack(coeffs0[0], coeffs0[1]));
  f0.b = boundary_vector(f0.traj);
  chain.fns.push_back(std::move(f0));

  for (int depth = 1; depth < max_depth; ++depth) {
    const DenseTrajectory& prev = chain.fns.back().traj;
    auto inhom = [&prev](double x) { return prev.f(x); };

    DenseTrajectory part = shoot(prob, lambda0, pack(0.0, 0.0), inhom);
    Eigen::Vector4cd bp = boundary_vector(part);
    Eigen::Vector2cd rhs =
        prob.N * chain.fns.back().b - (prob.M - lambda0 * prob.N) * bp;

    Eigen::JacobiSVD<Mat2> svd(cv.C, Eigen::ComputeFullU | Eigen::ComputeFullV);
    svd.setThreshold(1e-8);
    Eigen::Vector2cd coef = svd.solve(rhs);
    double resid = (cv.C * coef - rhs).norm();
    if (resid > 1e-6 * std::max(1.0, rhs.norm() + cv.C.norm() * coef.norm())) break;

    ChainFunction fj;
    fj.traj = shoot(prob, lambda0, pack(coef[0], coef[1]), inhom);
    fj.b = boundary_vector(fj.traj);
    chain.fns.push_back(std::move(fj));
  }
  return chain;
}

Eigen::Vector2cd eigenfunction_coefficients(const ProblemSpec& prob, Complex lambda0) {
  CharacteristicValue cv = characteristic(prob, lambda0, false);
  Eigen::JacobiSVD<Mat2> svd(cv.C, Eigen::ComputeFullV);
  return svd.matrixV().col(1);
}

Multiplicity multiplicity(const ProblemSpec& prob, double lambda0, double radius) {
  CharacteristicValue cv = characteristic(prob, lambda0, false);
  Eigen::JacobiSVD<Mat2> svd(cv.C, Eigen::ComputeFullV);
  double s0 = svd.singularValues()[0], s1 = svd.singularValues()[1];
  double thr = 1e-6 * std::max(1.0, s0);
  if (s1 > thr / 10.0 && s1 < thr * 10.0)
    fail("Indeterminate", "rank decision ambiguous at lambda = " + std::to_string(lambda0));
  int rank = (s0 > thr ? 1 : 0) + (s1 > thr ? 1 : 0);
  Multiplicity m;
  m.geometric = 2 - rank;
  if (m.geometric < 1)
    fail("InvalidInput", "lambda is not an eigenvalue (full-rank boundary system)");

  auto circle = [=](double t) {
    return Complex(lambda0 + radius * std::cos(2 * M_PI * t),
                   radius * std::sin(2 * M_PI * t));
  };
  m.algebraic_order = winding_number(prob, circle, 128);

  m.algebraic_chain = 0;
  for (int j = 0; j < m.geometric; ++j) {
    Eigen::Vector2cd c = svd.matrixV().col(1 - j);
    RootChain chain = jordan_chain(prob, lambda0, c);
    m.algebraic_chain += static_cast<int>(chain.fns.size());
  }
  m.consistent = (m.algebraic_order == m.algebraic_chain);
  return m;
}

namespace {

Complex eval_legs(const std::vector<ShotLeg>& legs, double x) {
  for (const ShotLeg& leg : legs)
    if (x <= leg.hi + 1e-14)
      return leg.coef[0] * leg.t1.f(x) + leg.coef[1] * leg.t2.f(x);
  const ShotLeg& last = legs.back();
  return last.coef[0] * last.t1.f(x) + last.coef[1] * last.t2.f(x);
}

// Fundamental pair over [-1, 0] re-orthonormalized (QR) at checkpoints.
// Leg 0 starts from the identity at -1, so leg-0 coefficients are the
// solution's (f, pf') data there. R[j] is the triangular change of basis
// between legs j and j+1: c_{j+1} = R[j] c_j for a continuous solution.
struct HalfShot {
  std::vector<ShotLeg> legs;
  std::vector<Mat2> R;
  Mat2 U0;  // [[f1, f2], [pf1', pf2']] at 0 in the last leg's basis
};

HalfShot integrate_half(const OdeRhs& rhs, const std::vector<double>& bps,
                        const Tolerances& tol) {
  std::vector<double> cps{-1.0};
  for (int k = 1; k <= 9; ++k) cps.push_back(-1.0 + 0.1 * k);
  for (double b : bps) cps.push_back(b);
  cps.push_back(0.0);
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-12; }),
            cps.end());

  HalfShot hs;
  Mat2 U = Mat2::Identity();
  for (size_t j = 0; j + 1 < cps.size(); ++j) {
    ShotLeg leg;
    leg.lo = cps[j];
    leg.hi = cps[j + 1];
    leg.t1 = ode_integrate(rhs, pack(U(0, 0), U(1, 0)), leg.lo, leg.hi, {}, tol);
    leg.t2 = ode_integrate(rhs, pack(U(0, 1), U(1, 1)), leg.lo, leg.hi, {}, tol);
    Mat2 Uend;
    Uend << leg.t1.f(leg.hi), leg.t2.f(leg.hi), leg.t1.pf(leg.hi), leg.t2.pf(leg.hi);
    hs.legs.push_back(std::move(leg));
    if (j + 2 < cps.size()) {
      Eigen::HouseholderQR<Mat2> qr(Uend);
      hs.R.push_back(Mat2(qr.matrixQR().triangularView<Eigen::Upper>()));
      U = qr.householderQ();
    } else {
      hs.U0 = Uend;
    }
  }
  return hs;
}

} // namespace

Complex MatchedEigenfunction::f(double x) const {
  if (x < 0.0) return eval_legs(left, x);
  if (x > 0.0) return eval_legs(reflected, -x);
  return 0.5 * (eval_legs(left, 0.0) + eval_legs(reflected, 0.0));
}

MatchedEigenfunction matched_eigenfunction(const ProblemSpec& prob, double lambda) {
  // h(s) = f(-s) solves the same equation with the coefficients read at -s;
  // integrating it from s = -1 shoots the right half backward from x = 1.
  OdeRhs refl = [&prob, lambda](double s, const OdeState& y, OdeState& dy) {
    double x = -s;
    double p = eval_side(prob.p, x);
    double q = eval_side(prob.q, x);
    double r = eval_side(prob.r, x);
    Complex f(y[0], y[1]);
    Complex rhs = (q - lambda * r) * f;
    dy[0] = y[2] / p;
    dy[1] = y[3] / p;
    dy[2] = rhs.real();
    dy[3] = rhs.imag();
  };
  std::vector<double> bp_left, bp_refl;
  for (double b : interior_breakpoints(prob)) {
    if (b < -1e-14) bp_left.push_back(b);
    if (b > 1e-14) bp_refl.push_back(-b);
  }
  std::sort(bp_refl.begin(), bp_refl.end());

  MatchedEigenfunction me;
  me.lambda = lambda;
  HalfShot L = integrate_half(make_rhs(prob, lambda), bp_left, prob.tol);
  HalfShot R = integrate_half(refl, bp_refl, prob.tol);

  // Global multiple-shooting system: keep every leg's coefficient pair as an
  // unknown instead of propagating one pair across the whole half. The true
  // eigenfunction carries both a turning-point layer and endpoint layers
  // joined through an exponentially small dip, so no single-anchor
  // parametrization can represent all legs at once; the banded system keeps
  // every block mildly conditioned (one leg's growth at most).
  int mL = static_cast<int>(L.legs.size());
  int mR = static_cast<int>(R.legs.size());
  int n = 2 * (mL + mR);
  auto colL = [&](int j) { return 2 * j; };           // leg j of the left half
  auto colR = [&](int j) { return 2 * (mL + j); };    // leg j of the right half

  Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(n, n);
  int row = 0;
  // continuity between consecutive legs: R[j] c_j - c_{j+1} = 0
  for (int j = 0; j + 1 < mL; ++j, row += 2) {
    G.block<2, 2>(row, colL(j)) = L.R[j];
    G.block<2, 2>(row, colL(j + 1)) = -Mat2::Identity();
  }
  for (int j = 0; j + 1 < mR; ++j, row += 2) {
    G.block<2, 2>(row, colR(j)) = R.R[j];
    G.block<2, 2>(row, colR(j + 1)) = -Mat2::Identity();
  }
  // matching at the turning point: value continuous, pf' flips sign under
  // the reflection ((pf')(0+) = -(reflected pf')(0))
  G.block<1, 2>(row, colL(mL - 1)) = L.U0.row(0);
  G.block<1, 2>(row, colR(mR - 1)) = -R.U0.row(0);
  ++row;
  G.block<1, 2>(row, colL(mL - 1)) = L.U0.row(1);
  G.block<1, 2>(row, colR(mR - 1)) = R.U0.row(1);
  ++row;
  // boundary conditions: leg 0 of each half starts from the identity basis,
  // so its coefficients are the endpoint data directly and
  // b(f) = (a1, c1, a2, -c2) with (a1, a2) at -1 and (c1, c2) at 1 reflected
  Eigen::Matrix<Complex, 4, 4> T = Eigen::Matrix<Complex, 4, 4>::Zero();
  T(0, 0) = 1.0;
  T(1, 2) = 1.0;
  T(2, 1) = 1.0;
  T(3, 3) = -1.0;
  Eigen::Matrix<Complex, 2, 4> bc = (prob.M - lambda * prob.N) * T;
  G.block<2, 2>(row, colL(0)) = bc.leftCols<2>();
  G.block<2, 2>(row, colR(0)) = bc.rightCols<2>();
  row += 2;

  // row then column equilibration before extracting the null vector
  for (int i = 0; i < n; ++i) {
    double rn = G.row(i).norm();
    if (rn > 1e-300) G.row(i) /= rn;
  }
  Eigen::VectorXd s(n);
  for (int k = 0; k < n; ++k) {
    s[k] = 1.0 / std::max(G.col(k).norm(), 1e-300);
    G.col(k) *= s[k];
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(G, Eigen::ComputeFullV);
  Eigen::VectorXcd z = svd.matrixV().col(n - 1);
  Eigen::VectorXcd coef = s.asDiagonal() * z;

  me.mismatch = (G * z).norm();

  // fix the scale at the turning point
  Complex val0 = L.U0.row(0) * coef.segment<2>(colL(mL - 1));
  Complex pval0 = L.U0.row(1) * coef.segment<2>(colL(mL - 1));
  double scale = std::max(std::abs(val0), std::abs(pval0));
  if (scale > 1e-300) coef /= scale;

  me.b << coef[colL(0)], coef[colR(0)], coef[colL(0) + 1], -coef[colR(0) + 1];

  for (int j = 0; j < mL; ++j) L.legs[j].coef = coef.segment<2>(colL(j));
  for (int j = 0; j < mR; ++j) R.legs[j].coef = coef.segment<2>(colR(j));
  me.left = std::move(L.legs);
  me.reflected = std::move(R.legs);
  return me;
}

std::vector<SpaceElement> root_vector_embed(const KreinContext& ctx, const RootChain& chain,
                                            const Mat2x4& N) {
  std::vector<SpaceElement> out;
  out.reserve(chain.fns.size());
  for (const ChainFunction& cf : chain.fns) {
    SpaceElement e;
    e.fun.resize(ctx.grid.size());
    for (int i = 0; i < ctx.grid.size(); ++i) e.fun[i] = cf.traj.f(ctx.grid.nodes[i]);
    e.vec = N * cf.b;
    out.push_back(std::move(e));
  }
  return out;
}

} // namespace kreinspec
