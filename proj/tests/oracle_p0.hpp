// Closed-form characteristic data for the constant-coefficient model
// problem (p = 1, q = 0, r = sgn x, coupled derivative/value boundary
// conditions). Derived by hand from the cosh/cos fundamental system and
// used as an independent oracle for the shooting solver.
#ifndef KREINSPEC_TESTS_ORACLE_P0_HPP
#define KREINSPEC_TESTS_ORACLE_P0_HPP

#include <cmath>
#include <vector>

namespace oracle_p0 {

// entire functions c0(z) = cosh(sqrt z), s0(z) = sinh(sqrt z)/sqrt z
inline double c0(double z) {
  return z >= 0 ? std::cosh(std::sqrt(z)) : std::cos(std::sqrt(-z));
}
inline double s0(double z) {
  if (std::abs(z) < 1e-7) return 1.0 + z / 6.0 + z * z / 120.0;
  return z > 0 ? std::sinh(std::sqrt(z)) / std::sqrt(z)
               : std::sin(std::sqrt(-z)) / std::sqrt(-z);
}

// fundamental solutions shot from -1 with (f, f') = (1,0) / (0,1):
// propagate with weight -1 on [-1,0], +1 on [0,1]
struct Endpoint {
  double f1, f1p, f2, f2p;  // values and derivatives at x = 1
};

inline Endpoint endpoint(double l) {
  double A = c0(l), B = s0(l);        // transfer over [-1,0] (f'' = l f)
  double Ct = c0(-l), St = s0(-l);    // transfer over [0,1]  (f'' = -l f)
  Endpoint e;
  e.f1 = A * Ct + l * B * St;
  e.f1p = -l * A * St + l * B * Ct;
  e.f2 = B * Ct + A * St;
  e.f2p = -l * B * St + A * Ct;
  return e;
}

// Determinant of the 2x2 boundary system on the fundamental solutions.
// Expanding det[[-l + f1', f2'], [-l f1, -l f2 - 1]] by hand, every product
// of two cosh/sinh factors collapses through cosh^2 - sinh^2 = 1, leaving
//   D(l) = w^3 (sinh w cos w + cosh w sin w) + 2l + w (cosh w sin w - sinh w cos w)
// for l >= 0 (w = sqrt l) and the sinh/cosh <-> sin/cos swapped analogue for
// l < 0. The collapsed form matters: the raw 2x2 expansion cancels e^{2w}
// terms in floating point and loses ~1e-3 of root accuracy near |l| = 1000.
inline double D(double l) {
  double w = std::sqrt(std::abs(l));
  double sh = std::sinh(w), ch = std::cosh(w), s = std::sin(w), c = std::cos(w);
  if (l >= 0.0) return w * w * w * (sh * c + ch * s) + 2.0 * l + w * (ch * s - sh * c);
  return w * w * w * (s * ch + c * sh) + 2.0 * l + w * (s * ch - c * sh);
}

// all roots of D in [lo, hi] by dense scan + bisection
inline std::vector<double> roots(double lo, double hi, int scan = 200000,
                                 double tol = 1e-13) {
  std::vector<double> out;
  double prev = D(lo);
  double xprev = lo;
  for (int i = 1; i <= scan; ++i) {
    double x = lo + (hi - lo) * i / scan;
    double cur = D(x);
    if (prev == 0.0) out.push_back(xprev);
    else if (prev * cur < 0.0) {
      double a = xprev, b = x, fa = prev;
      while (b - a > tol * std::max(1.0, std::abs(a))) {
        double m = 0.5 * (a + b), fm = D(m);
        if (fa * fm <= 0.0) b = m;
        else {
          a = m;
          fa = fm;
        }
      }
      out.push_back(0.5 * (a + b));
    }
    prev = cur;
    xprev = x;
  }
  return out;
}

} // namespace oracle_p0

#endif
