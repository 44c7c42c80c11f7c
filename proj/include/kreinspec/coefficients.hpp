#ifndef KREINSPEC_COEFFICIENTS_HPP
#define KREINSPEC_COEFFICIENTS_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kreinspec/numerics.hpp"

namespace kreinspec {

// A coefficient is a finite list of pieces, each of the form
//   sign * |x - anchor|^exponent * poly(x)
// on an interval. Anchors are restricted to {-1, 0, 1} so power behavior
// only ever sits at the turning point or the endpoints.
struct CoefPiece {
  double lo = 0.0, hi = 0.0;
  double sign = 1.0;               // +1 or -1
  double anchor = 0.0;             // in {-1, 0, 1}
  double exponent = 0.0;           // > -1 for integrability
  std::vector<double> poly{1.0};   // ascending-degree coefficients

  double value(double x) const;
  double poly_value(double x) const;
};

enum class CoefRole { P, Q, R };

struct CoefficientDescriptor {
  CoefRole role = CoefRole::Q;
  std::vector<CoefPiece> pieces;

  // Checks coverage of [-1,1], integrability (exponent > -1; for p the
  // reciprocal, exponent < 1), positivity of p, and x*r(x) > 0.
  void validate() const;

  // side > 0 evaluates with the piece on the right of x, side < 0 on the
  // left; needed at piece boundaries where the value can jump.
  double evaluate(double x, double side = 0.0) const;
  const CoefPiece& piece_at(double x, double side = 0.0) const;
  std::vector<double> breakpoints() const;  // piece edges, ascending

  double integrate(double a, double b, double tol = 1e-12) const;
};

// Integral of f(x) * weight(x) over [a,b], split at the weight's piece
// edges so power singularities sit on subinterval endpoints.
QuadResult quad_weighted(const std::function<Complex(double)>& f,
                         const CoefficientDescriptor& weight, double a, double b,
                         double tol = 1e-12);

// Half-neighborhood handle: the point and the side the neighborhood
// extends to (+1 right, -1 left).
struct Half {
  double point = 0.0;
  int side = 1;
};
inline constexpr Half kMinus1Right{-1.0, +1};
inline constexpr Half kZeroLeft{0.0, -1};
inline constexpr Half kZeroRight{0.0, +1};
inline constexpr Half kPlus1Left{1.0, -1};

// Local factorization value(x) = |x - point|^nu * g1(x) with g1 continuous
// and nonvanishing on the half-neighborhood; residual = |g1(point)|.
struct OrderInfo {
  double nu = 0.0;
  double residual = 1.0;
};
std::optional<OrderInfo> detect_order(const CoefficientDescriptor& coef, Half at);

struct StructureFlags {
  bool even_p = false;
  bool odd_r = false;
  bool nearly_even_p = false;
  double nearly_even_c = 0.0;
  bool nearly_odd_r = false;
  double nearly_odd_c = 0.0;
  std::optional<double> order_0minus, order_0plus, order_minus1, order_plus1;  // of r
};
StructureFlags structure_flags(const CoefficientDescriptor& p,
                               const CoefficientDescriptor& r);

// Affine transplant data between two half-neighborhoods:
//   alpha(t) = a.point + a.side * slope_a * t,  t in [0, eps]
//   beta(t)  = b.point + b.side * slope_b * t
// rho(t) = |r(beta(t))| / |r(alpha(t))|, varpi(t) = p(beta(t)) / p(alpha(t)).
struct SmoothConnection {
  Half a, b;
  double slope_a = 1.0, slope_b = 1.0;  // positive; signed slopes carry a.side/b.side
  double eps = 0.0;
  double rho0 = 0.0;
  double tau = 1.0;  // 1/tau < varpi < tau on (0, eps]
  std::function<double(double)> rho, varpi;

  double alpha(double t) const { return a.point + a.side * slope_a * t; }
  double beta(double t) const { return b.point + b.side * slope_b * t; }
  double alpha_abs() const { return slope_a; }
  double beta_rho0() const { return slope_b * rho0; }
};

// Builds the transplant witness when the order data allows one:
// equal orders give rho0 = (slope_b/slope_a)^nu * residual ratio; an order
// jump > 1/2 upward gives rho0 = 0; a downward or small upward jump is
// rejected (rho fails the finite-energy requirement).
std::optional<SmoothConnection> connection_witness(const CoefficientDescriptor& p,
                                                   const CoefficientDescriptor& r,
                                                   Half from, Half to,
                                                   double slope_a = 1.0,
                                                   double slope_b = 1.0);

enum class ConditionKind { At0, AtMinus1, AtPlus1, Mixed };
enum class Verdict { Satisfied, Violated, Unknown };
enum class MixedCase { None, A, B, C };

struct ConditionVerdict {
  ConditionKind which = ConditionKind::At0;
  Verdict verdict = Verdict::Unknown;
  MixedCase mixed_case = MixedCase::None;
  std::vector<SmoothConnection> witnesses;
  std::string justification;
};

// Decision procedure over the catalogued coefficient classes (pure order
// type with continuous nonvanishing p; even/odd; nearly-even/nearly-odd).
// Everything outside the catalog returns Unknown.
ConditionVerdict check_condition(const CoefficientDescriptor& p,
                                 const CoefficientDescriptor& r, ConditionKind which);

} // namespace kreinspec

#endif
