#ifndef KREINSPEC_KREIN_HPP
#define KREINSPEC_KREIN_HPP

#include <functional>

#include "kreinspec/boundary.hpp"
#include "kreinspec/coefficients.hpp"
#include "kreinspec/numerics.hpp"

namespace kreinspec {

// The ambient space: weighted L2 over [-1,1] (indefinite weight r) extended
// by a two-dimensional boundary component carrying the Hermitian coupling
// matrix delta. Elements are (function, vector) pairs; the indefinite inner
// product is  [a, b] = int a conj(b) r dt + b_vec^* delta a_vec,
// and the definite majorant replaces r, delta by |r|, |delta|.
struct KreinContext {
  Grid grid;
  CoefficientDescriptor r;
  Mat2 delta, sign_delta, abs_delta;

  // cached per-panel weight values w_j * r(x_j) (evaluated on the panel's
  // side, so a jump of r at a panel boundary is handled exactly)
  std::vector<Eigen::VectorXd> panel_wr;
  // per global node: sum over adjacent panels of w * |r| -- the diagonal of
  // the discrete majorant Gram matrix on the function component
  Eigen::VectorXd node_weight_abs_r;
  Eigen::VectorXd node_weight;  // plain quadrature weight per node
};

KreinContext make_context(Grid grid, CoefficientDescriptor r, const Mat2& delta,
                          double eig_tol = 1e-10);

struct SpaceElement {
  Eigen::VectorXcd fun;    // one value per grid node
  Eigen::Vector2cd vec = Eigen::Vector2cd::Zero();
};

SpaceElement sample(const KreinContext& ctx, const std::function<Complex(double)>& f,
                    const Eigen::Vector2cd& vec = Eigen::Vector2cd::Zero());

// Indefinite product [a, b]; conjugate-linear in b.
Complex inner_krein(const KreinContext& ctx, const SpaceElement& a, const SpaceElement& b);
// Definite majorant <a, b> (|r| and |delta|).
Complex inner_hilbert(const KreinContext& ctx, const SpaceElement& a, const SpaceElement& b);
double norm_hilbert(const KreinContext& ctx, const SpaceElement& a);

// Fundamental symmetry: multiply the function by sgn r and the vector by
// sgn delta, so that <a, b> = [Ja, b]. The function component keeps one
// value per node; at the sign change of r (the node at 0) the returned
// value uses the right-hand sign, which is immaterial for all quadratic
// forms evaluated through the panel-wise products above provided the
// function vanishes there or the caller works panel-wise.
SpaceElement apply_J(const KreinContext& ctx, const SpaceElement& a);

} // namespace kreinspec

#endif
