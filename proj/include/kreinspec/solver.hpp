#ifndef KREINSPEC_SOLVER_HPP
#define KREINSPEC_SOLVER_HPP

#include <functional>
#include <vector>

#include "kreinspec/krein.hpp"
#include "kreinspec/problem.hpp"

namespace kreinspec {

// Thread cap used by embarrassingly parallel loops (scan points, contour
// nodes). Controlled by the KREINSPEC_THREADS environment variable;
// results are assembled deterministically regardless of the cap.
int max_threads();

// Fundamental system of -(p f')' + q f = lambda r f shot from x = -1 with
// (f, pf') = (1,0) and (0,1). B columns are the boundary vectors
// (f(-1), f(1), (pf')(-1), (pf')(1)) of the two solutions.
struct FundamentalSystem {
  Complex lambda;
  DenseTrajectory f1, f2;
  Eigen::Matrix<Complex, 4, 2> B;
};

FundamentalSystem fundamental_b_vectors(const ProblemSpec& prob, Complex lambda);

struct CharacteristicValue {
  Complex lambda;
  Eigen::Matrix<Complex, 4, 2> B;
  Mat2 C;         // (M - lambda N) B
  Complex D;      // det C; zero exactly at eigenvalues
  Complex Dprime; // Richardson difference estimate
};

CharacteristicValue characteristic(const ProblemSpec& prob, Complex lambda,
                                   bool with_derivative = true);
// Cheap variant reusing a precomputed fundamental system.
Complex characteristic_det(const ProblemSpec& prob, Complex lambda);

// A twice-differentiable test function given in closed form.
struct SmoothFunction {
  std::function<Complex(double)> f, df, d2f;
};

// Residual of the boundary-form identity
//   int (l(f) conj(g) - f conj(l(g))) dx - i b(g)^* Q b(f),
// where l(f) = -(p f')' + q f; vanishes for exact arithmetic.
Complex lagrange_residual(const ProblemSpec& prob, const SmoothFunction& f,
                          const SmoothFunction& g);

struct RealRoot {
  double lambda = 0.0;
  bool sign_change = true;  // false: located as an even-order |D| minimum
  int order_hint = 1;
};

// Scan-and-refine on the real axis. Density is measured per unit of
// sqrt|lambda| since the roots of this problem class equidistribute in
// sqrt(lambda). Throws RefineRequested when two refined roots fall within
// two scan cells of each other.
std::vector<RealRoot> find_real_eigenvalues(const ProblemSpec& prob, double lmin,
                                            double lmax,
                                            double points_per_sqrt_unit = 400.0);

// Winding number of D around the axis-aligned rectangle [lo, hi] (corners
// as complex numbers). Throws ContourTooClose when the contour passes too
// near a zero or the raw integral is not within 0.25 of an integer.
int count_zeros_rect(const ProblemSpec& prob, Complex lo, Complex hi,
                     int pts_per_side = 64);

struct ChainFunction {
  DenseTrajectory traj;
  Eigen::Vector4cd b;  // boundary vector
};

struct RootChain {
  Complex lambda;
  std::vector<ChainFunction> fns;  // f0 (eigenfunction), f1, ...
};

// Builds the maximal Jordan chain above the eigenfunction
// f0 = coeffs0[0] f1 + coeffs0[1] f2. Each extension solves
// l(f_j) = lambda r f_j + r f_{j-1} with M b(f_j) - lambda N b(f_j)
// = N b(f_{j-1}); the chain stops when the 2x2 boundary system becomes
// unsolvable (least-squares residual above tolerance).
RootChain jordan_chain(const ProblemSpec& prob, Complex lambda0,
                       const Eigen::Vector2cd& coeffs0, int max_depth = 4);

struct Multiplicity {
  int geometric = 0;
  int algebraic_order = 0;  // order of the zero of D (winding on a circle)
  int algebraic_chain = 0;  // total chain length from the null space
  bool consistent = false;
};

// Both multiplicity notions at a real root of D; throws Indeterminate when
// the rank decision at lambda0 is ambiguous.
Multiplicity multiplicity(const ProblemSpec& prob, double lambda0, double radius = 0.05);

// Eigenfunction coefficients in the fundamental basis: the singular vector
// of C(lambda0) for its smallest singular value.
Eigen::Vector2cd eigenfunction_coefficients(const ProblemSpec& prob, Complex lambda0);

// Pair each chain function with the vector component N b(f_j).
std::vector<SpaceElement> root_vector_embed(const KreinContext& ctx,
                                            const RootChain& chain, const Mat2x4& N);

// One leg of a renormalized shot: the two fundamental columns over [lo, hi]
// and the solution's coefficients in this leg's basis.
struct ShotLeg {
  double lo = 0.0, hi = 0.0;
  DenseTrajectory t1, t2;
  Eigen::Vector2cd coef = Eigen::Vector2cd::Zero();
};

// Eigenfunction computed by shooting from both endpoints and matching value
// and p f' at the turning point. Each half is integrated in its stable
// (growing) direction, the fundamental pair is re-orthonormalized (QR) at
// checkpoints so the two columns never collapse onto the dominant growing
// mode, and every leg's coefficient pair stays an unknown of one banded
// system (multiple shooting). This stays accurate at eigenvalues where
// one-sided shooting loses the decaying component to roundoff.
struct MatchedEigenfunction {
  double lambda = 0.0;
  std::vector<ShotLeg> left;       // f on [-1, 0]
  std::vector<ShotLeg> reflected;  // h(s) = f(-s) on [-1, 0]
  Eigen::Vector4cd b;              // boundary vector of f
  double mismatch = 0.0;           // matching defect of the equilibrated system
  Complex f(double x) const;
};

MatchedEigenfunction matched_eigenfunction(const ProblemSpec& prob, double lambda);

} // namespace kreinspec

#endif
