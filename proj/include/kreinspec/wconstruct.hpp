#ifndef KREINSPEC_WCONSTRUCT_HPP
#define KREINSPEC_WCONSTRUCT_HPP

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/SparseCore>

#include "kreinspec/krein.hpp"
#include "kreinspec/problem.hpp"

namespace kreinspec {

// --------------------------------------------------------------------------
// Operators here act on the broken (panel-discontinuous) representation:
// every panel owns its quadrature nodes, so a function may take different
// one-sided values at a shared panel boundary. This matters because the
// positive gluing operators produce images with a genuine jump at the
// turning point, which a single-valued nodal vector cannot represent.
// Adjoints are with respect to <f,g> = int f conj(g) |r| evaluated by the
// panel-wise quadrature.
// --------------------------------------------------------------------------
using SpMat = Eigen::SparseMatrix<Complex>;

struct PanelSpace {
  int n = 0;
  std::vector<double> x;       // coordinate per entry
  std::vector<int> panel;      // owning panel per entry
  std::vector<int> offset;     // panel -> first entry (offset.size() = panels+1)
  std::vector<int> nodal;      // entry -> global grid node
  Eigen::VectorXd w, wr, w_abs_r;  // plain, signed, and majorant weights
  Eigen::VectorXd j0;          // sgn r on the entry's panel
};

PanelSpace make_panel_space(const KreinContext& ctx);

Eigen::VectorXcd ps_sample(const PanelSpace& ps, const std::function<Complex(double)>& f);
// collapse to one value per grid node (copies averaged)
Eigen::VectorXcd ps_to_nodal(const KreinContext& ctx, const PanelSpace& ps,
                             const Eigen::VectorXcd& values);

// One-sided limit at `point`, extrapolated from the adjacent panel on the
// given side with the entry at `point` itself excluded, so the measurement
// does not trust the stored value there.
Complex ps_trace(const PanelSpace& ps, const Eigen::VectorXcd& values, double point,
                 int side);

// Discrete weighted adjoint D^{-1} A^H D with D = diag(w |r|), floored at
// 1e-14 of its largest entry where the weight vanishes.
Eigen::MatrixXcd weighted_adjoint(const PanelSpace& ps, const Eigen::MatrixXcd& A);

// <Af, g> - <f, Bg>; used to certify closed-form adjoint pairs.
Complex adjoint_defect(const PanelSpace& ps, const Eigen::MatrixXcd& A,
                       const Eigen::MatrixXcd& B, const Eigen::VectorXcd& f,
                       const Eigen::VectorXcd& g);

// Continuity + energy proxy for membership in the maximal form domain:
// largest one-sided mismatch at interior panel boundaries, and the discrete
// energy int p |f'|^2.
struct FmaxReport {
  double max_jump = 0.0;
  double energy = 0.0;
};
FmaxReport fmax_report(const KreinContext& ctx, const PanelSpace& ps,
                       const CoefficientDescriptor& p, const Eigen::VectorXcd& values);

// C2 plateau profiles (quintic smoothstep transitions), sampled per entry.
Eigen::VectorXd boundary_profile(const PanelSpace& ps);  // 1 for |x|>=7/8, 0 for |x|<=1/2
Eigen::VectorXd center_profile(const PanelSpace& ps);    // 1 for |x|<=1/8, 0 for |x|>=1/4
// Zero out entries on the wrong side of `point`; an entry sitting exactly
// at `point` is kept iff its panel lies on the kept side.
Eigen::VectorXd mask_side(const PanelSpace& ps, const Eigen::VectorXd& profile,
                          double point, int side);

// Grid whose panel boundaries carry every transition point of the cutoffs,
// profiles, and the ramp corner for this problem, so all operator images
// are smooth panel by panel. The certification accuracy depends on it.
Grid build_aligned_grid(const ProblemSpec& prob, int min_nodes);

// --------------------------------------------------------------------------
// Transplantation between half-neighborhoods with a C2 cutoff, plus its
// closed-form weighted adjoint:
//   (S f)(beta(t)) = |alpha'| ctilde(t) f(alpha(t)),
//   (S* g)(alpha(t)) = ctilde(t) |beta'| rho(t) g(beta(t)),
// with ctilde = 1 on [0, eps/4] decaying to 0 at eps/2. Endpoint traces:
// (Sf)(b) = |alpha'| f(a) and (S*g)(a) = |beta'| rho(0) g(b).
// --------------------------------------------------------------------------
struct Transplant {
  SpMat S, S_star;
  SmoothConnection con;
  double trace_S = 0.0;       // |alpha'|
  double trace_S_star = 0.0;  // |beta'| rho(0)
};

Transplant build_transplantation(const KreinContext& ctx, const PanelSpace& ps,
                                 const SmoothConnection& con);

// X = g1 S + g2 P with P = multiplication by `profile` (which must be 1 at
// the connection's base point on the connection side), where (g1, g2) solve
//   g1 |alpha'| + g2 = t1   and   g1 |beta'| rho(0) + g2 = 1,
// so (Xf)(base) = t1 f(base) and (X*h)(base) = h(base). Throws
// DegenerateConnection when the system is singular.
struct DiagonalX {
  SpMat X, X_star;
  Complex g1{}, g2{};
};
DiagonalX build_diagonal_X(const KreinContext& ctx, const PanelSpace& ps,
                           const Transplant& t, Complex t1,
                           const Eigen::VectorXd& profile);

// Structural pattern of the pair of endpoint-to-endpoint transplants:
// A: both run -1 -> 1; B: both run 1 -> -1; C: one each way.
enum class MixedPattern { A, B, C };

struct OffdiagonalX {
  SpMat X12, X21;  // right -> left and left -> right couplers
  SpMat X12_star, X21_star;
  double upsilon = 0.0;
};

// Determinant-combination couplers with the trace identities
//   (X12 g)(-1) = -b12 g(1),  (X21 f)(1) = b21 f(-1),
//   (X12* f)(1) = 0,          (X21* g)(-1) = 0.
// Throws DegenerateMixedCondition when the slope determinant vanishes.
OffdiagonalX build_offdiagonal_X(const KreinContext& ctx, const PanelSpace& ps,
                                 MixedPattern pattern, const Transplant& m1,
                                 const Transplant& m2, Complex b12, Complex b21);

struct BoundaryActionReport {
  Mat2 measured = Mat2::Zero();
  Mat2 target = Mat2::Zero();
  double deviation = 0.0;
};

struct GridOperator {
  SpMat W;     // the trace-carrying operator (includes the sign symmetry)
  SpMat form;  // X_adj X + I with the exact discrete adjoint; its weighted
               // symmetrization is the discrete quadratic form of J0 W
  double min_eig = 0.0;  // of that form (a true discrete-form certificate)
  double asym = 0.0;     // worst weak defect of the closed-form adjoint used
                         // in W, over a smooth test family
  BoundaryActionReport action;
};

// W = J0 (X*X + I) with X = X11 + X12 + X21 + X22 supported near the
// endpoints, carrying the prescribed 2x2 boundary action
//   (Wf)(-1) = b11 f(-1) + b12 f(1),  (Wf)(1) = b21 f(-1) + b22 f(1).
// The transplant pattern defaults to the problem's own mixed-condition
// witness; `force_pattern` builds the stated pattern directly.
GridOperator assemble_Ws1(const KreinContext& ctx, const PanelSpace& ps,
                          const ProblemSpec& prob, const Mat2& b,
                          std::optional<MixedPattern> force_pattern = std::nullopt);

// Boundary action of the glued positive operator.
enum class GluingTarget {
  Identity,      // I: repair at 0 plus a block at -1        (positive coupling)
  NegIdentity,   // -I: repair at 0 plus a block at +1       (negative coupling)
  DeltaInverse,  // delta^{-1}: repair at 0 plus all endpoint blocks (mixed)
  ZeroAtMinus1,  // diag(0, 1): kills f(-1)
  ZeroAtPlus1,   // diag(-1, 0): kills f(1)
  Annihilate     // [[-v, -v], [u, u]]: u (Wf)(-1) + v (Wf)(1) = 0
};

// Glued positive operator: center repair at the turning point plus the
// endpoint blocks demanded by `target`. Throws HypothesisNotMet when a
// required coefficient condition does not hold with a samplable witness.
GridOperator build_W01(const KreinContext& ctx, const PanelSpace& ps,
                       const ProblemSpec& prob, GluingTarget target,
                       const Mat2* delta_inv = nullptr, Complex u = 1.0,
                       Complex v = 0.0);

// --------------------------------------------------------------------------
// Constants and the rank-one smoothing machinery for the case of exactly
// one essential boundary condition.
// --------------------------------------------------------------------------
struct PositivityConstants {
  double alpha = 0.0, c = 0.0, kappa = 0.0, eta = 0.0;
  double delta1 = 0.0, delta2 = 0.0, r_norm1 = 0.0;
  double gamma = 0.0;  // smallest 1/1024-lattice point satisfying the tail bound
};

PositivityConstants positivity_constants(const DeltaInfo& delta, const ProblemSpec& prob);

struct PsiSystem {
  Eigen::VectorXd psi;          // even ramp: 0 on [-gamma, gamma], 1 at +-1
  Eigen::VectorXcd psi1, psi2;  // scaled one-sided copies
  Eigen::VectorXcd omega;
  Complex u, v;
  Complex eta11, eta12;
  double eta_sq = 0.0;  // |eta11|^2 + |eta12|^2
  PositivityConstants constants;
  double psi_norm2 = 0.0;  // ||psi||^2 in the |r|-weighted space
  std::function<double(double)> psi_fn;

  Complex omega_at(double x) const;
  Complex kernel(double x, double t) const;  // continuous Hermitian kernel
};

// Throws WrongCase unless the classification has exactly one essential
// condition.
PsiSystem build_psi(const KreinContext& ctx, const PanelSpace& ps,
                    const ProblemSpec& prob, const PositivityConstants& constants,
                    const Classification& cls, const DeltaInfo& delta);

struct KOperator {
  Eigen::MatrixXcd K;        // Nystroem matrix, self-adjoint in L_{2,r}
  double norm = 0.0;         // majorant operator norm (power iteration)
  double hermiticity = 0.0;  // max |k(x_i,x_j) - conj k(x_j,x_i)|
  double zero_trace = 0.0;   // |(K f)(0)| over the test family
};

KOperator assemble_K(const KreinContext& ctx, const PanelSpace& ps, const PsiSystem& psi);

struct ZOperator {
  Eigen::MatrixXcd Z;        // n x 2: a -> a1 psi1 + a2 psi2
  Eigen::MatrixXcd Z_kstar;  // 2 x n: f -> delta^{-1} ([f,psi1]; [f,psi2])
  double norm = 0.0;         // max of the two majorant norms
};

ZOperator assemble_Z(const KreinContext& ctx, const PanelSpace& ps, const PsiSystem& psi,
                     const DeltaInfo& delta);

struct FullW {
  Eigen::MatrixXcd W;    // (n+2) x (n+2) block operator
  double min_eig = 0.0;  // of the symmetrized majorant form of J W
  double asym = 0.0;
  double coupling_residual = 0.0;  // worst defect of the boundary coupling identity
};

FullW assemble_W_full(const KreinContext& ctx, const PanelSpace& ps,
                      const GridOperator& W01, const KOperator& K, const ZOperator& Z,
                      const PsiSystem& psi, const DeltaInfo& delta);

// End-to-end certification on an aligned grid with at least `min_nodes`
// nodes; all measured quantities plus the bounds they were checked against.
// A failed threshold triggers one refinement retry before `pass` is
// declared false.
struct WVerification {
  PositivityConstants constants;
  double k_norm = 0.0, k_norm_bound = 0.0;
  double k_hermiticity = 0.0;
  double k_zero_trace = 0.0;
  double k_boundary_identity = 0.0;  // worst defect of the rank-one trace identity
  double z_norm = 0.0, z_norm_bound = 0.0;
  double min_eig = 0.0, min_eig_bound = 0.0;
  double coupling_residual = 0.0;
  double w01_min_eig = 0.0;
  double w01_action_deviation = 0.0;
  int nodes = 0;
  bool pass = false;
};

WVerification verify_smoothing(const ProblemSpec& prob, int min_nodes = 2000);

} // namespace kreinspec

#endif
