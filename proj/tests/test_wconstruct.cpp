#include "doctest.h"

#include <cmath>
#include <random>

#include "kreinspec/wconstruct.hpp"

using namespace kreinspec;

namespace {

ProblemSpec load(const char* name) {
  std::string dir = std::string(KREINSPEC_SOURCE_DIR) + "/problems/";
  return parse_problem(dir + name + ".json");
}

struct Space {
  KreinContext ctx;
  PanelSpace ps;
};

Space space_for(const ProblemSpec& p, int min_nodes) {
  DeltaInfo d = compute_delta(p.M, p.N);
  KreinContext ctx = make_context(build_aligned_grid(p, min_nodes), p.r, d.delta);
  PanelSpace ps = make_panel_space(ctx);
  return {std::move(ctx), std::move(ps)};
}

Complex smooth_val(double a, double b, double x) {
  return Complex(std::cos(a * x), 0.5 * std::sin(b * x + 0.2));
}

Eigen::VectorXcd smooth(const PanelSpace& ps, double a, double b) {
  return ps_sample(ps, [a, b](double x) { return smooth_val(a, b, x); });
}

} // namespace

TEST_CASE("profiles, masks, and one-sided traces") {
  ProblemSpec p0 = load("example_p0");
  Space s = space_for(p0, 200);
  const PanelSpace& ps = s.ps;

  Eigen::VectorXd bp = boundary_profile(ps);
  Eigen::VectorXd cp = center_profile(ps);
  for (int i = 0; i < ps.n; ++i) {
    double x = std::abs(ps.x[i]);
    if (x <= 0.5) CHECK(bp[i] == 0.0);
    if (x >= 0.875) CHECK(bp[i] == 1.0);
    if (x <= 0.125) CHECK(cp[i] == 1.0);
    if (x >= 0.25) CHECK(cp[i] == 0.0);
    CHECK(bp[i] >= 0.0);
    CHECK(bp[i] <= 1.0);
  }

  // traces of a smooth function agree with its endpoint values
  Eigen::VectorXcd f = smooth(ps, 1.3, 0.7);
  CHECK(std::abs(ps_trace(ps, f, -1.0, +1) - f[0]) < 1e-10);
  CHECK(std::abs(ps_trace(ps, f, 1.0, -1) - f[ps.n - 1]) < 1e-10);

  // a masked constant has a genuine one-sided jump at 0, representable
  // exactly in the broken space
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(ps.n);
  Eigen::VectorXd right = mask_side(ps, ones, 0.0, +1);
  Eigen::VectorXcd rc = right.cast<Complex>();
  CHECK(std::abs(ps_trace(ps, rc, 0.0, +1) - 1.0) < 1e-10);
  CHECK(std::abs(ps_trace(ps, rc, 0.0, -1)) < 1e-10);

  FmaxReport rep = fmax_report(s.ctx, ps, p0.p, rc);
  CHECK(rep.max_jump > 0.5);
  Eigen::VectorXcd lin = ps_sample(ps, [](double x) { return Complex(x); });
  FmaxReport lrep = fmax_report(s.ctx, ps, p0.p, lin);
  CHECK(lrep.max_jump < 1e-10);
  CHECK(std::abs(lrep.energy - 2.0) < 1e-10);  // int p |f'|^2 = 2 for f = x
}

TEST_CASE("transplantation: pointwise identity, traces, adjoint consistency") {
  ProblemSpec p0 = load("example_p0");
  Space s = space_for(p0, 300);
  const PanelSpace& ps = s.ps;

  ConditionVerdict v0 = check_condition(p0.p, p0.r, ConditionKind::At0);
  REQUIRE(v0.verdict == Verdict::Satisfied);
  REQUIRE(!v0.witnesses.empty());
  const SmoothConnection& con = v0.witnesses[0];
  Transplant tr = build_transplantation(s.ctx, ps, con);
  CHECK(tr.trace_S == con.alpha_abs());
  CHECK(tr.trace_S_star == con.beta_rho0());

  Eigen::VectorXcd f = smooth(ps, 2.1, 1.1);
  Eigen::VectorXcd Sf = tr.S * f;
  // inside the plateau of the cutoff, (Sf)(beta(t)) = |alpha'| f(alpha(t))
  int checked = 0;
  for (int i = 0; i < ps.n; ++i) {
    double x = ps.x[i];
    double t = (x - con.b.point) / (con.b.side * con.slope_b);
    if (t < 0.0 || t > 0.24 * con.eps) continue;
    if (std::abs(Sf[i]) == 0.0 && std::abs(t) < 1e-13) continue;  // off-side copy
    Complex expect = con.alpha_abs() * smooth_val(2.1, 1.1, con.alpha(t));
    CHECK(std::abs(Sf[i] - expect) < 1e-9);
    ++checked;
  }
  CHECK(checked >= 3);
  // image vanishes away from the connection
  for (int i = 0; i < ps.n; ++i) {
    double x = ps.x[i];
    double t = (x - con.b.point) / (con.b.side * con.slope_b);
    if (t < -1e-13 || t > 0.5 * con.eps + 1e-13) CHECK(Sf[i] == Complex(0.0));
  }
  // endpoint traces from both sides of the base point: the image jumps
  CHECK(std::abs(ps_trace(ps, Sf, con.b.point, con.b.side) -
                 con.alpha_abs() * smooth_val(2.1, 1.1, con.a.point)) < 1e-8);
  CHECK(std::abs(ps_trace(ps, Sf, con.b.point, -con.b.side)) < 1e-10);

  // closed-form adjoint against the weighted pairing on random smooth pairs
  Eigen::MatrixXcd S = Eigen::MatrixXcd(tr.S), Ss = Eigen::MatrixXcd(tr.S_star);
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> dist(0.5, 3.0);
  for (int k = 0; k < 10; ++k) {
    Eigen::VectorXcd a = smooth(ps, dist(gen), dist(gen));
    Eigen::VectorXcd b = smooth(ps, dist(gen), dist(gen));
    CHECK(std::abs(adjoint_defect(ps, S, Ss, a, b)) < 1e-8);
  }
}

TEST_CASE("diagonal coupler carries the prescribed traces") {
  ProblemSpec p0 = load("example_p0");
  Space s = space_for(p0, 300);
  const PanelSpace& ps = s.ps;

  ConditionVerdict v0 = check_condition(p0.p, p0.r, ConditionKind::At0);
  Transplant tr = build_transplantation(s.ctx, ps, v0.witnesses[0]);
  Eigen::VectorXd prof = mask_side(ps, center_profile(ps), 0.0, v0.witnesses[0].a.side);
  Complex t1(-2.0, 0.5);
  DiagonalX x = build_diagonal_X(s.ctx, ps, tr, t1, prof);

  Eigen::VectorXcd f = smooth(ps, 1.7, 2.3);
  Complex f0 = smooth_val(1.7, 2.3, 0.0);
  int side = v0.witnesses[0].a.side;
  Eigen::VectorXcd Xf = x.X * f;
  CHECK(std::abs(ps_trace(ps, Xf, 0.0, side) - t1 * f0) < 1e-8);
  CHECK(std::abs(ps_trace(ps, Xf, 0.0, -side)) < 1e-8);
  Eigen::VectorXcd Xsf = x.X_star * f;
  CHECK(std::abs(ps_trace(ps, Xsf, 0.0, side) - f0) < 1e-8);

  // adjoint pair in the weighted pairing
  std::mt19937 gen(9);
  std::uniform_real_distribution<double> dist(0.5, 3.0);
  for (int k = 0; k < 5; ++k) {
    Eigen::VectorXcd a = smooth(ps, dist(gen), dist(gen));
    Eigen::VectorXcd b = smooth(ps, dist(gen), dist(gen));
    CHECK(std::abs(adjoint_defect(ps, Eigen::MatrixXcd(x.X),
                                  Eigen::MatrixXcd(x.X_star), a, b)) < 1e-8);
  }

  // degenerate system: equal traces cannot carry independent traces
  Transplant deg = tr;
  deg.trace_S_star = deg.trace_S;
  CHECK_THROWS_AS(build_diagonal_X(s.ctx, ps, deg, t1, prof), Error);
}

TEST_CASE("off-diagonal couplers: all three patterns") {
  ProblemSpec p0 = load("example_p0");
  Space s = space_for(p0, 300);
  const PanelSpace& ps = s.ps;

  auto lr1 = connection_witness(p0.p, p0.r, kMinus1Right, kPlus1Left, 1.0, 1.0);
  auto lr2 = connection_witness(p0.p, p0.r, kMinus1Right, kPlus1Left, 2.0, 1.0);
  auto rl1 = connection_witness(p0.p, p0.r, kPlus1Left, kMinus1Right, 1.0, 2.0);
  auto rl2 = connection_witness(p0.p, p0.r, kPlus1Left, kMinus1Right, 1.0, 1.0);
  REQUIRE(lr1);
  REQUIRE(lr2);
  REQUIRE(rl1);
  REQUIRE(rl2);

  Eigen::VectorXcd f = smooth(ps, 0.9, 1.9);
  Complex fL = smooth_val(0.9, 1.9, -1.0), fR = smooth_val(0.9, 1.9, 1.0);
  Complex b12(0.7, -0.4), b21(-1.2, 0.3);

  auto check_traces = [&](const OffdiagonalX& off) {
    Eigen::VectorXcd g12 = off.X12 * f, g21 = off.X21 * f;
    CHECK(std::abs(ps_trace(ps, g12, -1.0, +1) - (-b12 * fR)) < 1e-8);
    CHECK(std::abs(ps_trace(ps, g21, 1.0, -1) - b21 * fL) < 1e-8);
    Eigen::VectorXcd a12 = off.X12_star * f, a21 = off.X21_star * f;
    CHECK(std::abs(ps_trace(ps, a12, 1.0, -1)) < 1e-8);
    CHECK(std::abs(ps_trace(ps, a21, -1.0, +1)) < 1e-8);
  };

  Transplant tlr1 = build_transplantation(s.ctx, ps, *lr1);
  Transplant tlr2 = build_transplantation(s.ctx, ps, *lr2);
  Transplant trl1 = build_transplantation(s.ctx, ps, *rl1);
  Transplant trl2 = build_transplantation(s.ctx, ps, *rl2);

  OffdiagonalX a = build_offdiagonal_X(s.ctx, ps, MixedPattern::A, tlr1, tlr2, b12, b21);
  CHECK(std::abs(a.upsilon - (-1.0)) < 1e-12);  // 1*1 - 2*1
  check_traces(a);

  OffdiagonalX b = build_offdiagonal_X(s.ctx, ps, MixedPattern::B, trl1, trl2, b12, b21);
  check_traces(b);

  OffdiagonalX c = build_offdiagonal_X(s.ctx, ps, MixedPattern::C, tlr1, trl1, b12, b21);
  CHECK(std::abs(c.upsilon - (-1.0)) < 1e-12);  // 1*1 - 1*2
  check_traces(c);

  // adjoint pairs hold in the weighted pairing
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> dist(0.5, 3.0);
  for (int k = 0; k < 5; ++k) {
    Eigen::VectorXcd u = smooth(ps, dist(gen), dist(gen));
    Eigen::VectorXcd w = smooth(ps, dist(gen), dist(gen));
    CHECK(std::abs(adjoint_defect(ps, Eigen::MatrixXcd(c.X12),
                                  Eigen::MatrixXcd(c.X12_star), u, w)) < 1e-8);
    CHECK(std::abs(adjoint_defect(ps, Eigen::MatrixXcd(c.X21),
                                  Eigen::MatrixXcd(c.X21_star), u, w)) < 1e-8);
  }

  // orientation mismatch is rejected
  CHECK_THROWS_AS(build_offdiagonal_X(s.ctx, ps, MixedPattern::A, trl1, trl2, b12, b21),
                  Error);
}

TEST_CASE("endpoint operator carries arbitrary boundary actions") {
  ProblemSpec p0 = load("example_p0");
  Space s = space_for(p0, 300);

  std::mt19937 gen(3);
  std::uniform_real_distribution<double> dist(-1.5, 1.5);
  for (int trial = 0; trial < 3; ++trial) {
    Mat2 b;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) b(i, j) = Complex(dist(gen), dist(gen));
    GridOperator w = assemble_Ws1(s.ctx, s.ps, p0, b);
    CHECK(w.action.deviation < 1e-6);
    CHECK(w.min_eig >= 1.0 - 1e-6);
    GridOperator wb = assemble_Ws1(s.ctx, s.ps, p0, b, MixedPattern::B);
    CHECK(wb.action.deviation < 1e-6);
    CHECK(wb.min_eig >= 1.0 - 1e-6);
    GridOperator wc = assemble_Ws1(s.ctx, s.ps, p0, b, MixedPattern::C);
    CHECK(wc.action.deviation < 1e-6);
    CHECK(wc.min_eig >= 1.0 - 1e-6);
  }
}

TEST_CASE("glued positive operators hit their boundary targets") {
  ProblemSpec p0 = load("example_p0");
  Space s = space_for(p0, 300);
  DeltaInfo d = compute_delta(p0.M, p0.N);

  GridOperator wi = build_W01(s.ctx, s.ps, p0, GluingTarget::Identity);
  CHECK(wi.action.deviation < 1e-6);
  CHECK(wi.min_eig >= 1.0 - 1e-6);
  CHECK((wi.action.target - Mat2::Identity()).norm() == 0.0);

  GridOperator wn = build_W01(s.ctx, s.ps, p0, GluingTarget::NegIdentity);
  CHECK(wn.action.deviation < 1e-6);
  CHECK(wn.min_eig >= 1.0 - 1e-6);

  GridOperator wz = build_W01(s.ctx, s.ps, p0, GluingTarget::ZeroAtMinus1);
  CHECK(wz.action.deviation < 1e-6);
  CHECK(std::abs(wz.action.measured(0, 0)) < 1e-6);

  GridOperator wd = build_W01(s.ctx, s.ps, p0, GluingTarget::DeltaInverse, &d.delta_inv);
  CHECK(wd.action.deviation < 1e-6);
  CHECK(wd.min_eig >= 1.0 - 1e-6);

  double sc = 1.0 / std::sqrt(2.0);
  GridOperator wa = build_W01(s.ctx, s.ps, p0, GluingTarget::Annihilate, nullptr, sc, sc);
  CHECK(wa.action.deviation < 1e-6);
  // the annihilating action kills u g(-1) + v g(1) by construction
  Mat2 act = wa.action.measured;
  CHECK(std::abs(sc * act(0, 0) + sc * act(1, 0)) < 1e-6);
  CHECK(std::abs(sc * act(0, 1) + sc * act(1, 1)) < 1e-6);

  CHECK_THROWS_AS(build_W01(s.ctx, s.ps, p0, GluingTarget::DeltaInverse, nullptr), Error);
}

TEST_CASE("positivity constants on the shipped problems") {
  for (const char* name : {"example_p0", "example_p1"}) {
    ProblemSpec prob = load(name);
    DeltaInfo d = compute_delta(prob.M, prob.N);
    PositivityConstants c = positivity_constants(d, prob);
    CHECK(std::abs(c.delta1 - 1.0) < 1e-12);
    CHECK(std::abs(c.delta2 - 1.0) < 1e-12);
    CHECK(std::abs(c.eta - 1.0) < 1e-12);
    CHECK(std::abs(c.r_norm1 - 2.0) < 1e-14);
    CHECK(std::abs(c.alpha - 0.2) < 1e-13);
    CHECK(std::abs(c.kappa - 0.8) < 1e-13);
    CHECK(std::abs(c.c - 1.0 / (10.0 * std::sqrt(2.0))) < 1e-13);
    CHECK(c.gamma == 15.0 / 16.0);  // exactly on the 1/1024 lattice
    CHECK(std::abs(1.0 - c.kappa - c.alpha / c.delta2) <= 1e-14);
  }
}

TEST_CASE("ramp system and smoothing kernel on the one-condition problem") {
  ProblemSpec p1 = load("example_p1");
  DeltaInfo d = compute_delta(p1.M, p1.N);
  Classification cls = classify(p1.M, p1.N);
  REQUIRE(cls.form_case == FormCase::B);
  Space s = space_for(p1, 600);
  const PanelSpace& ps = s.ps;
  PositivityConstants c = positivity_constants(d, p1);
  PsiSystem psi = build_psi(s.ctx, ps, p1, c, cls, d);

  // closed form: psi = 16 (|x| - 15/16)_+ for p = 1, gamma = 15/16
  for (int i = 0; i < ps.n; ++i) {
    double x = std::abs(ps.x[i]);
    double expect = x <= 15.0 / 16.0 ? 0.0 : 16.0 * (x - 15.0 / 16.0);
    CHECK(std::abs(psi.psi[i] - expect) < 1e-12);
  }
  CHECK(std::abs(psi.psi_norm2 - 1.0 / 24.0) < 1e-12);
  CHECK(std::abs(psi.eta11 - Complex(-1.0)) < 1e-14);
  CHECK(std::abs(psi.eta12) < 1e-14);
  CHECK(std::abs(psi.u - Complex(1.0)) < 1e-14);
  CHECK(std::abs(psi.v) < 1e-14);

  // kernel bound and Hermitian symmetry at off-grid points
  double bound = 2.0 * psi.eta_sq * c.alpha;
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    double x = dist(gen), t = dist(gen);
    Complex kv = psi.kernel(x, t);
    CHECK(std::abs(kv) <= bound + 1e-15);
    CHECK(std::abs(kv - std::conj(psi.kernel(t, x))) < 1e-13);
  }

  KOperator K = assemble_K(s.ctx, ps, psi);
  CHECK(K.hermiticity <= 1e-12);
  CHECK(K.norm <= c.kappa * (1.0 + 1e-3));
  CHECK(K.zero_trace <= 1e-8);

  ZOperator Z = assemble_Z(s.ctx, ps, psi, d);
  CHECK(std::abs(Z.norm - c.alpha * std::sqrt(1.0 / 48.0)) < 1e-10);
  CHECK(Z.norm <= c.alpha / (2.0 * c.delta2) * (1.0 + 1e-3));

  // the pairing adjoint: [Za, f] = (delta Z^[*] f)^* a through the coupling
  for (int k = 0; k < 5; ++k) {
    Eigen::VectorXcd f = smooth(ps, 1.0 + k, 0.4 * k + 0.3);
    Eigen::Vector2cd a(Complex(dist(gen), dist(gen)), Complex(dist(gen), dist(gen)));
    Eigen::VectorXcd za = Z.Z * a;
    Complex lhs = 0.0;
    for (int i = 0; i < ps.n; ++i) lhs += ps.wr[i] * za[i] * std::conj(f[i]);
    Eigen::Vector2cd zsf = Z.Z_kstar * f;
    Complex rhs = (zsf.adjoint() * s.ctx.delta * a).value();
    CHECK(std::abs(lhs - rhs) < 1e-10);
  }
}

TEST_CASE("end-to-end smoothing certification") {
  ProblemSpec p1 = load("example_p1");
  WVerification res = verify_smoothing(p1, 700);
  CHECK(res.pass);
  CHECK(res.min_eig >= res.min_eig_bound);
  CHECK(res.coupling_residual < 1e-6);
  CHECK(res.k_boundary_identity < 1e-6);
  CHECK(res.w01_action_deviation < 1e-6);
  CHECK(res.w01_min_eig >= 1.0 - 1e-6);

  // the construction refuses problems with the wrong number of essential
  // conditions
  ProblemSpec p2 = load("example_p2");
  DeltaInfo d2 = compute_delta(p2.M, p2.N);
  Classification cls2 = classify(p2.M, p2.N);
  Space s2 = space_for(p2, 200);
  PositivityConstants c2 = positivity_constants(d2, p2);
  CHECK_THROWS_AS(build_psi(s2.ctx, s2.ps, p2, c2, cls2, d2), Error);
}
