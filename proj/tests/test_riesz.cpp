#include "doctest.h"

#include <cmath>
#include <random>

#include "kreinspec/riesz.hpp"

using namespace kreinspec;

namespace {

ProblemSpec load(const char* name) {
  std::string dir = std::string(KREINSPEC_SOURCE_DIR) + "/problems/";
  return parse_problem(dir + name + ".json");
}

SpaceElement normalized(const KreinContext& ctx, const std::function<Complex(double)>& f) {
  SpaceElement e = sample(ctx, f);
  double n = norm_hilbert(ctx, e);
  e.fun /= n;
  e.vec /= n;
  return e;
}

} // namespace

TEST_CASE("Gram matrix basics on synthetic families") {
  ProblemSpec p0 = load("example_p0");
  DeltaInfo d = compute_delta(p0.M, p0.N);
  KreinContext ctx = make_context(build_grid(p0, 400), p0.r, d.delta);

  // sin(k pi x) are orthogonal in the majorant (|r| = 1 here)
  std::vector<SpaceElement> fam;
  for (int k = 1; k <= 12; ++k)
    fam.push_back(normalized(ctx, [k](double x) {
      return Complex(std::sin(k * M_PI * x));
    }));
  Eigen::MatrixXcd G = gram_matrix(ctx, fam);
  CHECK((G - Eigen::MatrixXcd::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-8);

  // single vector
  std::vector<SpaceElement> one = {fam[0]};
  Eigen::MatrixXcd G1 = gram_matrix(ctx, one);
  CHECK(G1.rows() == 1);
  CHECK(std::abs(G1(0, 0) - 1.0) < 1e-10);

  // duplicated vector: rank deficiency
  std::vector<SpaceElement> dup = fam;
  dup.push_back(fam[3]);
  Eigen::VectorXd ev = herm_eig(gram_matrix(ctx, dup)).values;
  CHECK(std::abs(ev.minCoeff()) < 1e-10);

  // unnormalized input is rejected
  std::vector<SpaceElement> bad = {fam[0]};
  bad[0].fun *= 2.0;
  CHECK_THROWS_AS(gram_matrix(ctx, bad), Error);
}

TEST_CASE("finite-section ratios on synthetic families") {
  ProblemSpec p0 = load("example_p0");
  DeltaInfo d = compute_delta(p0.M, p0.N);
  KreinContext ctx = make_context(build_grid(p0, 400), p0.r, d.delta);

  std::vector<SpaceElement> fam;
  for (int k = 1; k <= 12; ++k)
    fam.push_back(normalized(ctx, [k](double x) {
      return Complex(std::sin(k * M_PI * x));
    }));

  GramReport rep = riesz_ratio(ctx, fam, {10, 12});
  REQUIRE(rep.sections.size() == 2);
  for (const GramSection& s : rep.sections) {
    CHECK(s.ratio >= 1.0);
    CHECK(std::abs(s.ratio - 1.0) < 1e-7);
  }
  CHECK(std::abs(rep.plateau - 1.0) < 1e-7);

  // a duplicated vector blows the ratio up
  std::vector<SpaceElement> dup = fam;
  dup[11] = dup[0];
  GramReport bad = riesz_ratio(ctx, dup, {10, 12});
  CHECK(bad.sections[1].ratio > 1e9);

  // unitary re-mixing within a group leaves the spectrum unchanged
  std::vector<SpaceElement> mixed = fam;
  Complex c = std::polar(1.0, 0.7), s = std::polar(1.0, -0.3);
  double t = 0.6, u = std::sqrt(1.0 - t * t);
  SpaceElement a = fam[4], b = fam[5];
  mixed[4].fun = t * c * a.fun + u * s * b.fun;
  mixed[4].vec = t * c * a.vec + u * s * b.vec;
  mixed[5].fun = -u * std::conj(s) * a.fun + t * std::conj(c) * b.fun;
  mixed[5].vec = -u * std::conj(s) * a.vec + t * std::conj(c) * b.vec;
  GramReport remix = riesz_ratio(ctx, mixed, {12});
  CHECK(std::abs(remix.sections[0].ratio - rep.sections[1].ratio) < 1e-8);

  std::vector<SpaceElement> few(fam.begin(), fam.begin() + 5);
  CHECK_THROWS_AS(riesz_ratio(ctx, few), Error);
}

TEST_CASE("indefinite orthogonality reports") {
  ProblemSpec p0 = load("example_p0");
  DeltaInfo d = compute_delta(p0.M, p0.N);
  KreinContext ctx = make_context(build_grid(p0, 400), p0.r, d.delta);

  // disjointly supported pair is orthogonal in every pairing
  RootGroup ga, gb;
  ga.lambda = 1.0;
  ga.vectors.push_back(normalized(ctx, [](double x) {
    return Complex(x < 0.0 ? std::sin(M_PI * x) : 0.0);
  }));
  gb.lambda = 2.0;
  gb.vectors.push_back(normalized(ctx, [](double x) {
    return Complex(x > 0.0 ? std::sin(2.0 * M_PI * x) : 0.0);
  }));
  CHECK(j_orthogonality_report(ctx, {ga, gb}) < 1e-12);

  // single group is vacuous
  CHECK(j_orthogonality_report(ctx, {ga}) == 0.0);
}

TEST_CASE("root vectors of the model problem form a well-conditioned family") {
  ProblemSpec p0 = load("example_p0");
  KreinContext ctx = riesz_context(p0, 1200);

  std::vector<RootGroup> groups = collect_root_vectors(p0, ctx, 40);
  std::vector<SpaceElement> vecs = flatten_groups(groups);
  REQUIRE(vecs.size() >= 40);
  vecs.resize(40);

  // ordered by |lambda| and includes the eigenvalue at the origin
  bool has0 = false;
  for (size_t i = 0; i + 1 < groups.size(); ++i) {
    CHECK(std::abs(groups[i].lambda) <= std::abs(groups[i + 1].lambda) + 1e-9);
    has0 = has0 || std::abs(groups[i].lambda) < 1e-7;
  }
  CHECK(has0);

  GramReport rep = riesz_ratio(ctx, vecs, {10, 20, 40});
  REQUIRE(rep.sections.size() == 3);
  CHECK(rep.sections[2].lambda_min >= 1e-3);
  CHECK(rep.plateau <= 1.5);

  CHECK(j_orthogonality_report(ctx, groups) < 1e-6);
}

TEST_CASE("hypothesis dispatcher on the shipped problems") {
  HypothesisReport r0 = hypothesis_report(load("example_p0"));
  CHECK(r0.criterion == BasisCriterion::TwoEssentialMixed);
  CHECK(r0.k == 2);
  CHECK(r0.definiteness == Definiteness::Indefinite);
  CHECK(r0.conclusion == RieszConclusion::RieszBasisGuaranteed);

  HypothesisReport rr = hypothesis_report(load("example_p0_ramp"));
  CHECK(rr.conclusion == RieszConclusion::NoConclusion);

  HypothesisReport r2 = hypothesis_report(load("example_p2"));
  CHECK(r2.criterion == BasisCriterion::TwoEssentialPositive);
  CHECK(r2.conclusion == RieszConclusion::RieszBasisGuaranteed);

  HypothesisReport r1 = hypothesis_report(load("example_p1"));
  CHECK(r1.criterion == BasisCriterion::OneEssentialLeft);
  CHECK(r1.k == 1);
  CHECK(r1.conclusion == RieszConclusion::RieszBasisGuaranteed);
}

TEST_CASE("orthogonality residual stays controlled when tolerances loosen") {
  ProblemSpec p0 = load("example_p0");
  DeltaInfo d = compute_delta(p0.M, p0.N);
  KreinContext ctx = make_context(build_grid(p0, 500), p0.r, d.delta);

  auto residual = [&](double rel) {
    ProblemSpec p = p0;
    p.tol.ode_rel = rel;
    p.tol.ode_abs = rel * 1e-2;
    std::vector<RootGroup> groups = collect_root_vectors(p, ctx, 6);
    return j_orthogonality_report(ctx, groups);
  };
  double tight = residual(1e-12);
  double loose = residual(1e-11);
  CHECK(tight < 1e-6);
  CHECK(loose < 1e-4);  // degrades roughly with the integrator tolerance
}
