#include "kreinspec/riesz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kreinspec {

namespace {

void axpy(SpaceElement& a, Complex c, const SpaceElement& b) {
  a.fun -= c * b.fun;
  a.vec -= c * b.vec;
}

void scale(SpaceElement& a, double s) {
  a.fun *= s;
  a.vec *= s;
}

} // namespace

KreinContext riesz_context(const ProblemSpec& prob, int min_nodes) {
  ProblemSpec tuned = prob;
  bool has0 = false;
  for (double g : tuned.grid.graded) has0 = has0 || std::abs(g) < 1e-13;
  if (!has0) tuned.grid.graded.push_back(0.0);
  DeltaInfo delta = compute_delta(prob.M, prob.N);
  return make_context(build_grid(tuned, min_nodes), prob.r, delta.delta);
}

std::vector<RootGroup> collect_root_vectors(const ProblemSpec& prob,
                                            const KreinContext& ctx, int count,
                                            double density) {
  if (count < 1) fail("InvalidInput", "need a positive number of root vectors");

  // pilot window, then one rescale using the sqrt-equidistribution of roots
  double window = 400.0;
  std::vector<RealRoot> roots = find_real_eigenvalues(prob, -window, window, density);
  if (static_cast<int>(roots.size()) < count) {
    double have = std::max<double>(1, roots.size());
    window = std::min(1e6, window * 1.3 * std::pow(count / have, 2.0));
    roots = find_real_eigenvalues(prob, -window, window, density);
  }
  if (static_cast<int>(roots.size()) < count)
    fail("InvalidInput", "eigenvalue window exhausted before enough root vectors");

  std::sort(roots.begin(), roots.end(), [](const RealRoot& a, const RealRoot& b) {
    double aa = std::abs(a.lambda), ab = std::abs(b.lambda);
    return aa != ab ? aa < ab : a.lambda < b.lambda;
  });

  std::vector<RootGroup> groups;
  int total = 0;
  for (const RealRoot& r : roots) {
    if (total >= count) break;
    std::vector<SpaceElement> elems;
    if (std::abs(r.lambda) <= 50.0) {
      // chain extension needs one-sided shooting, which is only reliable
      // while the fundamental system stays within the integrator's accuracy
      Eigen::Vector2cd coeffs = eigenfunction_coefficients(prob, r.lambda);
      RootChain chain = jordan_chain(prob, r.lambda, coeffs);
      elems = root_vector_embed(ctx, chain, prob.N);
    } else {
      // two-sided matched eigenfunction; higher-order chains are not probed
      // at these magnitudes
      MatchedEigenfunction me = matched_eigenfunction(prob, r.lambda);
      SpaceElement e;
      e.fun.resize(ctx.grid.size());
      for (int i = 0; i < ctx.grid.size(); ++i) e.fun[i] = me.f(ctx.grid.nodes[i]);
      e.vec = prob.N * me.b;
      elems.push_back(std::move(e));
    }

    RootGroup group;
    group.lambda = r.lambda;
    // orthonormalize the chain vectors among themselves in the majorant
    for (SpaceElement& e : elems) {
      for (const SpaceElement& q : group.vectors) axpy(e, inner_hilbert(ctx, e, q), q);
      double nrm = norm_hilbert(ctx, e);
      if (nrm < 1e-8) continue;
      scale(e, 1.0 / nrm);
      group.vectors.push_back(std::move(e));
      ++total;
    }
    if (!group.vectors.empty()) groups.push_back(std::move(group));
  }
  return groups;
}

std::vector<SpaceElement> flatten_groups(const std::vector<RootGroup>& groups) {
  std::vector<SpaceElement> out;
  for (const RootGroup& g : groups)
    for (const SpaceElement& e : g.vectors) out.push_back(e);
  return out;
}

Eigen::MatrixXcd gram_matrix(const KreinContext& ctx,
                             const std::vector<SpaceElement>& vectors) {
  int n = static_cast<int>(vectors.size());
  for (const SpaceElement& v : vectors)
    if (std::abs(norm_hilbert(ctx, v) - 1.0) > 1e-8)
      fail("NotNormalized", "Gram input vectors must have unit majorant norm");
  Eigen::MatrixXcd G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = inner_hilbert(ctx, vectors[j], vectors[i]);
  double herm = (G - G.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-10) fail("CertificationFailure", "Gram matrix is not Hermitian");
  return 0.5 * (G + Eigen::MatrixXcd(G.adjoint()));
}

GramReport riesz_ratio(const KreinContext& ctx, const std::vector<SpaceElement>& vectors,
                       const std::vector<int>& sizes) {
  if (vectors.size() < 10)
    fail("InvalidInput", "finite-section diagnostics need at least 10 root vectors");
  GramReport rep;
  Eigen::MatrixXcd G = gram_matrix(ctx, vectors);
  for (int N : sizes) {
    if (N < 1 || N > static_cast<int>(vectors.size())) continue;
    GramSection sec;
    sec.N = N;
    Eigen::VectorXd ev = herm_eig(G.topLeftCorner(N, N)).values;
    sec.lambda_min = ev.minCoeff();
    sec.lambda_max = ev.maxCoeff();
    sec.ratio = sec.lambda_min > 1e-300 ? sec.lambda_max / sec.lambda_min
                                        : std::numeric_limits<double>::infinity();
    rep.sections.push_back(sec);
  }
  size_t m = rep.sections.size();
  rep.plateau = m >= 2 ? rep.sections[m - 1].ratio / rep.sections[m - 2].ratio : 1.0;
  return rep;
}

double j_orthogonality_report(const KreinContext& ctx,
                              const std::vector<RootGroup>& groups, double min_gap) {
  double worst = 0.0;
  for (size_t a = 0; a < groups.size(); ++a)
    for (size_t b = a + 1; b < groups.size(); ++b) {
      if (std::abs(groups[a].lambda - groups[b].lambda) <= min_gap) continue;
      for (const SpaceElement& x : groups[a].vectors)
        for (const SpaceElement& y : groups[b].vectors)
          worst = std::max(worst, std::abs(inner_krein(ctx, x, y)));
    }
  return worst;
}

HypothesisReport hypothesis_report(const ProblemSpec& prob) {
  HypothesisReport rep;
  DeltaInfo delta = compute_delta(prob.M, prob.N);
  Classification cls = classify(prob.M, prob.N);
  rep.k = cls.k;
  rep.definiteness = delta.definiteness;

  // which coefficient conditions the matching gluing construction needs
  bool need_left = false, need_right = false, need_mixed = false;
  if (cls.k == 0) {
    rep.criterion = BasisCriterion::NoEssential;
  } else if (cls.k == 2) {
    switch (delta.definiteness) {
      case Definiteness::Positive:
        rep.criterion = BasisCriterion::TwoEssentialPositive;
        need_left = true;
        break;
      case Definiteness::Negative:
        rep.criterion = BasisCriterion::TwoEssentialNegative;
        need_right = true;
        break;
      case Definiteness::Indefinite:
        rep.criterion = BasisCriterion::TwoEssentialMixed;
        need_left = need_right = need_mixed = true;
        break;
    }
  } else if (cls.k == 1) {
    bool u0 = std::abs(cls.u) < 1e-14, v0 = std::abs(cls.v) < 1e-14;
    if (v0) {
      rep.criterion = BasisCriterion::OneEssentialLeft;
      need_left = true;
    } else if (u0) {
      rep.criterion = BasisCriterion::OneEssentialRight;
      need_right = true;
    } else {
      rep.criterion = BasisCriterion::OneEssentialMixed;
      need_left = need_right = need_mixed = true;
    }
  }

  auto add = [&](const char* name, ConditionKind kind, bool required) {
    HypothesisCheck c;
    c.name = name;
    c.verdict = check_condition(prob.p, prob.r, kind).verdict;
    c.required = required;
    rep.checks.push_back(c);
  };
  add("turning point connection", ConditionKind::At0, true);
  add("left endpoint connection", ConditionKind::AtMinus1, need_left);
  add("right endpoint connection", ConditionKind::AtPlus1, need_right);
  add("endpoint-to-endpoint transplants", ConditionKind::Mixed, need_mixed);

  bool ok = rep.criterion != BasisCriterion::None;
  for (const HypothesisCheck& c : rep.checks)
    if (c.required && c.verdict != Verdict::Satisfied) ok = false;
  rep.conclusion = ok ? RieszConclusion::RieszBasisGuaranteed
                      : RieszConclusion::NoConclusion;
  return rep;
}

const char* to_string(BasisCriterion c) {
  switch (c) {
    case BasisCriterion::NoEssential: return "no-essential-conditions";
    case BasisCriterion::TwoEssentialPositive: return "two-essential-positive-coupling";
    case BasisCriterion::TwoEssentialNegative: return "two-essential-negative-coupling";
    case BasisCriterion::TwoEssentialMixed: return "two-essential-indefinite-coupling";
    case BasisCriterion::OneEssentialLeft: return "one-essential-left-supported";
    case BasisCriterion::OneEssentialRight: return "one-essential-right-supported";
    case BasisCriterion::OneEssentialMixed: return "one-essential-mixed-support";
    case BasisCriterion::None: break;
  }
  return "none";
}

const char* to_string(RieszConclusion c) {
  return c == RieszConclusion::RieszBasisGuaranteed ? "RieszBasisGuaranteed"
                                                    : "NoConclusion";
}

} // namespace kreinspec
