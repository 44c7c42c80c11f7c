#ifndef KREINSPEC_RIESZ_HPP
#define KREINSPEC_RIESZ_HPP

#include <string>
#include <vector>

#include "kreinspec/solver.hpp"

namespace kreinspec {

// --------------------------------------------------------------------------
// Empirical Riesz-basis diagnostics: finite sections of the Gram operator
// of normalized root vectors in the definite majorant inner product, plus a
// dispatcher that checks the hypotheses under which basisness is guaranteed.
// The numerical thresholds (plateau, smallest eigenvalue) are artifact
// conventions: they can only support, never prove, the basis property.
// --------------------------------------------------------------------------

struct RootGroup {
  double lambda = 0.0;
  std::vector<SpaceElement> vectors;  // orthonormal in the majorant
};

// Quadrature context for root-vector diagnostics: panels graded toward the
// turning point, where eigenfunctions at large |lambda| concentrate in
// boundary layers of width ~ 1/sqrt|lambda| that uniform panels of the same
// budget cannot integrate accurately.
KreinContext riesz_context(const ProblemSpec& prob, int min_nodes = 1200);

// Root vectors of the problem ordered by |lambda|: eigenvalues located on
// expanding real windows, a maximal Jordan chain above each, embedded into
// the product space and orthonormalized within each eigenvalue's group.
std::vector<RootGroup> collect_root_vectors(const ProblemSpec& prob,
                                            const KreinContext& ctx, int count,
                                            double density = 100.0);
std::vector<SpaceElement> flatten_groups(const std::vector<RootGroup>& groups);

// G(i,j) = <x_j, x_i> in the majorant; all inputs must be normalized
// (<x,x> = 1 within 1e-8, otherwise NotNormalized). Hermitian within 1e-10
// by construction; the returned matrix is exactly Hermitian (symmetrized).
Eigen::MatrixXcd gram_matrix(const KreinContext& ctx,
                             const std::vector<SpaceElement>& vectors);

struct GramSection {
  int N = 0;
  double lambda_min = 0.0, lambda_max = 0.0;
  double ratio = 0.0;  // lambda_max / lambda_min; infinity when degenerate
};

struct GramReport {
  std::vector<GramSection> sections;  // over increasing N
  double plateau = 0.0;               // ratio at largest N / ratio at half
};

// Finite-section conditioning over the given section sizes (clipped to the
// number of available vectors; needs at least 10).
GramReport riesz_ratio(const KreinContext& ctx, const std::vector<SpaceElement>& vectors,
                       const std::vector<int>& sizes = {10, 20, 40});

// Largest |[x_i, x_j]| in the indefinite product over pairs from groups at
// distinct eigenvalues (inputs are majorant-normalized, so this is already
// the relative residual). Groups closer than `min_gap` in lambda are
// treated as one. Vacuously 0 for a single group.
double j_orthogonality_report(const KreinContext& ctx,
                              const std::vector<RootGroup>& groups,
                              double min_gap = 1e-8);

// Which guarantee pattern applies, keyed by the number of essential
// boundary conditions and the definiteness of the coupling matrix.
enum class BasisCriterion {
  NoEssential,           // k = 0
  TwoEssentialPositive,  // k = 2, coupling positive definite
  TwoEssentialNegative,  // k = 2, coupling negative definite
  TwoEssentialMixed,     // k = 2, coupling indefinite
  OneEssentialLeft,      // k = 1, condition kills the left endpoint value
  OneEssentialRight,     // k = 1, condition kills the right endpoint value
  OneEssentialMixed,     // k = 1, both endpoint values involved
  None
};

enum class RieszConclusion { RieszBasisGuaranteed, NoConclusion };

struct HypothesisCheck {
  std::string name;
  Verdict verdict = Verdict::Unknown;
  bool required = false;
};

struct HypothesisReport {
  BasisCriterion criterion = BasisCriterion::None;
  int k = 0;
  Definiteness definiteness = Definiteness::Indefinite;
  std::vector<HypothesisCheck> checks;  // coefficient condition verdicts
  RieszConclusion conclusion = RieszConclusion::NoConclusion;
};

// Dispatch on (k, coupling definiteness, endpoint support) and check the
// coefficient conditions the corresponding guarantee requires; the
// conclusion is RieszBasisGuaranteed only when every required condition is
// Satisfied with a samplable witness.
HypothesisReport hypothesis_report(const ProblemSpec& prob);

const char* to_string(BasisCriterion c);
const char* to_string(RieszConclusion c);

} // namespace kreinspec

#endif
