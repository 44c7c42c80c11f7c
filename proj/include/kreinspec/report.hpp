#ifndef KREINSPEC_REPORT_HPP
#define KREINSPEC_REPORT_HPP

#include <optional>
#include <string>
#include <vector>

#include "kreinspec/riesz.hpp"
#include "kreinspec/wconstruct.hpp"

namespace kreinspec {

// --------------------------------------------------------------------------
// Deterministic artifact emission. Every floating-point number is printed
// with 17 significant digits, key and column order is fixed, and nothing
// time- or path-dependent enters the text, so artifacts are byte-identical
// across runs and thread counts. CSV artifacts carry a single header row
// naming the units and the tolerances that produced each column.
// --------------------------------------------------------------------------

// %.17g rendering used by every artifact.
std::string fmt17(double v);

// Write-to-temporary-then-rename so readers never observe a partial file.
void write_text_atomic(const std::string& path, const std::string& text);

struct Artifact {
  std::string filename;  // suggested name inside the output directory
  std::string text;      // full file content
  bool pass = true;      // false only when a certification clause failed
};

// Boundary-data validation (stacked rank, isotropy, coupling residuals).
Artifact validation_artifact(const ProblemSpec& prob);

// Essential-condition count, form case, coupling matrix and its spectrum.
Artifact classification_artifact(const ProblemSpec& prob);

// Coefficient-condition verdicts for all four connection kinds, with the
// transplant witnesses backing each Satisfied verdict.
Artifact conditions_artifact(const ProblemSpec& prob);

struct SpectrumOptions {
  double lmin = -100.0;
  double lmax = 100.0;
  double density = 400.0;           // scan points per unit of sqrt|lambda|
  double complex_halfwidth = 0.0;   // > 0: also count zeros in the rectangle
};

// Real eigenvalue table (CSV) and a summary (JSON, includes the rectangle
// count when requested).
Artifact spectrum_csv_artifact(const ProblemSpec& prob, const SpectrumOptions& opt);
Artifact spectrum_json_artifact(const ProblemSpec& prob, const SpectrumOptions& opt);

// Multiplicity and Jordan-chain record at one eigenvalue. When `documented`
// is given, the artifact records that externally documented algebraic
// multiplicity next to both computed ones and flags agreement or mismatch.
Artifact chain_artifact(const ProblemSpec& prob, double lambda,
                        std::optional<int> documented = std::nullopt);

// Finite-section conditioning table (CSV) over the first `nmax` root
// vectors plus the hypothesis-dispatcher report with the empirical summary
// (JSON). Computed together since both need the root-vector family.
struct RieszArtifacts {
  Artifact csv, json;
};
RieszArtifacts riesz_artifacts(const ProblemSpec& prob, int nmax);

// Dispatcher report alone (cheap: no root vectors are computed).
Artifact hypothesis_artifact(const ProblemSpec& prob);

// Smoothing-operator certification; fails the artifact when a clause fails.
// `forced` additionally certifies the endpoint operator built with the
// stated off-diagonal transplant pattern.
Artifact wverify_artifact(const ProblemSpec& prob, int min_nodes = 2000,
                          std::optional<MixedPattern> forced = std::nullopt);

// Every stage above with fixed defaults; stages that do not apply to the
// problem (wrong essential-condition count, no eigenvalue near the chain
// probe) are recorded as skipped rather than failed.
std::vector<Artifact> full_report(const ProblemSpec& prob);

} // namespace kreinspec

#endif
