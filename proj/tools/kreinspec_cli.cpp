// Command-line front end: parses a problem file, runs the requested stage,
// and writes its artifacts (JSON/CSV, 17 significant digits, deterministic
// across runs and thread counts) into the output directory.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kreinspec/report.hpp"

namespace fs = std::filesystem;
using namespace kreinspec;

namespace {

// Accept a literal path, a path missing its .json suffix, or the bare name
// of a shipped example (searched next to the executable's repo layout and
// in the current directory).
std::string resolve_problem(const std::string& name) {
  std::vector<std::string> candidates = {name, name + ".json",
                                         "problems/" + name,
                                         "problems/" + name + ".json"};
  for (const std::string& c : candidates)
    if (fs::exists(c) && fs::is_regular_file(c)) return c;
  fail("FileError", "cannot find a problem file for '" + name + "'");
  return {};
}

struct Output {
  std::string dir = ".";

  void emit(const std::vector<Artifact>& artifacts) const {
    fs::create_directories(dir);
    for (const Artifact& a : artifacts) {
      std::string path = (fs::path(dir) / a.filename).string();
      write_text_atomic(path, a.text);
      std::printf("%s %s\n", a.pass ? "written" : "FAILED-CLAUSES", path.c_str());
    }
  }
};

std::string diag_json(const std::string& code, const std::string& message) {
  std::string out = "{\"error\":\"";
  out += code;
  out += "\",\"message\":\"";
  for (char c : message) {
    if (c == '"' || c == '\\') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  out += "\"}";
  return out;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "kreinspec: indefinite Sturm-Liouville problems with eigenparameter-"
      "affine boundary conditions -- validation, classification, spectra, "
      "root-vector diagnostics, and operator certification"};
  app.require_subcommand(1);
  // unknown flags anywhere are usage errors, not pass-through arguments
  app.allow_extras(false);

  std::string problem_name, out_dir = ".";
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("problem", problem_name,
                    "problem file (path, path without .json, or problems/<name>)")
        ->required();
    sub->add_option("--out", out_dir, "output directory for artifacts");
    sub->allow_extras(false);
  };

  CLI::App* validate = app.add_subcommand(
      "validate", "check the boundary matrices (rank, isotropy, coupling)");
  add_common(validate);

  CLI::App* classify_cmd = app.add_subcommand(
      "classify", "count essential conditions and classify the coupling");
  add_common(classify_cmd);

  CLI::App* conditions = app.add_subcommand(
      "conditions", "coefficient-condition verdicts with transplant witnesses");
  add_common(conditions);

  CLI::App* spectrum = app.add_subcommand(
      "spectrum", "real eigenvalues on a window (CSV table + JSON summary)");
  add_common(spectrum);
  SpectrumOptions sopt;
  spectrum->add_option("--lmin", sopt.lmin, "window lower edge");
  spectrum->add_option("--lmax", sopt.lmax, "window upper edge");
  spectrum->add_option("--density", sopt.density,
                       "scan points per unit of sqrt|lambda|");
  spectrum->add_option("--complex-window", sopt.complex_halfwidth,
                       "also count zeros in the rectangle with this half-height");

  CLI::App* chain = app.add_subcommand(
      "chain", "multiplicities and the Jordan chain at one eigenvalue");
  add_common(chain);
  double chain_lambda = 0.0;
  std::optional<int> documented;
  chain->add_option("--lambda", chain_lambda, "eigenvalue to probe")->required();
  int documented_raw = -1;
  CLI::Option* doc_opt = chain->add_option(
      "--documented", documented_raw,
      "externally documented algebraic multiplicity to compare against");

  CLI::App* riesz = app.add_subcommand(
      "riesz", "finite-section conditioning of the root-vector family");
  add_common(riesz);
  int nmax = 40;
  riesz->add_option("--nmax", nmax, "number of leading root vectors");

  CLI::App* wverify = app.add_subcommand(
      "wverify", "certify the smoothing-operator construction clause by clause");
  add_common(wverify);
  int min_nodes = 2000;
  std::string forced_case;
  wverify->add_option("--nodes", min_nodes, "minimum grid nodes");
  wverify->add_option("--case", forced_case,
                      "also certify the endpoint coupler built with transplant "
                      "pattern A, B, or C")
      ->check(CLI::IsMember({"A", "B", "C"}));

  CLI::App* report = app.add_subcommand(
      "report", "every stage above with fixed defaults");
  add_common(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    ProblemSpec prob = parse_problem(resolve_problem(problem_name));
    Output out{out_dir};
    std::vector<Artifact> artifacts;

    if (*validate) {
      artifacts.push_back(validation_artifact(prob));
    } else if (*classify_cmd) {
      artifacts.push_back(classification_artifact(prob));
    } else if (*conditions) {
      artifacts.push_back(conditions_artifact(prob));
    } else if (*spectrum) {
      artifacts.push_back(spectrum_csv_artifact(prob, sopt));
      artifacts.push_back(spectrum_json_artifact(prob, sopt));
    } else if (*chain) {
      if (doc_opt->count() > 0) documented = documented_raw;
      artifacts.push_back(chain_artifact(prob, chain_lambda, documented));
    } else if (*riesz) {
      RieszArtifacts rz = riesz_artifacts(prob, nmax);
      artifacts.push_back(rz.csv);
      artifacts.push_back(rz.json);
    } else if (*wverify) {
      std::optional<MixedPattern> forced;
      if (forced_case == "A") forced = MixedPattern::A;
      else if (forced_case == "B") forced = MixedPattern::B;
      else if (forced_case == "C") forced = MixedPattern::C;
      artifacts.push_back(wverify_artifact(prob, min_nodes, forced));
    } else if (*report) {
      artifacts = full_report(prob);
    }

    out.emit(artifacts);
    for (const Artifact& a : artifacts)
      if (!a.pass) return 1;
    return 0;
  } catch (const Error& e) {
    std::cout << diag_json(e.code(), e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cout << diag_json("Internal", e.what()) << "\n";
    return 1;
  }
}
