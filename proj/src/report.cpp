#include "kreinspec/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace kreinspec {

std::string fmt17(double v) {
  if (!std::isfinite(v)) return v > 0 ? "1e400" : (v < 0 ? "-1e400" : "0");
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_atomic(const std::string& path, const std::string& text) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail("FileError", "cannot open '" + tmp + "' for writing");
    out << text;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    fail("FileError", "cannot move '" + tmp + "' into place");
}

namespace {

std::string jesc(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') { out += "\\n"; continue; }
    out += c;
  }
  return out;
}

// Minimal ordered JSON writer: keys appear exactly in emission order and all
// numbers go through fmt17, which is what makes artifacts byte-stable.
struct JW {
  std::string s;
  std::vector<bool> first;

  void comma() {
    if (!first.empty()) {
      if (!first.back()) s += ',';
      first.back() = false;
    }
  }
  void open_obj() { comma(); s += '{'; first.push_back(true); }
  void close_obj() { s += '}'; first.pop_back(); }
  void open_arr() { comma(); s += '['; first.push_back(true); }
  void close_arr() { s += ']'; first.pop_back(); }
  void key(const char* k) {
    comma();
    s += '"';
    s += k;
    s += "\":";
    // the upcoming value must not emit its own comma
    first.push_back(true);
  }
  void end_key() { first.pop_back(); }

  void num(const char* k, double v) { key(k); s += fmt17(v); end_key(); }
  void integer(const char* k, long v) { key(k); s += std::to_string(v); end_key(); }
  void boolean(const char* k, bool v) { key(k); s += v ? "true" : "false"; end_key(); }
  void str(const char* k, const std::string& v) {
    key(k);
    s += '"' + jesc(v) + '"';
    end_key();
  }
  void cplx(const char* k, Complex v) {
    key(k);
    s += '[' + fmt17(v.real()) + ',' + fmt17(v.imag()) + ']';
    end_key();
  }
  void obj(const char* k) { key(k); s += '{'; first.back() = true; }
  void arr(const char* k) { key(k); s += '['; first.back() = true; }
  void close_key_obj() { s += '}'; end_key(); }
  void close_key_arr() { s += ']'; end_key(); }

  void elem_num(double v) { comma(); s += fmt17(v); }
  void elem_cplx(Complex v) {
    comma();
    s += '[' + fmt17(v.real()) + ',' + fmt17(v.imag()) + ']';
  }

  std::string done() { return s + "\n"; }
};

void emit_mat2(JW& w, const char* k, const Mat2& m) {
  w.arr(k);
  for (int i = 0; i < 2; ++i) {
    w.open_arr();
    for (int j = 0; j < 2; ++j) w.elem_cplx(m(i, j));
    w.close_arr();
  }
  w.close_key_arr();
}

const char* to_string(Definiteness d) {
  switch (d) {
    case Definiteness::Positive: return "positive";
    case Definiteness::Negative: return "negative";
    case Definiteness::Indefinite: return "indefinite";
  }
  return "indefinite";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Satisfied: return "satisfied";
    case Verdict::Violated: return "violated";
    case Verdict::Unknown: return "unknown";
  }
  return "unknown";
}

const char* to_string(FormCase c) {
  switch (c) {
    case FormCase::A: return "a";
    case FormCase::B: return "b";
    case FormCase::C: return "c";
  }
  return "a";
}

const char* to_string(MixedPattern p) {
  switch (p) {
    case MixedPattern::A: return "A";
    case MixedPattern::B: return "B";
    case MixedPattern::C: return "C";
  }
  return "A";
}

const char* to_string(MixedCase c) {
  switch (c) {
    case MixedCase::A: return "A";
    case MixedCase::B: return "B";
    case MixedCase::C: return "C";
    case MixedCase::None: break;
  }
  return "none";
}

void clause(JW& w, const char* name, double measured, double bound, bool le,
            bool& all_pass) {
  bool ok = le ? measured <= bound : measured >= bound;
  all_pass = all_pass && ok;
  w.open_obj();
  w.str("clause", name);
  w.num("measured", measured);
  w.num(le ? "upper_bound" : "lower_bound", bound);
  w.boolean("pass", ok);
  w.close_obj();
}

double refine_eigenvalue(const ProblemSpec& prob, double lambda) {
  for (int it = 0; it < 4; ++it) {
    CharacteristicValue cv = characteristic(prob, lambda);
    if (std::abs(cv.Dprime) < 1e-300) break;
    double step = (cv.D / cv.Dprime).real();
    lambda -= step;
    if (std::abs(step) <= prob.tol.root_tol * (1.0 + std::abs(lambda))) break;
  }
  return lambda;
}

} // namespace

Artifact validation_artifact(const ProblemSpec& prob) {
  ValidationReport rep = validate_boundary_data(prob.M, prob.N);
  JW w;
  w.open_obj();
  w.str("problem", prob.name);
  w.str("artifact", "boundary-data-validation");
  w.boolean("stacked_nonsingular", rep.stacked_nonsingular);
  w.boolean("isotropy", rep.isotropy);
  w.boolean("coupling", rep.coupling);
  w.num("residual_MQM", rep.res_mqm);
  w.num("residual_NQN", rep.res_nqn);
  w.num("residual_selfadjointness", rep.res_selfadj);
  w.num("sigma_min_stacked", rep.sigma_min_stack);
  w.num("sigma_min_coupling", rep.sigma_min_coupling);
  w.num("tolerance", 1e-10);
  w.boolean("pass", rep.pass());
  w.close_obj();
  return {"validate.json", w.done(), rep.pass()};
}

Artifact classification_artifact(const ProblemSpec& prob) {
  Classification cls = classify(prob.M, prob.N);
  DeltaInfo d = compute_delta(prob.M, prob.N);
  JW w;
  w.open_obj();
  w.str("problem", prob.name);
  w.str("artifact", "boundary-condition-classification");
  w.integer("essential_conditions", cls.k);
  w.str("form_case", to_string(cls.form_case));
  w.cplx("u", cls.u);
  w.cplx("v", cls.v);
  emit_mat2(w, "coupling_matrix", d.delta);
  w.str("coupling_definiteness", to_string(d.definiteness));
  w.cplx("eta11", d.eta11);
  w.cplx("eta12", d.eta12);
  w.num("eta22", d.eta22);
  w.num("delta1", d.delta1);
  w.num("delta2", d.delta2);
  w.close_obj();
  return {"classify.json", w.done(), true};
}

Artifact conditions_artifact(const ProblemSpec& prob) {
  JW w;
  w.open_obj();
  w.str("problem", prob.name);
  w.str("artifact", "coefficient-condition-verdicts");
  w.arr("conditions");
  struct Named {
    const char* name;
    ConditionKind kind;
  };
  for (Named n : {Named{"turning_point", ConditionKind::At0},
                  Named{"left_endpoint", ConditionKind::AtMinus1},
                  Named{"right_endpoint", ConditionKind::AtPlus1},
                  Named{"endpoint_to_endpoint", ConditionKind::Mixed}}) {
    ConditionVerdict v = check_condition(prob.p, prob.r, n.kind);
    w.open_obj();
    w.str("condition", n.name);
    w.str("verdict", to_string(v.verdict));
    w.str("mixed_case", to_string(v.mixed_case));
    w.str("justification", v.justification);
    w.arr("witnesses");
    for (const SmoothConnection& c : v.witnesses) {
      w.open_obj();
      w.num("from_point", c.a.point);
      w.integer("from_side", c.a.side);
      w.num("to_point", c.b.point);
      w.integer("to_side", c.b.side);
      w.num("slope_from", c.slope_a);
      w.num("slope_to", c.slope_b);
      w.num("eps", c.eps);
      w.num("rho0", c.rho0);
      w.num("tau", c.tau);
      w.close_obj();
    }
    w.close_key_arr();
    w.close_obj();
  }
  w.close_key_arr();
  w.close_obj();
  return {"conditions.json", w.done(), true};
}

Artifact spectrum_csv_artifact(const ProblemSpec& prob, const SpectrumOptions& opt) {
  std::vector<RealRoot> roots =
      find_real_eigenvalues(prob, opt.lmin, opt.lmax, opt.density);
  std::string csv =
      "index,lambda (real spectral parameter; refined until the Newton step <= "
      "100*root_tol*(1+|lambda|) with root_tol=" +
      fmt17(prob.tol.root_tol) +
      "),located_by (1 = sign change of the characteristic determinant; 0 = "
      "even-order minimum),order_hint\n";
  for (size_t i = 0; i < roots.size(); ++i)
    csv += std::to_string(i) + "," + fmt17(roots[i].lambda) + "," +
           (roots[i].sign_change ? "1" : "0") + "," +
           std::to_string(roots[i].order_hint) + "\n";
  return {"spectrum.csv", csv, true};
}

Artifact spectrum_json_artifact(const ProblemSpec& prob, const SpectrumOptions& opt) {
  std::vector<RealRoot> roots =
      find_real_eigenvalues(prob, opt.lmin, opt.lmax, opt.density);
  int pos = 0, neg = 0, zero = 0;
  for (const RealRoot& r : roots) {
    if (r.lambda > 1e-7) ++pos;
    else if (r.lambda < -1e-7) ++neg;
    else ++zero;
  }
  JW w;
  w.open_obj();
  w.str("problem", prob.name);
  w.str("artifact", "real-spectrum-summary");
  w.num("lmin", opt.lmin);
  w.num("lmax", opt.lmax);
  w.num("scan_density_per_sqrt_unit", opt.density);
  w.integer("count", static_cast<long>(roots.size()));
  w.integer("count_positive", pos);
  w.integer("count_negative", neg);
  w.integer("count_zero", zero);
  if (opt.complex_halfwidth > 0.0) {
    int inside = count_zeros_rect(prob, Complex(opt.lmin, -opt.complex_halfwidth),
                                  Complex(opt.lmax, opt.complex_halfwidth));
    w.num("rectangle_halfwidth", opt.complex_halfwidth);
    w.integer("zeros_in_rectangle", inside);
    w.integer("nonreal_zeros_in_rectangle",
              inside - static_cast<long>(roots.size()));
    w.boolean("completeness_claim", false);
  }
  w.close_obj();
  return {"spectrum.json", w.done(), true};
}

Artifact chain_artifact(const ProblemSpec& prob, double lambda,
                        std::optional<int> documented) {
  double refined = refine_eigenvalue(prob, lambda);
  Multiplicity m = multiplicity(prob, refined);
  Eigen::Vector2cd c0 = eigenfunction_coefficients(prob, refined);
  RootChain chain = jordan_chain(prob, refined, c0);
  JW w;
  w.open_obj();
  w.str("problem", prob.name);
  w.str("artifact", "multiplicity-and-chain-record");
  w.num("lambda_input", lambda);
  w.num("lambda_refined", refined);
  w.integer("geometric_multiplicity", m.geometric);
  w.integer("algebraic_from_determinant_order", m.algebraic_order);
  w.integer("algebraic_from_chain_solvability", m.algebraic_chain);
  w.boolean("methods_agree", m.consistent);
  if (documented) {
    w.integer("documented_algebraic_multiplicity", *documented);
    w.boolean("matches_documented", *documented == m.algebraic_order);
  }
  w.arr("chain");
  for (size_t j = 0; j < chain.fns.size(); ++j) {
    w.open_obj();
    w.integer("index", static_cast<long>(j));
    w.arr("boundary_vector");
    for (int i = 0; i < 4; ++i) w.elem_cplx(chain.fns[j].b[i]);
    w.close_key_arr();
    w.close_obj();
  }
  w.close_key_arr();
  w.close_obj();
  return {"chain.json", w.done(), true};
}

Artifact hypothesis_artifact(const ProblemSpec& prob) {
  HypothesisReport rep = hypothesis_report(prob);
  JW w;
  w.open_obj();
  w.str("problem", prob.name);
  w.str("artifact", "riesz-basis-hypothesis-report");
  w.str("criterion", to_string(rep.criterion));
  w.integer("essential_conditions", rep.k);
  w.str("coupling_definiteness", to_string(rep.definiteness));
  w.arr("checks");
  for (const HypothesisCheck& c : rep.checks) {
    w.open_obj();
    w.str("condition", c.name);
    w.str("verdict", to_string(c.verdict));
    w.boolean("required", c.required);
    w.close_obj();
  }
  w.close_key_arr();
  w.str("conclusion", to_string(rep.conclusion));
  w.boolean("conclusion_is_theorem_backed", true);
  w.close_obj();
  return {"hypothesis.json", w.done(), true};
}

RieszArtifacts riesz_artifacts(const ProblemSpec& prob, int nmax) {
  if (nmax < 10) fail("InvalidInput", "finite sections need at least 10 root vectors");
  KreinContext ctx = riesz_context(prob);
  std::vector<RootGroup> groups = collect_root_vectors(prob, ctx, nmax);
  std::vector<SpaceElement> vecs = flatten_groups(groups);
  if (static_cast<int>(vecs.size()) > nmax) vecs.resize(nmax);
  std::vector<int> sizes{10, nmax / 2, nmax};
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  GramReport rep = riesz_ratio(ctx, vecs, sizes);
  double jorth = j_orthogonality_report(ctx, groups);

  std::string csv =
      "N (leading root vectors ordered by |lambda|),lambda_min (smallest "
      "eigenvalue of the N x N Gram matrix in the definite majorant; inputs "
      "normalized to 1 within 1e-08),lambda_max (largest eigenvalue),ratio "
      "(lambda_max/lambda_min; empirical convention: bounded sections suggest "
      "a Riesz basis but never prove it)\n";
  for (const GramSection& s : rep.sections)
    csv += std::to_string(s.N) + "," + fmt17(s.lambda_min) + "," +
           fmt17(s.lambda_max) + "," + fmt17(s.ratio) + "\n";

  Artifact hyp = hypothesis_artifact(prob);
  // splice the empirical summary into the hypothesis report
  JW w;
  w.open_obj();
  w.str("problem", prob.name);
  w.str("artifact", "riesz-basis-report");
  w.key("hypotheses");
  w.s += hyp.text.substr(0, hyp.text.size() - 1);  // strip trailing newline
  w.end_key();
  w.obj("empirical");
  w.integer("root_vectors", static_cast<long>(vecs.size()));
  w.num("lambda_min_full_section", rep.sections.back().lambda_min);
  w.num("plateau", rep.plateau);
  w.num("j_orthogonality_residual", jorth);
  w.num("plateau_convention", 1.5);
  w.num("lambda_min_convention", 1e-3);
  w.boolean("conventions_are_artifact_choices", true);
  w.close_key_obj();
  w.close_obj();
  return {{"riesz.csv", csv, true}, {"riesz.json", w.done(), true}};
}

Artifact wverify_artifact(const ProblemSpec& prob, int min_nodes,
                          std::optional<MixedPattern> forced) {
  WVerification res = verify_smoothing(prob, min_nodes);
  JW w;
  w.open_obj();
  w.str("problem", prob.name);
  w.str("artifact", "smoothing-operator-certification");
  w.integer("nodes", res.nodes);
  w.obj("constants");
  w.num("alpha", res.constants.alpha);
  w.num("kappa", res.constants.kappa);
  w.num("c", res.constants.c);
  w.num("gamma", res.constants.gamma);
  w.num("eta", res.constants.eta);
  w.num("delta1", res.constants.delta1);
  w.num("delta2", res.constants.delta2);
  w.num("weight_l1_norm", res.constants.r_norm1);
  w.close_key_obj();
  bool all = true;
  w.arr("clauses");
  clause(w, "smoothing_norm", res.k_norm, res.k_norm_bound, true, all);
  clause(w, "kernel_hermiticity", res.k_hermiticity, 1e-12, true, all);
  clause(w, "kernel_zero_trace", res.k_zero_trace, 1e-8, true, all);
  clause(w, "rank_one_trace_identity", res.k_boundary_identity, 1e-6, true, all);
  clause(w, "boundary_block_norm", res.z_norm, res.z_norm_bound, true, all);
  clause(w, "form_min_eigenvalue", res.min_eig, res.min_eig_bound, false, all);
  clause(w, "coupling_identity", res.coupling_residual, 1e-6, true, all);
  clause(w, "endpoint_action_deviation", res.w01_action_deviation, 1e-6, true, all);
  clause(w, "endpoint_form_min_eigenvalue", res.w01_min_eig, 1.0 - 1e-6, false, all);
  w.close_key_arr();
  if (forced) {
    DeltaInfo d = compute_delta(prob.M, prob.N);
    KreinContext ctx = make_context(build_aligned_grid(prob, 500), prob.r, d.delta);
    PanelSpace ps = make_panel_space(ctx);
    Mat2 b;
    b << Complex(0.25, 0.5), Complex(-0.5, 0.125), Complex(0.75, -0.25), Complex(1.0, 0.0);
    GridOperator g = assemble_Ws1(ctx, ps, prob, b, forced);
    w.obj("forced_pattern");
    w.str("pattern", to_string(*forced));
    w.num("action_deviation", g.action.deviation);
    w.num("form_min_eigenvalue", g.min_eig);
    w.boolean("pass", g.action.deviation < 1e-6 && g.min_eig >= 1.0 - 1e-6);
    w.close_key_obj();
    all = all && g.action.deviation < 1e-6 && g.min_eig >= 1.0 - 1e-6;
  }
  w.boolean("pass", all && res.pass);
  w.close_obj();
  return {"wverify.json", w.done(), all && res.pass};
}

std::vector<Artifact> full_report(const ProblemSpec& prob) {
  std::vector<Artifact> out;
  out.push_back(validation_artifact(prob));
  out.push_back(classification_artifact(prob));
  out.push_back(conditions_artifact(prob));
  SpectrumOptions opt;
  out.push_back(spectrum_csv_artifact(prob, opt));
  out.push_back(spectrum_json_artifact(prob, opt));

  // chain record at the eigenvalue of smallest magnitude, when one exists
  std::vector<RealRoot> roots = find_real_eigenvalues(prob, opt.lmin, opt.lmax, opt.density);
  if (!roots.empty()) {
    const RealRoot* best = &roots.front();
    for (const RealRoot& r : roots)
      if (std::abs(r.lambda) < std::abs(best->lambda)) best = &r;
    out.push_back(chain_artifact(prob, best->lambda));
  } else {
    out.push_back({"chain.json",
                   "{\"problem\":\"" + jesc(prob.name) +
                       "\",\"skipped\":true,\"reason\":\"no real eigenvalue inside "
                       "the default window\"}\n",
                   true});
  }

  RieszArtifacts rz = riesz_artifacts(prob, 12);
  out.push_back(rz.csv);
  out.push_back(rz.json);

  try {
    out.push_back(wverify_artifact(prob, 700));
  } catch (const Error& e) {
    if (std::string(e.code()) != "WrongCase" && std::string(e.code()) != "HypothesisNotMet")
      throw;
    out.push_back({"wverify.json",
                   "{\"problem\":\"" + jesc(prob.name) +
                       "\",\"skipped\":true,\"reason\":\"" + jesc(e.what()) + "\"}\n",
                   true});
  }
  return out;
}

} // namespace kreinspec
