#include "kreinspec/problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace kreinspec {

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  fail("InvalidProblemFile", where + ": " + what);
}

void check_keys(const json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) bad(where, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) bad(where, "unknown key '" + it.key() + "'");
}

double num(const json& v, const std::string& where) {
  if (!v.is_number()) bad(where, "expected a number");
  return v.get<double>();
}

CoefficientDescriptor parse_coef(const json& j, CoefRole role, const std::string& where) {
  check_keys(j, where, {"pieces"});
  if (!j.contains("pieces")) bad(where, "missing 'pieces'");
  CoefficientDescriptor c;
  c.role = role;
  int idx = 0;
  for (const json& pj : j.at("pieces")) {
    std::string pw = where + ".pieces[" + std::to_string(idx++) + "]";
    check_keys(pj, pw, {"interval", "sign", "anchor", "exponent", "poly"});
    CoefPiece pc;
    const json& iv = pj.at("interval");
    if (!iv.is_array() || iv.size() != 2) bad(pw, "'interval' must be [lo, hi]");
    pc.lo = num(iv[0], pw);
    pc.hi = num(iv[1], pw);
    pc.sign = pj.contains("sign") ? num(pj.at("sign"), pw) : 1.0;
    pc.anchor = pj.contains("anchor") ? num(pj.at("anchor"), pw) : 0.0;
    pc.exponent = pj.contains("exponent") ? num(pj.at("exponent"), pw) : 0.0;
    pc.poly.clear();
    if (pj.contains("poly"))
      for (const json& cj : pj.at("poly")) pc.poly.push_back(num(cj, pw + ".poly"));
    if (pc.poly.empty()) pc.poly = {1.0};
    c.pieces.push_back(std::move(pc));
  }
  try {
    c.validate();
  } catch (const Error& e) {
    bad(where, e.what());
  }
  return c;
}

Mat2x4 parse_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) bad(where, "expected 2 rows");
  Mat2x4 m;
  for (int i = 0; i < 2; ++i) {
    const json& row = j[i];
    if (!row.is_array() || row.size() != 4) bad(where, "each row needs 4 entries");
    for (int k = 0; k < 4; ++k) {
      const json& e = row[k];
      if (!e.is_array() || e.size() != 2)
        bad(where, "entries are [re, im] pairs");
      m(i, k) = Complex(num(e[0], where), num(e[1], where));
    }
  }
  return m;
}

void validate_boundary(const ProblemSpec& spec, const std::string& where) {
  ValidationReport rep = validate_boundary_data(spec.M, spec.N, spec.tol.eig_tol);
  if (rep.pass()) return;
  std::string msg = "boundary admissibility failed:";
  if (!rep.coupling)
    msg += " clause 3 (i*M*Q*N^adj self-adjoint and invertible; sigma_min = " +
           std::to_string(rep.sigma_min_coupling) + ");";
  if (!rep.stacked_nonsingular) msg += " clause 1 (stacked [M; N] nonsingular);";
  if (!rep.isotropy) msg += " clause 2 (M Q M^adj = 0 and N Q N^adj = 0);";
  bad(where, msg);
}

ordered emit_coef(const CoefficientDescriptor& c) {
  ordered out;
  out["pieces"] = ordered::array();
  for (const CoefPiece& pc : c.pieces) {
    ordered pj;
    pj["interval"] = {pc.lo, pc.hi};
    pj["sign"] = pc.sign;
    pj["anchor"] = pc.anchor;
    pj["exponent"] = pc.exponent;
    pj["poly"] = pc.poly;
    out["pieces"].push_back(std::move(pj));
  }
  return out;
}

ordered emit_matrix(const Mat2x4& m) {
  ordered out = ordered::array();
  for (int i = 0; i < 2; ++i) {
    ordered row = ordered::array();
    for (int k = 0; k < 4; ++k) row.push_back({m(i, k).real(), m(i, k).imag()});
    out.push_back(std::move(row));
  }
  return out;
}

} // namespace

ProblemSpec parse_problem_text(const std::string& text, const std::string& where) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    bad(where, std::string("syntax error: ") + e.what());
  }
  check_keys(root, where, {"name", "p", "q", "r", "M", "N", "tolerances", "grid"});
  for (const char* key : {"name", "p", "q", "r", "M", "N"})
    if (!root.contains(key)) bad(where, std::string("missing required key '") + key + "'");

  ProblemSpec spec;
  if (!root.at("name").is_string()) bad(where, "'name' must be a string");
  spec.name = root.at("name").get<std::string>();
  spec.p = parse_coef(root.at("p"), CoefRole::P, where + ".p");
  spec.q = parse_coef(root.at("q"), CoefRole::Q, where + ".q");
  spec.r = parse_coef(root.at("r"), CoefRole::R, where + ".r");
  spec.M = parse_matrix(root.at("M"), where + ".M");
  spec.N = parse_matrix(root.at("N"), where + ".N");

  if (root.contains("tolerances")) {
    const json& t = root.at("tolerances");
    check_keys(t, where + ".tolerances",
               {"ode_rel", "ode_abs", "quad_tol", "root_tol", "eig_tol"});
    if (t.contains("ode_rel")) spec.tol.ode_rel = num(t.at("ode_rel"), where);
    if (t.contains("ode_abs")) spec.tol.ode_abs = num(t.at("ode_abs"), where);
    if (t.contains("quad_tol")) spec.tol.quad_tol = num(t.at("quad_tol"), where);
    if (t.contains("root_tol")) spec.tol.root_tol = num(t.at("root_tol"), where);
    if (t.contains("eig_tol")) spec.tol.eig_tol = num(t.at("eig_tol"), where);
    try {
      spec.tol.validate();
    } catch (const Error& e) {
      bad(where + ".tolerances", e.what());
    }
  }
  if (root.contains("grid")) {
    const json& g = root.at("grid");
    check_keys(g, where + ".grid", {"subdiv", "order", "graded"});
    if (g.contains("subdiv")) spec.grid.subdiv = static_cast<int>(num(g.at("subdiv"), where));
    if (g.contains("order")) spec.grid.order = static_cast<int>(num(g.at("order"), where));
    if (g.contains("graded"))
      for (const json& gj : g.at("graded"))
        spec.grid.graded.push_back(num(gj, where + ".grid.graded"));
    if (spec.grid.subdiv < 1 || spec.grid.order < 2)
      bad(where + ".grid", "subdiv >= 1 and order >= 2 required");
  }

  validate_boundary(spec, where);
  return spec;
}

ProblemSpec parse_problem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("FileError", "cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem_text(buf.str(), path);
}

std::string canonical_text(const ProblemSpec& spec) {
  ordered root;
  root["name"] = spec.name;
  root["p"] = emit_coef(spec.p);
  root["q"] = emit_coef(spec.q);
  root["r"] = emit_coef(spec.r);
  root["M"] = emit_matrix(spec.M);
  root["N"] = emit_matrix(spec.N);
  root["tolerances"] = {{"ode_rel", spec.tol.ode_rel},
                        {"ode_abs", spec.tol.ode_abs},
                        {"quad_tol", spec.tol.quad_tol},
                        {"root_tol", spec.tol.root_tol},
                        {"eig_tol", spec.tol.eig_tol}};
  ordered g;
  g["subdiv"] = spec.grid.subdiv;
  g["order"] = spec.grid.order;
  g["graded"] = spec.grid.graded;
  root["grid"] = std::move(g);
  return root.dump(2) + "\n";
}

void write_problem(const ProblemSpec& spec, const std::string& path) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) fail("FileError", "cannot write '" + tmp + "'");
    out << canonical_text(spec);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    fail("FileError", "cannot move '" + tmp + "' into place");
}

Grid build_grid(const ProblemSpec& spec) {
  std::vector<double> bps{-1.0, -0.5, 0.0, 0.5, 1.0};
  std::vector<double> graded = spec.grid.graded;
  for (const CoefficientDescriptor* c : {&spec.p, &spec.q, &spec.r}) {
    for (double b : c->breakpoints()) bps.push_back(b);
    for (const CoefPiece& pc : c->pieces)
      if (pc.exponent != 0.0 && pc.exponent != std::floor(pc.exponent) &&
          pc.anchor >= pc.lo && pc.anchor <= pc.hi)
        graded.push_back(pc.anchor);
  }
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-13; }),
            bps.end());
  return Grid::build(bps, spec.grid.subdiv, spec.grid.order, graded);
}

Grid build_grid(const ProblemSpec& spec, int min_nodes) {
  ProblemSpec tuned = spec;
  for (;;) {
    Grid g = build_grid(tuned);
    if (g.size() >= min_nodes) return g;
    ++tuned.grid.subdiv;
  }
}

} // namespace kreinspec
