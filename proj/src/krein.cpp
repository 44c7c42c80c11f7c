#include "kreinspec/krein.hpp"

#include <cmath>

namespace kreinspec {

namespace {

void require_size(const KreinContext& ctx, const SpaceElement& a) {
  if (a.fun.size() != ctx.grid.size())
    fail("GridMismatch", "element has " + std::to_string(a.fun.size()) +
                             " values for a grid of " + std::to_string(ctx.grid.size()) +
                             " nodes");
}

} // namespace

KreinContext make_context(Grid grid, CoefficientDescriptor r, const Mat2& delta,
                          double eig_tol) {
  r.validate();
  if ((delta - delta.adjoint()).norm() > eig_tol * std::max(delta.norm(), 1.0))
    fail("NotHermitian", "coupling matrix must be Hermitian");

  KreinContext ctx;
  ctx.grid = std::move(grid);
  ctx.r = std::move(r);
  ctx.delta = delta;

  EigResult eig = herm_eig(delta, eig_tol);
  if (std::min(std::abs(eig.values[0]), std::abs(eig.values[1])) <= eig_tol)
    fail("InvalidBoundaryData", "coupling matrix must be invertible");
  Eigen::Vector2d sgn(eig.values[0] > 0 ? 1.0 : -1.0, eig.values[1] > 0 ? 1.0 : -1.0);
  Eigen::Vector2d ab(std::abs(eig.values[0]), std::abs(eig.values[1]));
  ctx.sign_delta = eig.vectors * sgn.asDiagonal() * eig.vectors.adjoint();
  ctx.abs_delta = eig.vectors * ab.asDiagonal() * eig.vectors.adjoint();

  int n = ctx.grid.size();
  ctx.node_weight_abs_r = Eigen::VectorXd::Zero(n);
  ctx.node_weight = Eigen::VectorXd::Zero(n);
  ctx.panel_wr.reserve(ctx.grid.panels.size());
  for (const Panel& p : ctx.grid.panels) {
    Eigen::VectorXd wr(p.x.size());
    for (size_t j = 0; j < p.x.size(); ++j) {
      // evaluate on the side interior to this panel, so jumps at panel
      // boundaries are resolved consistently
      double side = (p.x[j] <= p.lo) ? +1.0 : (p.x[j] >= p.hi ? -1.0 : 0.0);
      double rv = ctx.r.evaluate(p.x[j], side);
      wr[static_cast<int>(j)] = p.w[j] * rv;
      ctx.node_weight_abs_r[p.g[j]] += p.w[j] * std::abs(rv);
      ctx.node_weight[p.g[j]] += p.w[j];
    }
    ctx.panel_wr.push_back(std::move(wr));
  }
  return ctx;
}

SpaceElement sample(const KreinContext& ctx, const std::function<Complex(double)>& f,
                    const Eigen::Vector2cd& vec) {
  SpaceElement e;
  e.fun.resize(ctx.grid.size());
  for (int i = 0; i < ctx.grid.size(); ++i) e.fun[i] = f(ctx.grid.nodes[i]);
  e.vec = vec;
  return e;
}

Complex inner_krein(const KreinContext& ctx, const SpaceElement& a, const SpaceElement& b) {
  require_size(ctx, a);
  require_size(ctx, b);
  Complex acc = 0.0;
  for (size_t pi = 0; pi < ctx.grid.panels.size(); ++pi) {
    const Panel& p = ctx.grid.panels[pi];
    const Eigen::VectorXd& wr = ctx.panel_wr[pi];
    for (size_t j = 0; j < p.x.size(); ++j)
      acc += wr[static_cast<int>(j)] * a.fun[p.g[j]] * std::conj(b.fun[p.g[j]]);
  }
  return acc + (b.vec.adjoint() * ctx.delta * a.vec).value();
}

Complex inner_hilbert(const KreinContext& ctx, const SpaceElement& a, const SpaceElement& b) {
  require_size(ctx, a);
  require_size(ctx, b);
  Complex acc = 0.0;
  for (int i = 0; i < ctx.grid.size(); ++i)
    acc += ctx.node_weight_abs_r[i] * a.fun[i] * std::conj(b.fun[i]);
  return acc + (b.vec.adjoint() * ctx.abs_delta * a.vec).value();
}

double norm_hilbert(const KreinContext& ctx, const SpaceElement& a) {
  return std::sqrt(std::max(0.0, inner_hilbert(ctx, a, a).real()));
}

SpaceElement apply_J(const KreinContext& ctx, const SpaceElement& a) {
  require_size(ctx, a);
  SpaceElement out;
  out.fun.resize(a.fun.size());
  for (int i = 0; i < ctx.grid.size(); ++i) {
    double x = ctx.grid.nodes[i];
    double side = (x <= -1.0) ? +1.0 : (x >= 1.0 ? -1.0 : (x < 0.0 ? -1.0 : +1.0));
    double rv = ctx.r.evaluate(x, side);
    out.fun[i] = a.fun[i] * (rv < 0 ? -1.0 : 1.0);
  }
  out.vec = ctx.sign_delta * a.vec;
  return out;
}

} // namespace kreinspec
