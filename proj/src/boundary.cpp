#include "kreinspec/boundary.hpp"

#include <cmath>

namespace kreinspec {

Mat4 concomitant_q() {
  Mat4 q = Mat4::Zero();
  const Complex i(0.0, 1.0);
  q(0, 2) = -i;
  q(1, 3) = i;
  q(2, 0) = i;
  q(3, 1) = -i;
  return q;
}

ValidationReport validate_boundary_data(const Mat2x4& M, const Mat2x4& N, double tol) {
  ValidationReport rep;
  Mat4 Q = concomitant_q();
  double scale = std::max({M.norm(), N.norm(), 1.0});

  Eigen::Matrix<Complex, 4, 4> stack;
  stack << M, N;
  Eigen::JacobiSVD<Mat4> svd_stack(stack);
  rep.sigma_min_stack = svd_stack.singularValues().minCoeff();
  rep.stacked_nonsingular = rep.sigma_min_stack > tol * scale;

  rep.res_mqm = (M * Q * M.adjoint()).norm();
  rep.res_nqn = (N * Q * N.adjoint()).norm();
  rep.isotropy = rep.res_mqm <= tol * scale * scale && rep.res_nqn <= tol * scale * scale;

  Mat2 C = Complex(0.0, 1.0) * M * Q * N.adjoint();  // Q = Q^{-1}
  rep.res_selfadj = (C - C.adjoint()).norm();
  Eigen::JacobiSVD<Mat2> svd_c(C);
  rep.sigma_min_coupling = svd_c.singularValues().minCoeff();
  rep.coupling = rep.res_selfadj <= tol * scale * scale &&
                 rep.sigma_min_coupling > tol * scale * scale;
  return rep;
}

DeltaInfo compute_delta(const Mat2x4& M, const Mat2x4& N, double tol) {
  ValidationReport rep = validate_boundary_data(M, N, tol);
  if (!rep.pass()) fail("InvalidBoundaryData", "boundary matrices fail the admissibility checks");

  DeltaInfo info;
  Mat2 C = M * concomitant_q() * N.adjoint();
  info.delta = Complex(0.0, -1.0) * C.inverse();
  info.delta = 0.5 * (info.delta + info.delta.adjoint()).eval();  // exact Hermitian part

  info.delta_inv = info.delta.inverse();
  info.eta11 = info.delta_inv(0, 0);
  info.eta12 = info.delta_inv(0, 1);
  info.eta22 = info.delta_inv(1, 1).real();
  info.eta = std::max(std::abs(info.eta11), std::abs(info.eta12));

  EigResult eig = herm_eig(info.delta, tol);
  double a0 = std::abs(eig.values[0]), a1 = std::abs(eig.values[1]);
  info.delta1 = std::min(a0, a1);
  info.delta2 = std::max(a0, a1);
  if (info.delta1 <= tol) fail("InvalidBoundaryData", "delta is numerically singular");

  Eigen::Vector2d sgn(eig.values[0] > 0 ? 1.0 : -1.0, eig.values[1] > 0 ? 1.0 : -1.0);
  Eigen::Vector2d abs_vals(a0, a1);
  info.sign_delta = eig.vectors * sgn.asDiagonal() * eig.vectors.adjoint();
  info.abs_delta = eig.vectors * abs_vals.cast<double>().asDiagonal() * eig.vectors.adjoint();
  if (sgn[0] > 0 && sgn[1] > 0)
    info.definiteness = Definiteness::Positive;
  else if (sgn[0] < 0 && sgn[1] < 0)
    info.definiteness = Definiteness::Negative;
  else
    info.definiteness = Definiteness::Indefinite;
  return info;
}

Classification classify(const Mat2x4& M, const Mat2x4& N, double tol) {
  ValidationReport rep = validate_boundary_data(M, N, tol);
  if (!rep.pass()) fail("InvalidBoundaryData", "boundary matrices fail the admissibility checks");

  // joint 2x8 row reduction of [M N], pivoting from the bottom-right corner
  Eigen::Matrix<Complex, 2, 8> A;
  A << M, N;
  double scale = std::max(A.norm(), 1.0);

  int bottom = 1;  // next row (from the bottom) to receive a pivot
  // derivative columns of N first: global columns 7 then 6
  for (int col : {7, 6}) {
    if (bottom < 0) break;
    int pick = -1;
    double best = tol * scale;
    for (int rrow = 0; rrow <= bottom; ++rrow)
      if (std::abs(A(rrow, col)) > best) {
        best = std::abs(A(rrow, col));
        pick = rrow;
      }
    if (pick < 0) continue;
    A.row(pick).swap(A.row(bottom));
    A.row(bottom) /= A(bottom, col);
    for (int rrow = 0; rrow < 2; ++rrow)
      if (rrow != bottom) A.row(rrow) -= A(rrow, col) * A.row(bottom);
    --bottom;
  }
  int k = bottom + 1;  // rows 0..bottom carry no derivative pivot: essential

  // echelon the essential block over the value columns of N (5 then 4)
  int top = k - 1;
  for (int col : {5, 4}) {
    if (top < 0) break;
    int pick = -1;
    double best = tol * scale;
    for (int rrow = 0; rrow <= top; ++rrow)
      if (std::abs(A(rrow, col)) > best) {
        best = std::abs(A(rrow, col));
        pick = rrow;
      }
    if (pick < 0) continue;
    A.row(pick).swap(A.row(top));
    if (k == 2) {
      A.row(top) /= A(top, col);
      for (int rrow = 0; rrow < k; ++rrow)
        if (rrow != top) A.row(rrow) -= A(rrow, col) * A.row(top);
    }
    --top;
  }

  Classification cls;
  cls.k = k;
  cls.M_reduced = A.leftCols<4>();
  cls.N_reduced = A.rightCols<4>();
  cls.form_case = (k == 0) ? FormCase::A : (k == 1 ? FormCase::B : FormCase::C);
  cls.Ne = cls.N_reduced.topLeftCorner(k, 2);
  cls.Nn = cls.N_reduced.bottomRightCorner(2 - k, 2);

  if (k == 1) {
    Complex u = cls.Ne(0, 0), v = cls.Ne(0, 1);
    double nrm = std::sqrt(std::norm(u) + std::norm(v));
    if (nrm <= tol) fail("InvalidBoundaryData", "degenerate essential row");
    u /= nrm;
    v /= nrm;
    Complex lead = std::abs(u) > 1e-12 ? u : v;
    Complex phase = std::conj(lead) / std::abs(lead);
    cls.u = u * phase;
    cls.v = v * phase;
    // keep the reduced pair consistent with the normalized row
    cls.M_reduced.row(0) *= phase / nrm;
    cls.N_reduced.row(0) *= phase / nrm;
    cls.Ne = cls.N_reduced.topLeftCorner(1, 2);
  }
  return cls;
}

bool form_domain_member(const Classification& cls, Complex f_m1, Complex f_p1,
                        const Eigen::Vector2cd& w, double tol) {
  switch (cls.form_case) {
    case FormCase::A:
      return true;
    case FormCase::B:
      return std::abs(w[0] - (cls.u * f_m1 + cls.v * f_p1)) <= tol;
    case FormCase::C:
      return std::abs(w[0] - f_m1) <= tol && std::abs(w[1] - f_p1) <= tol;
  }
  return false;
}

} // namespace kreinspec
