#ifndef KREINSPEC_BOUNDARY_HPP
#define KREINSPEC_BOUNDARY_HPP

#include <string>

#include "kreinspec/numerics.hpp"

namespace kreinspec {

using Mat2x4 = Eigen::Matrix<Complex, 2, 4>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;

// Lagrange concomitant for the boundary vector b(f) = (f(-1), f(1),
// (pf')(-1), (pf')(1)); satisfies Q = Q^{-1} = Q^*.
Mat4 concomitant_q();

struct ValidationReport {
  bool stacked_nonsingular = false;  // [M; N] invertible
  bool isotropy = false;             // M Q M* = 0 and N Q N* = 0
  bool coupling = false;             // i M Q N* self-adjoint and invertible
  double res_mqm = 0.0, res_nqn = 0.0, res_selfadj = 0.0;
  double sigma_min_stack = 0.0, sigma_min_coupling = 0.0;
  bool pass() const { return stacked_nonsingular && isotropy && coupling; }
};

ValidationReport validate_boundary_data(const Mat2x4& M, const Mat2x4& N,
                                        double tol = 1e-10);

enum class Definiteness { Positive, Negative, Indefinite };

struct DeltaInfo {
  Mat2 delta;              // -i (M Q N*)^{-1}, Hermitian
  Mat2 delta_inv;          // entries eta_11, eta_12, conj(eta_12), eta_22
  Complex eta11, eta12;
  double eta22 = 0.0;
  double eta = 0.0;        // max(|eta_11|, |eta_12|)
  double delta1 = 0.0, delta2 = 0.0;  // eigenvalues of |delta|, ascending
  Mat2 sign_delta, abs_delta;
  Definiteness definiteness = Definiteness::Indefinite;
};

DeltaInfo compute_delta(const Mat2x4& M, const Mat2x4& N, double tol = 1e-10);

enum class FormCase { A, B, C };

struct Classification {
  int k = 0;  // essential boundary conditions
  FormCase form_case = FormCase::A;
  Eigen::MatrixXcd Ne, Nn;           // k x 2 and (2-k) x 2, maximal rank
  Mat2x4 M_reduced, N_reduced;       // jointly row-reduced pair
  Complex u{}, v{};                  // case B coupling, |u|^2 + |v|^2 = 1
};

Classification classify(const Mat2x4& M, const Mat2x4& N, double tol = 1e-10);

// Membership predicate for the second component of a form-domain element.
bool form_domain_member(const Classification& cls, Complex f_m1, Complex f_p1,
                        const Eigen::Vector2cd& w, double tol = 1e-8);

} // namespace kreinspec

#endif
