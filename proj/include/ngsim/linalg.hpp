#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace ngs {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr cplx I1{0.0, 1.0};

namespace tol {
inline constexpr double psd = 1e-9;
inline constexpr double pure = 1e-9;
inline constexpr double sympl = 1e-9;
inline constexpr double unitary = 1e-9;
inline constexpr double decomp = 1e-10;
inline constexpr double kappa_max = 1e12;
inline constexpr double ref = 1e-12;
inline constexpr double phase = 1e-8;
}  // namespace tol

// Block-diagonal symplectic form, quadrature order (q1, p1, ..., qn, pn).
Mat symplectic_form(int n);

bool is_symplectic(const Mat& S, double tolerance = tol::sympl);
bool is_unitary(const CMat& U, double tolerance = tol::unitary);

// Smallest eigenvalue of the Hermitian matrix sigma + i*Omega.
double min_eig_uncertainty(const Mat& sigma);

// Solve A X = B for symmetric positive definite A. Throws NumericalError when
// A is not positive definite or its condition number exceeds kappa_max.
Mat solve_spd(const Mat& A, const Mat& B, const char* what);
Vec solve_spd(const Mat& A, const Vec& b, const char* what);

// General complex solve with conditioning check.
CMat solve_checked(const CMat& A, const CMat& B, const char* what);
CMat inverse_checked(const CMat& A, const char* what);

// Product of principal square roots of the eigenvalues. Equals the analytic
// continuation of sqrt(det) whenever all eigenvalues have positive real part.
cplx sqrt_det(const CMat& M);

// Rows (e_q + i e_p)/sqrt(2) per mode: maps quadratures to annihilation operators.
CMat quad_to_ladder(int n);

// Complex amplitude vector alpha -> quadrature mean sqrt(2)(Re, Im) interleaved.
Vec alpha_to_quadrature(const CVec& alpha);
CVec quadrature_to_alpha(const Vec& r);

// Embed a 2x2 (or 4x4) block acting on the listed modes into a 2n x 2n identity.
Mat embed_modes(const Mat& block, const std::vector<int>& modes, int n);

}  // namespace ngs
