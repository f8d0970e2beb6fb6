#include "ngsim/linalg.hpp"

#include <fmt/core.h>

#include "ngsim/errors.hpp"

namespace ngs {

Mat symplectic_form(int n) {
    Mat omega = Mat::Zero(2 * n, 2 * n);
    for (int j = 0; j < n; j++) {
        omega(2 * j, 2 * j + 1) = 1.0;
        omega(2 * j + 1, 2 * j) = -1.0;
    }
    return omega;
}

bool is_symplectic(const Mat& S, double tolerance) {
    if (S.rows() != S.cols() || S.rows() % 2 != 0) {
        return false;
    }
    Mat omega = symplectic_form(static_cast<int>(S.rows() / 2));
    double scale = std::max(1.0, S.squaredNorm());
    return (S * omega * S.transpose() - omega).cwiseAbs().maxCoeff() <= tolerance * scale;
}

bool is_unitary(const CMat& U, double tolerance) {
    if (U.rows() != U.cols()) {
        return false;
    }
    return (U.adjoint() * U - CMat::Identity(U.rows(), U.cols())).cwiseAbs().maxCoeff() <= tolerance;
}

double min_eig_uncertainty(const Mat& sigma) {
    int n = static_cast<int>(sigma.rows() / 2);
    CMat h = sigma.cast<cplx>() + I1 * symplectic_form(n).cast<cplx>();
    Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

namespace {

Eigen::LLT<Mat> checked_llt(const Mat& A, const char* what) {
    Eigen::LLT<Mat> llt(A);
    if (llt.info() != Eigen::Success) {
        throw NumericalError(fmt::format("{}: matrix is not positive definite", what));
    }
    double rc = llt.rcond();
    if (!(rc > 1.0 / tol::kappa_max)) {
        throw NumericalError(fmt::format("{}: condition number {:.3e} exceeds limit", what, 1.0 / rc));
    }
    return llt;
}

Eigen::PartialPivLU<CMat> checked_lu(const CMat& A, const char* what) {
    if (A.rows() != A.cols()) {
        throw ValidationError(fmt::format("{}: matrix is not square", what));
    }
    Eigen::PartialPivLU<CMat> lu(A);
    double rc = lu.rcond();
    if (!(rc > 1.0 / tol::kappa_max)) {
        throw NumericalError(fmt::format("{}: matrix is singular or ill-conditioned (rcond {:.3e})", what, rc));
    }
    return lu;
}

}  // namespace

Mat solve_spd(const Mat& A, const Mat& B, const char* what) {
    return checked_llt(A, what).solve(B);
}

Vec solve_spd(const Mat& A, const Vec& b, const char* what) {
    return checked_llt(A, what).solve(b);
}

CMat solve_checked(const CMat& A, const CMat& B, const char* what) {
    return checked_lu(A, what).solve(B);
}

CMat inverse_checked(const CMat& A, const char* what) {
    return checked_lu(A, what).inverse();
}

cplx sqrt_det(const CMat& M) {
    if (M.rows() == 0) {
        return 1.0;
    }
    if (M.rows() == 1) {
        return std::sqrt(M(0, 0));
    }
    Eigen::ComplexEigenSolver<CMat> es(M, false);
    cplx out = 1.0;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); k++) {
        out *= std::sqrt(es.eigenvalues()(k));
    }
    return out;
}

CMat quad_to_ladder(int n) {
    CMat t = CMat::Zero(n, 2 * n);
    double s = 1.0 / std::sqrt(2.0);
    for (int j = 0; j < n; j++) {
        t(j, 2 * j) = s;
        t(j, 2 * j + 1) = I1 * s;
    }
    return t;
}

Vec alpha_to_quadrature(const CVec& alpha) {
    Vec r(2 * alpha.size());
    for (Eigen::Index j = 0; j < alpha.size(); j++) {
        r(2 * j) = std::sqrt(2.0) * alpha(j).real();
        r(2 * j + 1) = std::sqrt(2.0) * alpha(j).imag();
    }
    return r;
}

CVec quadrature_to_alpha(const Vec& r) {
    CVec alpha(r.size() / 2);
    for (Eigen::Index j = 0; j < alpha.size(); j++) {
        alpha(j) = cplx(r(2 * j), r(2 * j + 1)) / std::sqrt(2.0);
    }
    return alpha;
}

Mat embed_modes(const Mat& block, const std::vector<int>& modes, int n) {
    if (block.rows() != 2 * static_cast<Eigen::Index>(modes.size())) {
        throw ValidationError("embed_modes: block size does not match mode list");
    }
    Mat out = Mat::Identity(2 * n, 2 * n);
    for (size_t a = 0; a < modes.size(); a++) {
        if (modes[a] < 0 || modes[a] >= n) {
            throw ValidationError(fmt::format("embed_modes: mode {} out of range", modes[a]));
        }
    }
    for (size_t a = 0; a < modes.size(); a++) {
        for (size_t b = 0; b < modes.size(); b++) {
            out.block<2, 2>(2 * modes[a], 2 * modes[b]) = block.block<2, 2>(2 * a, 2 * b);
        }
    }
    return out;
}

}  // namespace ngs
