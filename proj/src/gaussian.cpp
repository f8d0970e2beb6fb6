#include "ngsim/gaussian.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "ngsim/errors.hpp"
#include "ngsim/symplectic.hpp"

namespace ngs {

namespace {

void check_dims(const Mat& cov, const Vec& mean, const char* what) {
    if (mean.size() == 0 || mean.size() % 2 != 0) {
        throw ValidationError(fmt::format("{}: mean length must be even and positive", what));
    }
    if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
        throw ValidationError(fmt::format("{}: covariance is {}x{}, expected {}x{}", what, cov.rows(),
                                          cov.cols(), mean.size(), mean.size()));
    }
}

double vacuum_fidelity(const Mat& cov, const Vec& mean) {
    int n = static_cast<int>(mean.size() / 2);
    Mat s = cov + Mat::Identity(2 * n, 2 * n);
    Vec x = solve_spd(s, mean, "vacuum fidelity");
    return std::pow(2.0, n) * std::exp(-mean.dot(x)) / std::sqrt(s.determinant());
}

}  // namespace

void GaussianMixed::validate() const {
    check_dims(cov, mean, "GaussianMixed");
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > tol::psd * std::max(1.0, cov.cwiseAbs().maxCoeff())) {
        throw ValidationError("GaussianMixed: covariance is not symmetric");
    }
    if (min_eig_uncertainty(cov) < -tol::psd * std::max(1.0, cov.norm())) {
        throw ValidationError("GaussianMixed: covariance violates the uncertainty relation");
    }
}

GaussianMixed GaussianMixed::vacuum(int n) {
    return {Mat::Identity(2 * n, 2 * n), Vec::Zero(2 * n)};
}

GaussianMixed GaussianMixed::thermal(int n, double nbar) {
    if (nbar < 0) {
        throw ValidationError("thermal: negative mean photon number");
    }
    return {(2 * nbar + 1) * Mat::Identity(2 * n, 2 * n), Vec::Zero(2 * n)};
}

bool is_pure(const Mat& cov, double tolerance) {
    int n = static_cast<int>(cov.rows() / 2);
    Mat omega = symplectic_form(n);
    double scale = std::max(1.0, cov.squaredNorm());
    return (cov * omega * cov.transpose() - omega).cwiseAbs().maxCoeff() <= tolerance * scale;
}

void pure_stellar_ab(const Mat& cov, const Vec& mean, CMat& A, CVec& b) {
    int n = static_cast<int>(mean.size() / 2);
    CMat t = quad_to_ladder(n);
    CMat c = 0.5 * (cov.cast<cplx>() + I1 * symplectic_form(n).cast<cplx>());
    CMat m = t * c * t.transpose();
    CMat nn = t * c * t.adjoint();
    A = solve_checked(nn, m, "stellar parameters").transpose();
    A = 0.5 * (A + A.transpose()).eval();
    CVec a = t * mean.cast<cplx>();
    b = a - A * a.conjugate();
}

GaussianPure::GaussianPure(Mat cov, Vec mean, cplx ref_overlap)
    : cov_(std::move(cov)), mean_(std::move(mean)), ref_(ref_overlap) {
    check_dims(cov_, mean_, "GaussianPure");
    if (!std::isfinite(ref_.real()) || !std::isfinite(ref_.imag())) {
        throw NumericalError("GaussianPure: reference overlap is not finite");
    }
    cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
    if (!is_pure(cov_)) {
        throw ValidationError("GaussianPure: covariance is not pure (sigma Omega sigma != Omega)");
    }
    double f = std::sqrt(vacuum_fidelity(cov_, mean_));
    if (std::abs(std::abs(ref_) - f) > tol::phase * (1e-2 + f)) {
        throw ValidationError(fmt::format("GaussianPure: |<0|G>| = {:.12g} inconsistent with covariance ({:.12g})",
                                          std::abs(ref_), f));
    }
    pure_stellar_ab(cov_, mean_, A_, b_);
}

GaussianPure GaussianPure::vacuum(int n) {
    return GaussianPure(Mat::Identity(2 * n, 2 * n), Vec::Zero(2 * n), 1.0);
}

GaussianPure GaussianPure::coherent(const CVec& alpha) {
    int n = static_cast<int>(alpha.size());
    return GaussianPure(Mat::Identity(2 * n, 2 * n), alpha_to_quadrature(alpha),
                        std::exp(-0.5 * alpha.squaredNorm()));
}

GaussianPure GaussianPure::coherent(cplx alpha) {
    CVec a(1);
    a(0) = alpha;
    return coherent(a);
}

GaussianPure GaussianPure::squeezed_coherent(cplx alpha, cplx xi) {
    double r = std::abs(xi);
    cplx e = r > 0 ? xi / r : cplx(1.0);
    Mat s = squeeze_matrix(xi);
    CVec a(1);
    a(0) = alpha;
    cplx o = std::exp(-0.5 * (std::norm(alpha) + std::conj(alpha) * std::conj(alpha) * e * std::tanh(r))) /
             std::sqrt(std::cosh(r));
    return GaussianPure(s * s.transpose(), alpha_to_quadrature(a), o);
}

GaussianPure GaussianPure::with_phase(cplx phase) const {
    GaussianPure out = *this;
    out.ref_ *= phase;
    return out;
}

cplx GaussianPure::coherent_amplitude(const CVec& beta) const {
    if (beta.size() != modes()) {
        throw ValidationError("coherent_amplitude: outcome dimension mismatch");
    }
    CVec z = beta.conjugate();
    cplx e = -0.5 * beta.squaredNorm() + (b_.transpose() * z)(0) + 0.5 * (z.transpose() * A_ * z)(0);
    return ref_ * std::exp(e);
}

double GaussianPure::mean_photon_number() const {
    return 0.25 * cov_.trace() - 0.5 * modes() + 0.5 * mean_.squaredNorm();
}

void GaussianChannel::validate() const {
    Eigen::Index d = X.rows();
    if (X.cols() != d || Y.rows() != d || Y.cols() != d || D.size() != d || d % 2 != 0) {
        throw ValidationError("GaussianChannel: inconsistent dimensions");
    }
    int n = static_cast<int>(d / 2);
    CMat omega = symplectic_form(n).cast<cplx>();
    CMat xc = X.cast<cplx>();
    CMat h = Y.cast<cplx>() + I1 * omega - I1 * xc * omega * xc.transpose();
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol::psd * std::max(1.0, Y.norm())) {
        throw ValidationError("GaussianChannel: Y + i Omega - i X Omega X^T is not positive semidefinite");
    }
}

GaussianChannel GaussianChannel::identity(int n) {
    return {Mat::Identity(2 * n, 2 * n), Mat::Zero(2 * n, 2 * n), Vec::Zero(2 * n)};
}

GaussianChannel GaussianChannel::classical_noise(int n, double nbar) {
    return {Mat::Identity(2 * n, 2 * n), 2 * nbar * Mat::Identity(2 * n, 2 * n), Vec::Zero(2 * n)};
}

GaussianChannel GaussianChannel::pure_loss(int n, double eta) {
    if (eta < 0 || eta > 1) {
        throw ValidationError("pure_loss: transmissivity outside [0,1]");
    }
    return {std::sqrt(eta) * Mat::Identity(2 * n, 2 * n), (1 - eta) * Mat::Identity(2 * n, 2 * n),
            Vec::Zero(2 * n)};
}

GeneralDyne GeneralDyne::heterodyne(std::vector<int> modes) {
    Eigen::Index k = static_cast<Eigen::Index>(modes.size());
    return {Mat::Identity(2 * k, 2 * k), std::move(modes)};
}

GeneralDyne GeneralDyne::homodyne(std::vector<int> modes, bool measure_q, double z) {
    Eigen::Index k = static_cast<Eigen::Index>(modes.size());
    Mat m = Mat::Zero(2 * k, 2 * k);
    for (Eigen::Index j = 0; j < k; j++) {
        m(2 * j, 2 * j) = measure_q ? 1.0 / (z * z) : z * z;
        m(2 * j + 1, 2 * j + 1) = measure_q ? z * z : 1.0 / (z * z);
    }
    return {m, std::move(modes)};
}

GaussianMixed displace(const GaussianMixed& state, const Vec& shift) {
    if (shift.size() != state.mean.size()) {
        throw ValidationError("displace: dimension mismatch");
    }
    return {state.cov, state.mean + shift};
}

GaussianMixed apply_symplectic(const GaussianMixed& state, const Mat& S) {
    if (S.rows() != state.mean.size() || S.cols() != state.mean.size()) {
        throw ValidationError("apply_symplectic: dimension mismatch");
    }
    if (!is_symplectic(S)) {
        throw ValidationError("apply_symplectic: matrix is not symplectic");
    }
    Mat c = S * state.cov * S.transpose();
    return {0.5 * (c + c.transpose()), S * state.mean};
}

GaussianMixed tensor(const GaussianMixed& a, const GaussianMixed& b) {
    Eigen::Index na = a.mean.size();
    Eigen::Index nb = b.mean.size();
    GaussianMixed out{Mat::Zero(na + nb, na + nb), Vec(na + nb)};
    out.cov.topLeftCorner(na, na) = a.cov;
    out.cov.bottomRightCorner(nb, nb) = b.cov;
    out.mean << a.mean, b.mean;
    return out;
}

GaussianPure tensor(const GaussianPure& a, const GaussianPure& b) {
    GaussianMixed m = tensor(a.mixed(), b.mixed());
    return GaussianPure(m.cov, m.mean, a.ref_overlap() * b.ref_overlap());
}

std::vector<int> complement_modes(const std::vector<int>& modes, int n) {
    std::vector<bool> used(n, false);
    for (int m : modes) {
        if (m < 0 || m >= n) {
            throw ValidationError(fmt::format("mode index {} out of range [0,{})", m, n));
        }
        if (used[m]) {
            throw ValidationError(fmt::format("mode index {} repeated", m));
        }
        used[m] = true;
    }
    std::vector<int> out;
    for (int j = 0; j < n; j++) {
        if (!used[j]) {
            out.push_back(j);
        }
    }
    return out;
}

Vec select_modes(const Vec& v, const std::vector<int>& modes) {
    Vec out(2 * modes.size());
    for (size_t a = 0; a < modes.size(); a++) {
        out(2 * a) = v(2 * modes[a]);
        out(2 * a + 1) = v(2 * modes[a] + 1);
    }
    return out;
}

Mat select_modes(const Mat& m, const std::vector<int>& rows, const std::vector<int>& cols) {
    Mat out(2 * rows.size(), 2 * cols.size());
    for (size_t a = 0; a < rows.size(); a++) {
        for (size_t b = 0; b < cols.size(); b++) {
            out.block<2, 2>(2 * a, 2 * b) = m.block<2, 2>(2 * rows[a], 2 * cols[b]);
        }
    }
    return out;
}

GaussianMixed partial_trace(const GaussianMixed& state, const std::vector<int>& keep) {
    complement_modes(keep, state.modes());
    if (keep.empty()) {
        throw ValidationError("partial_trace: nothing kept");
    }
    return {select_modes(state.cov, keep, keep), select_modes(state.mean, keep)};
}

GaussianMixed apply_channel(const GaussianMixed& state, const GaussianChannel& ch) {
    if (ch.X.rows() != state.mean.size()) {
        throw ValidationError("apply_channel: dimension mismatch");
    }
    ch.validate();
    Mat c = ch.X * state.cov * ch.X.transpose() + ch.Y;
    return {0.5 * (c + c.transpose()), ch.X * state.mean + ch.D};
}

GaussianChannel compose_channels(const GaussianChannel& first, const GaussianChannel& second) {
    return {second.X * first.X, second.X * first.Y * second.X.transpose() + second.Y,
            second.X * first.D + second.D};
}

double generaldyne_density(const GaussianMixed& state, const GeneralDyne& meas, const Vec& outcome) {
    complement_modes(meas.modes, state.modes());
    Eigen::Index k = static_cast<Eigen::Index>(meas.modes.size());
    if (outcome.size() != 2 * k || meas.cov_m.rows() != 2 * k) {
        throw ValidationError("generaldyne_density: outcome dimension does not match measured modes");
    }
    Mat s = select_modes(state.cov, meas.modes, meas.modes) + meas.cov_m;
    Vec d = outcome - select_modes(state.mean, meas.modes);
    Vec x = solve_spd(s, d, "generaldyne_density");
    return std::exp(-d.dot(x)) / (std::pow(M_PI, static_cast<double>(k)) * std::sqrt(s.determinant()));
}

double homodyne_density(const GaussianMixed& state, const std::vector<int>& modes, const Vec& x,
                        bool measure_q) {
    complement_modes(modes, state.modes());
    Eigen::Index k = static_cast<Eigen::Index>(modes.size());
    if (x.size() != k) {
        throw ValidationError("homodyne_density: outcome dimension mismatch");
    }
    int off = measure_q ? 0 : 1;
    Mat s(k, k);
    Vec d(k);
    for (Eigen::Index a = 0; a < k; a++) {
        d(a) = x(a) - state.mean(2 * modes[a] + off);
        for (Eigen::Index b = 0; b < k; b++) {
            s(a, b) = state.cov(2 * modes[a] + off, 2 * modes[b] + off);
        }
    }
    Vec y = solve_spd(s, d, "homodyne_density");
    return std::exp(-d.dot(y)) / (std::pow(M_PI, 0.5 * k) * std::sqrt(s.determinant()));
}

GaussianMixed condition_on_generaldyne(const GaussianMixed& state, const GeneralDyne& meas, const Vec& outcome) {
    std::vector<int> rest = complement_modes(meas.modes, state.modes());
    Eigen::Index k = static_cast<Eigen::Index>(meas.modes.size());
    if (outcome.size() != 2 * k || meas.cov_m.rows() != 2 * k) {
        throw ValidationError("condition_on_generaldyne: outcome dimension does not match measured modes");
    }
    if (rest.empty()) {
        throw ValidationError("condition_on_generaldyne: all modes measured");
    }
    Mat sa = select_modes(state.cov, rest, rest);
    Mat sab = select_modes(state.cov, rest, meas.modes);
    Mat sb = select_modes(state.cov, meas.modes, meas.modes) + meas.cov_m;
    Vec d = outcome - select_modes(state.mean, meas.modes);
    Mat gain = solve_spd(sb, Mat(sab.transpose()), "condition_on_generaldyne").transpose();
    Mat c = sa - gain * sab.transpose();
    Vec mean = select_modes(state.mean, rest) + gain * d;
    return {0.5 * (c + c.transpose()), mean};
}

double fidelity_pure(const GaussianMixed& rho, const GaussianMixed& phi) {
    if (rho.mean.size() != phi.mean.size()) {
        throw ValidationError("fidelity_pure: dimension mismatch");
    }
    int n = rho.modes();
    Mat s = rho.cov + phi.cov;
    Vec d = rho.mean - phi.mean;
    Vec x = solve_spd(s, d, "fidelity_pure");
    return std::pow(2.0, n) * std::exp(-d.dot(x)) / std::sqrt(s.determinant());
}

double fidelity_pure(const GaussianMixed& rho, const GaussianPure& phi) {
    return fidelity_pure(rho, phi.mixed());
}

double mean_photon_number(const GaussianMixed& state) {
    return 0.25 * state.cov.trace() - 0.5 * state.modes() + 0.5 * state.mean.squaredNorm();
}

}  // namespace ngs
