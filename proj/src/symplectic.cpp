#include "ngsim/symplectic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/core.h>

#include "ngsim/errors.hpp"

namespace ngs {

Mat squeeze_matrix(cplx xi) {
    double r = std::abs(xi);
    double phi = std::arg(xi);
    double ch = std::cosh(r);
    double sh = std::sinh(r);
    Mat s(2, 2);
    s << ch - std::cos(phi) * sh, -std::sin(phi) * sh, -std::sin(phi) * sh, ch + std::cos(phi) * sh;
    return s;
}

Mat rotation_matrix(double theta) {
    Mat s(2, 2);
    s << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return s;
}

Mat symplectic_from_bogoliubov(const CMat& u, const CMat& v) {
    Eigen::Index n = u.rows();
    Mat s(2 * n, 2 * n);
    CMat plus = u + v;
    CMat minus = u - v;
    for (Eigen::Index j = 0; j < n; j++) {
        for (Eigen::Index k = 0; k < n; k++) {
            s(2 * j, 2 * k) = plus(j, k).real();
            s(2 * j, 2 * k + 1) = -minus(j, k).imag();
            s(2 * j + 1, 2 * k) = plus(j, k).imag();
            s(2 * j + 1, 2 * k + 1) = minus(j, k).real();
        }
    }
    return s;
}

void bogoliubov_from_symplectic(const Mat& S, CMat& u, CMat& v) {
    Eigen::Index n = S.rows() / 2;
    u.resize(n, n);
    v.resize(n, n);
    for (Eigen::Index j = 0; j < n; j++) {
        for (Eigen::Index k = 0; k < n; k++) {
            double qq = S(2 * j, 2 * k);
            double qp = S(2 * j, 2 * k + 1);
            double pq = S(2 * j + 1, 2 * k);
            double pp = S(2 * j + 1, 2 * k + 1);
            u(j, k) = 0.5 * cplx(qq + pp, pq - qp);
            v(j, k) = 0.5 * cplx(qq - pp, pq + qp);
        }
    }
}

Mat passive_from_unitary(const CMat& W) {
    if (!is_unitary(W)) {
        throw ValidationError("passive_from_unitary: matrix is not unitary");
    }
    return symplectic_from_bogoliubov(W, CMat::Zero(W.rows(), W.cols()));
}

CMat unitary_from_passive(const Mat& O) {
    CMat u, v;
    bogoliubov_from_symplectic(O, u, v);
    if (v.cwiseAbs().maxCoeff() > tol::sympl || !is_unitary(u)) {
        throw ValidationError("unitary_from_passive: matrix is not orthogonal symplectic");
    }
    return u;
}

CMat beamsplitter_unitary(double theta, double phi) {
    CMat w(2, 2);
    double c = std::cos(theta);
    double s = std::sin(theta);
    w << c, std::polar(s, phi), -std::polar(s, -phi), c;
    return w;
}

namespace {

// Orthogonal symplectic O and z_i >= 1 with O^T M O = diag(z1^2, z1^-2, ...).
void symplectic_eigenbasis(const Mat& m_in, Mat& basis, Vec& z) {
    int n = static_cast<int>(m_in.rows() / 2);
    Mat omega = symplectic_form(n);
    Mat m = 0.5 * (m_in + m_in.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(m);
    std::vector<int> order(2 * n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return es.eigenvalues()(a) > es.eigenvalues()(b); });

    // Greedy choice of an isotropic orthonormal set among the leading eigenvectors.
    basis.resize(2 * n, 2 * n);
    z.resize(n);
    std::vector<bool> used(2 * n, false);
    for (int k = 0; k < n; k++) {
        int best = -1;
        double best_norm = -1.0;
        Vec best_vec;
        for (int idx : order) {
            if (used[idx]) {
                continue;
            }
            Vec w = es.eigenvectors().col(idx);
            for (int j = 0; j < k; j++) {
                w -= basis.col(2 * j).dot(w) * basis.col(2 * j);
                w -= basis.col(2 * j + 1).dot(w) * basis.col(2 * j + 1);
            }
            double nw = w.norm();
            if (nw > best_norm + 1e-12) {
                best = idx;
                best_norm = nw;
                best_vec = w;
            }
            if (nw * nw >= 0.5) {
                break;
            }
        }
        used[best] = true;
        Vec uq = best_vec / best_norm;
        Vec up = -omega * uq;
        double zq = std::sqrt(uq.dot(m * uq));
        double zp = std::sqrt(up.dot(m * up));
        if (zq < zp) {
            std::swap(uq, up);
            up = -up;
            std::swap(zq, zp);
        }
        basis.col(2 * k) = uq;
        basis.col(2 * k + 1) = up;
        z(k) = std::max(1.0, std::sqrt(zq / zp));
    }
}

}  // namespace

BlochMessiahResult bloch_messiah(const Mat& S) {
    if (!is_symplectic(S)) {
        throw ValidationError("bloch_messiah: matrix is not symplectic");
    }
    int n = static_cast<int>(S.rows() / 2);
    Mat basis;
    Vec z;
    symplectic_eigenbasis(S * S.transpose(), basis, z);
    BlochMessiahResult out;
    out.O1 = basis;
    out.Z = Mat::Zero(2 * n, 2 * n);
    Mat zinv = Mat::Zero(2 * n, 2 * n);
    for (int k = 0; k < n; k++) {
        out.Z(2 * k, 2 * k) = z(k);
        out.Z(2 * k + 1, 2 * k + 1) = 1.0 / z(k);
        zinv(2 * k, 2 * k) = 1.0 / z(k);
        zinv(2 * k + 1, 2 * k + 1) = z(k);
    }
    out.O2 = zinv * basis.transpose() * S;
    return out;
}

void williamson_pure(const Mat& cov, Mat& O, Vec& z) {
    symplectic_eigenbasis(cov, O, z);
}

GaussianUnitary GaussianUnitary::identity(int n) {
    return {Mat::Identity(2 * n, 2 * n), Vec::Zero(2 * n)};
}

GaussianUnitary GaussianUnitary::displacement(const CVec& alpha) {
    Eigen::Index n = alpha.size();
    return {Mat::Identity(2 * n, 2 * n), alpha_to_quadrature(alpha)};
}

GaussianUnitary GaussianUnitary::displacement(int n, int mode, cplx alpha) {
    if (mode < 0 || mode >= n) {
        throw ValidationError(fmt::format("displacement: mode {} out of range", mode));
    }
    CVec a = CVec::Zero(n);
    a(mode) = alpha;
    return displacement(a);
}

GaussianUnitary GaussianUnitary::squeezing(int n, int mode, cplx xi) {
    return {embed_modes(squeeze_matrix(xi), {mode}, n), Vec::Zero(2 * n)};
}

GaussianUnitary GaussianUnitary::phase(int n, int mode, double theta) {
    return {embed_modes(rotation_matrix(theta), {mode}, n), Vec::Zero(2 * n)};
}

GaussianUnitary GaussianUnitary::beamsplitter(int n, int mode1, int mode2, double theta, double phi) {
    if (mode1 == mode2) {
        throw ValidationError("beamsplitter: modes must differ");
    }
    return {embed_modes(passive_from_unitary(beamsplitter_unitary(theta, phi)), {mode1, mode2}, n),
            Vec::Zero(2 * n)};
}

GaussianUnitary GaussianUnitary::passive(const CMat& W) {
    Eigen::Index n = W.rows();
    return {passive_from_unitary(W), Vec::Zero(2 * n)};
}

GaussianUnitary GaussianUnitary::symplectic(const Mat& S) {
    if (!is_symplectic(S)) {
        throw ValidationError("GaussianUnitary: matrix is not symplectic");
    }
    return {S, Vec::Zero(S.rows())};
}

GaussianUnitary compose(const GaussianUnitary& U1, const GaussianUnitary& U2) {
    if (U1.d.size() != U2.d.size()) {
        throw ValidationError("compose: dimension mismatch");
    }
    return {U1.S * U2.S, U1.S * U2.d + U1.d};
}

GaussianUnitary inverse(const GaussianUnitary& U) {
    int n = U.modes();
    Mat omega = symplectic_form(n);
    Mat sinv = -omega * U.S.transpose() * omega;
    return {sinv, -sinv * U.d};
}

GaussianUnitary gate_unitary(const Gate& g, int n) {
    switch (g.kind) {
        case GateKind::displace:
            return GaussianUnitary::displacement(n, g.mode1, g.z);
        case GateKind::squeeze:
            return GaussianUnitary::squeezing(n, g.mode1, g.z);
        case GateKind::phase:
            return GaussianUnitary::phase(n, g.mode1, g.theta);
        case GateKind::beamsplitter:
            return GaussianUnitary::beamsplitter(n, g.mode1, g.mode2, g.theta, g.phi);
    }
    throw ValidationError("gate_unitary: unknown gate kind");
}

GaussianUnitary circuit_unitary(const Circuit& c, int n) {
    GaussianUnitary u = GaussianUnitary::identity(n);
    for (const auto& g : c) {
        u = compose(gate_unitary(g, n), u);
    }
    return u;
}

Circuit decompose_passive2(const CMat& W, int m1, int m2) {
    if (W.rows() != 2 || W.cols() != 2 || !is_unitary(W)) {
        throw ValidationError("decompose_passive2: expected a 2x2 unitary");
    }
    double c = std::min(1.0, std::abs(W(0, 0)));
    double theta = std::acos(c);
    double a1, a2, b2;
    if (std::sin(theta) < tol::decomp) {
        theta = 0.0;
        a1 = std::arg(W(0, 0));
        a2 = std::arg(W(1, 1));
        b2 = 0.0;
    } else if (c < tol::decomp) {
        theta = M_PI / 2;
        a1 = std::arg(W(0, 1));
        a2 = std::arg(-W(1, 0));
        b2 = 0.0;
    } else {
        a1 = std::arg(W(0, 0));
        a2 = std::arg(-W(1, 0));
        b2 = std::arg(W(0, 1)) - a1;
    }
    return {Gate::phase(m2, b2), Gate::beamsplitter(m1, m2, theta, 0.0), Gate::phase(m1, a1), Gate::phase(m2, a2)};
}

}  // namespace ngs
