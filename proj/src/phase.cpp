#include "ngsim/phase.hpp"

#include <cmath>
#include <random>

#include <fmt/core.h>

#include "ngsim/errors.hpp"

namespace ngs {

namespace {

// x = (conj(beta), beta): exponent -x^T K x / 2 + J^T x.
void integral_system(const CMat& P, const CVec& u, const CMat& R, const CVec& v, CMat& K, CVec& J) {
    Eigen::Index n = P.rows();
    if (P.cols() != n || R.rows() != n || R.cols() != n || u.size() != n || v.size() != n) {
        throw ValidationError("gaussian_integral: dimension mismatch");
    }
    K.resize(2 * n, 2 * n);
    K.topLeftCorner(n, n) = -R;
    K.topRightCorner(n, n) = CMat::Identity(n, n);
    K.bottomLeftCorner(n, n) = CMat::Identity(n, n);
    K.bottomRightCorner(n, n) = -P;
    J.resize(2 * n);
    J.head(n) = v;
    J.tail(n) = u;
}

cplx integral_prefactor(const CMat& P, const CMat& R) {
    Eigen::Index n = P.rows();
    CMat m = CMat::Identity(n, n) - P * R;
    cplx s = sqrt_det(m);
    if (std::abs(s) == 0.0) {
        throw NumericalError("gaussian_integral: singular quadratic form");
    }
    return 1.0 / s;
}

cplx quad_form(const CVec& x, const CMat& A) { return (x.transpose() * A * x)(0); }

cplx bilinear(const CVec& x, const CVec& y) { return (x.transpose() * y)(0); }

CVec conj_vec(const CVec& v) { return v.conjugate(); }

// Pure state with the vacuum overlap taken real positive.
GaussianPure make_pure(const Mat& cov, const Vec& mean) {
    int n = static_cast<int>(mean.size() / 2);
    return GaussianPure(cov, mean, std::sqrt(fidelity_pure(GaussianMixed{cov, mean}, GaussianMixed::vacuum(n))));
}

void check_same_modes(const GaussianPure& a, const GaussianPure& b, const char* what) {
    if (a.modes() != b.modes()) {
        throw ValidationError(fmt::format("{}: mode count mismatch ({} vs {})", what, a.modes(), b.modes()));
    }
}

cplx triple_overlap_raw(const GaussianMixed& g0, const GaussianMixed& g1, const GaussianMixed& g2) {
    int n = g0.modes();
    Mat s12 = g1.cov + g2.cov;
    Vec d = g1.mean - g2.mean;
    Vec x = solve_spd(s12, d, "triple_overlap");
    TripleKernel k = triple_kernel(g1, g2);
    CMat s0d = g0.cov.cast<cplx>() + k.Delta;
    CVec e = g0.mean.cast<cplx>() - k.mu_Delta;
    CVec y = solve_checked(s0d, e, "triple_overlap");
    cplx pre = std::pow(4.0, n) / (std::sqrt(s12.determinant()) * sqrt_det(s0d));
    return pre * std::exp(-d.dot(x) - bilinear(e, y));
}

}  // namespace

cplx gaussian_integral(const CMat& P, const CVec& u, const CMat& R, const CVec& v) {
    CMat K;
    CVec J;
    integral_system(P, u, R, v, K, J);
    CVec y = solve_checked(K, J, "gaussian_integral");
    return integral_prefactor(P, R) * std::exp(0.5 * bilinear(J, y));
}

GaussianIntegral gaussian_integral_moments(const CMat& P, const CVec& u, const CMat& R, const CVec& v) {
    CMat K;
    CVec J;
    integral_system(P, u, R, v, K, J);
    CMat kinv = inverse_checked(K, "gaussian_integral");
    CVec mean = kinv * J;
    return {integral_prefactor(P, R) * std::exp(0.5 * bilinear(J, mean)), mean, kinv};
}

TripleKernel triple_kernel(const GaussianMixed& g1, const GaussianMixed& g2) {
    int n = g1.modes();
    CMat om = I1 * symplectic_form(n).cast<cplx>();
    CMat s2 = g2.cov.cast<cplx>();
    CMat s12 = (g1.cov + g2.cov).cast<cplx>();
    CMat left = s2 + om;
    CMat right = solve_checked(s12, CMat(s2 - om), "triple_kernel");
    CVec shift = solve_checked(s12, CMat((g1.mean - g2.mean).cast<cplx>()), "triple_kernel");
    TripleKernel k;
    k.Delta = s2 - left * right;
    k.mu_Delta = g2.mean.cast<cplx>() + left * shift;
    return k;
}

cplx triple_overlap(const GaussianPure& g0, const GaussianPure& g1, const GaussianPure& g2) {
    check_same_modes(g0, g1, "triple_overlap");
    check_same_modes(g0, g2, "triple_overlap");
    return triple_overlap_raw(g0.mixed(), g1.mixed(), g2.mixed());
}

cplx stellar_overlap(const GaussianPure& g1, const GaussianPure& g2) {
    check_same_modes(g1, g2, "stellar_overlap");
    cplx o1 = g1.ref_overlap();
    cplx o2 = g2.ref_overlap();
    if (o1 == cplx(0.0) || o2 == cplx(0.0)) {
        throw ReferenceDegenerate("stellar_overlap: vacuum overlap underflows");
    }
    CMat P = g1.A().conjugate();
    CMat K;
    CVec J;
    integral_system(P, conj_vec(g1.b()), g2.A(), g2.b(), K, J);
    CVec y = solve_checked(K, J, "stellar_overlap");
    // Summed in the exponent: the two vacuum overlaps may be far below the smallest double product.
    return std::exp(std::log(std::conj(o1)) + std::log(o2) + std::log(integral_prefactor(P, g2.A())) +
                    0.5 * bilinear(J, y));
}

GaussianPure random_reference(const Vec& center, std::uint64_t seed) {
    int n = static_cast<int>(center.size() / 2);
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 0.5);
    Mat s = Mat::Identity(2 * n, 2 * n);
    for (int j = 0; j < n; j++) {
        cplx xi = std::polar(0.3 * unif(eng), 2.0 * M_PI * unif(eng));
        s = embed_modes(squeeze_matrix(xi), {j}, n) * s;
    }
    Vec mean = center;
    for (Eigen::Index i = 0; i < mean.size(); i++) {
        mean(i) += gauss(eng);
    }
    return make_pure(s * s.transpose(), mean);
}

cplx overlap(const GaussianPure& g1, const GaussianPure& g2) {
    check_same_modes(g1, g2, "overlap");
    cplx o1 = g1.ref_overlap();
    cplx o2 = g2.ref_overlap();
    if (std::abs(o1) >= tol::ref && std::abs(o2) >= tol::ref) {
        return triple_overlap_raw(GaussianMixed::vacuum(g1.modes()), g1.mixed(), g2.mixed()) / (o1 * std::conj(o2));
    }
    Vec center = 0.5 * (g1.mean() + g2.mean());
    for (std::uint64_t attempt = 0; attempt < 2; attempt++) {
        GaussianPure ref = random_reference(center, 0x5eedULL + attempt);
        cplx r1 = stellar_overlap(ref, g1);
        cplx r2 = stellar_overlap(ref, g2);
        if (std::abs(r1) >= tol::ref && std::abs(r2) >= tol::ref) {
            return triple_overlap_raw(ref.mixed(), g1.mixed(), g2.mixed()) / (r1 * std::conj(r2));
        }
    }
    throw ReferenceDegenerate("overlap: reference overlap below tolerance after re-anchoring");
}

AnchoredSet AnchoredSet::from_vacuum(std::vector<GaussianPure> states) {
    if (states.empty()) {
        throw ValidationError("AnchoredSet: empty state list");
    }
    AnchoredSet set{GaussianPure::vacuum(states.front().modes()), std::move(states), {}};
    for (const auto& s : set.states) {
        check_same_modes(set.reference, s, "AnchoredSet");
        set.ref_overlaps.push_back(s.ref_overlap());
    }
    return set;
}

cplx AnchoredSet::overlap(std::size_t i, std::size_t j) const {
    cplx ri = ref_overlaps.at(i);
    cplx rj = ref_overlaps.at(j);
    if (std::abs(ri) < tol::ref || std::abs(rj) < tol::ref) {
        throw ReferenceDegenerate(fmt::format("AnchoredSet: state {} or {} nearly orthogonal to the reference", i, j));
    }
    return triple_overlap_raw(reference.mixed(), states[i].mixed(), states[j].mixed()) / (ri * std::conj(rj));
}

AnchoredSet reanchor(const AnchoredSet& set, const GaussianPure& new_reference) {
    AnchoredSet out{new_reference, set.states, {}};
    for (std::size_t i = 0; i < set.states.size(); i++) {
        check_same_modes(new_reference, set.states[i], "reanchor");
        cplx r = overlap(new_reference, set.states[i]);
        if (std::abs(r) < tol::ref) {
            throw ReferenceDegenerate(fmt::format("reanchor: state {} nearly orthogonal to the new reference", i));
        }
        out.ref_overlaps.push_back(r);
    }
    return out;
}

BlochMessiahProgram bloch_messiah_program(const Mat& cov, const Vec& mean) {
    if (!is_pure(cov)) {
        throw ValidationError("bloch_messiah_program: covariance is not pure");
    }
    int n = static_cast<int>(mean.size() / 2);
    BlochMessiahProgram p;
    Vec z;
    williamson_pure(cov, p.O, z);
    p.gamma.resize(n);
    Vec m = p.O.transpose() * mean;
    for (int j = 0; j < n; j++) {
        p.gamma(j) = -std::log(z(j));
        m(2 * j) /= z(j);
        m(2 * j + 1) *= z(j);
    }
    p.beta = quadrature_to_alpha(m);
    return p;
}

cplx vacuum_amplitude_squeezed_displaced(cplx xi, cplx beta) {
    double r = std::abs(xi);
    cplx t = r > 0 ? xi / r * std::tanh(r) : cplx(0.0);
    return std::pow(1.0 - std::norm(t), 0.25) * std::exp(0.5 * (std::conj(t) * beta * beta - std::norm(beta)));
}

cplx ref_overlap_bloch_messiah(const BlochMessiahProgram& program) {
    cplx out = 1.0;
    for (int j = 0; j < program.modes(); j++) {
        out *= vacuum_amplitude_squeezed_displaced(program.gamma(j), program.beta(j));
    }
    return out;
}

StellarParams stellar_from_covariance(const GaussianMixed& rho) {
    rho.validate();
    int n = rho.modes();
    CMat L = CMat::Zero(2 * n, 2 * n);
    CMat P = CMat::Zero(2 * n, 2 * n);
    double s = 1.0 / std::sqrt(2.0);
    for (int j = 0; j < n; j++) {
        L(2 * j, 2 * j) = s;
        L(2 * j, 2 * j + 1) = s;
        L(2 * j + 1, 2 * j) = -I1 * s;
        L(2 * j + 1, 2 * j + 1) = I1 * s;
        P(2 * j, 2 * j + 1) = 1.0;
        P(2 * j + 1, 2 * j) = 1.0;
    }
    Mat sigma = rho.cov + Mat::Identity(2 * n, 2 * n);
    Mat sinv = solve_spd(sigma, Mat(Mat::Identity(2 * n, 2 * n)), "stellar_from_covariance");
    CMat ax = P - 2.0 * L.transpose() * sinv.cast<cplx>() * L;
    CVec bx = 2.0 * L.transpose() * (sinv * rho.mean).cast<cplx>();
    // Interleaved (beta_j, alpha_j) -> (beta_1..beta_n, alpha_1..alpha_n).
    std::vector<int> perm(2 * n);
    for (int j = 0; j < n; j++) {
        perm[j] = 2 * j;
        perm[n + j] = 2 * j + 1;
    }
    StellarParams out;
    out.A.resize(2 * n, 2 * n);
    out.b.resize(2 * n);
    for (int a = 0; a < 2 * n; a++) {
        out.b(a) = bx(perm[a]);
        for (int c = 0; c < 2 * n; c++) {
            out.A(a, c) = ax(perm[a], perm[c]);
        }
    }
    out.c = std::pow(2.0, n) * std::exp(-rho.mean.dot(sinv * rho.mean)) / std::sqrt(sigma.determinant());
    return out;
}

CMat UnitaryStellar::A_aa() const {
    int n = modes();
    return A.topLeftCorner(n, n);
}
CMat UnitaryStellar::A_ab() const {
    int n = modes();
    return A.topRightCorner(n, n);
}
CMat UnitaryStellar::A_bb() const {
    int n = modes();
    return A.bottomRightCorner(n, n);
}
CVec UnitaryStellar::b_a() const { return b.head(modes()); }
CVec UnitaryStellar::b_b() const { return b.tail(modes()); }

namespace {

void unitary_ab(const GaussianUnitary& U, CMat& A, CVec& b) {
    int n = U.modes();
    CMat u, v;
    bogoliubov_from_symplectic(U.S, u, v);
    CVec g = quadrature_to_alpha(U.d);
    CMat aab = inverse_checked(u.adjoint(), "stellar_unitary");
    CMat aaa = solve_checked(u * u.adjoint(), CMat(v * u.transpose()), "stellar_unitary");
    aaa = 0.5 * (aaa + aaa.transpose()).eval();
    CMat abb = -v.adjoint() * aab;
    abb = 0.5 * (abb + abb.transpose()).eval();
    A.resize(2 * n, 2 * n);
    A.topLeftCorner(n, n) = aaa;
    A.topRightCorner(n, n) = aab;
    A.bottomLeftCorner(n, n) = aab.transpose();
    A.bottomRightCorner(n, n) = abb;
    b.resize(2 * n);
    b.head(n) = g - aaa * g.conjugate();
    b.tail(n) = -aab.transpose() * g.conjugate();
}

}  // namespace

UnitaryStellar stellar_unitary(const GaussianUnitary& U) {
    if (!is_symplectic(U.S) || U.d.size() != U.S.rows()) {
        throw ValidationError("stellar_unitary: invalid symplectic/displacement pair");
    }
    UnitaryStellar out;
    out.source = U;
    unitary_ab(U, out.A, out.b);
    int n = U.modes();
    GaussianMixed out_vac{U.S * U.S.transpose(), U.d};
    out.c = std::sqrt(fidelity_pure(out_vac, GaussianMixed::vacuum(n)));
    return out;
}

UnitaryStellar stellar_compose(const UnitaryStellar& U1, const UnitaryStellar& U2) {
    if (U1.modes() != U2.modes()) {
        throw ValidationError("stellar_compose: mode count mismatch");
    }
    UnitaryStellar out;
    out.source = compose(U1.source, U2.source);
    unitary_ab(out.source, out.A, out.b);
    out.c = U1.c * U2.c * gaussian_integral(U1.A_bb(), U1.b_b(), U2.A_aa(), U2.b_a());
    return out;
}

cplx stellar_sandwich(const CVec& alpha, const CVec& beta, const UnitaryStellar& U) {
    int n = U.modes();
    if (alpha.size() != n || beta.size() != n) {
        throw ValidationError("stellar_sandwich: dimension mismatch");
    }
    CVec nu(2 * n);
    nu.head(n) = alpha;
    nu.tail(n) = beta;
    cplx e = -0.5 * (alpha.squaredNorm() + beta.squaredNorm()) + bilinear(U.b, nu) + 0.5 * quad_form(nu, U.A);
    return U.c * std::exp(e);
}

GaussianPure propagate(const GaussianPure& g, const UnitaryStellar& U) {
    if (g.modes() != U.modes()) {
        throw ValidationError("propagate: mode count mismatch");
    }
    const GaussianUnitary& src = U.source;
    Mat cov = src.S * g.cov() * src.S.transpose();
    cov = 0.5 * (cov + cov.transpose()).eval();
    Vec mean = src.S * g.mean() + src.d;
    cplx o = U.c * g.ref_overlap() * gaussian_integral(U.A_bb(), U.b_b(), g.A(), g.b());
    return GaussianPure(cov, mean, o);
}

GaussianPure propagate(const GaussianPure& g, const GaussianUnitary& U) { return propagate(g, stellar_unitary(U)); }

namespace {

// Amplitudes on the box prod_j [0, dims_j), row-major with mode 0 slowest.
CVec fock_box(const GaussianPure& g, const std::vector<int>& dims) {
    int n = g.modes();
    std::vector<Eigen::Index> stride(n, 1);
    Eigen::Index total = 1;
    for (int j = n - 1; j >= 0; j--) {
        stride[j] = total;
        total *= dims[j];
    }
    CVec psi = CVec::Zero(total);
    psi(0) = g.ref_overlap();
    const CMat& A = g.A();
    const CVec& b = g.b();
    std::vector<int> m(n, 0);
    for (Eigen::Index idx = 1; idx < total; idx++) {
        Eigen::Index rem = idx;
        for (int j = 0; j < n; j++) {
            m[j] = static_cast<int>(rem / stride[j]);
            rem %= stride[j];
        }
        int j = 0;
        while (m[j] == 0) {
            j++;
        }
        Eigen::Index prev = idx - stride[j];
        cplx acc = b(j) * psi(prev);
        m[j] -= 1;
        for (int k = 0; k < n; k++) {
            if (m[k] > 0) {
                acc += A(j, k) * std::sqrt(static_cast<double>(m[k])) * psi(prev - stride[k]);
            }
        }
        m[j] += 1;
        psi(idx) = acc / std::sqrt(static_cast<double>(m[j]));
    }
    return psi;
}

}  // namespace

cplx fock_amplitude(const GaussianPure& g, const std::vector<int>& m) {
    if (static_cast<int>(m.size()) != g.modes()) {
        throw ValidationError("fock_amplitude: multi-index length mismatch");
    }
    std::vector<int> dims(m.size());
    for (std::size_t j = 0; j < m.size(); j++) {
        if (m[j] < 0) {
            throw ValidationError("fock_amplitude: negative photon number");
        }
        dims[j] = m[j] + 1;
    }
    CVec box = fock_box(g, dims);
    return box(box.size() - 1);
}

CVec fock_amplitudes(const GaussianPure& g, int cutoff) {
    if (cutoff < 1) {
        throw ValidationError("fock_amplitudes: cutoff must be positive");
    }
    return fock_box(g, std::vector<int>(g.modes(), cutoff));
}

cplx number_matrix_element(const GaussianPure& g1, const GaussianPure& g2) {
    check_same_modes(g1, g2, "number_matrix_element");
    int n = g1.modes();
    CMat a1 = g1.A().conjugate();
    CVec b1 = conj_vec(g1.b());
    const CMat& a2 = g2.A();
    const CVec& b2 = g2.b();
    GaussianIntegral gi = gaussian_integral_moments(a1, b1, a2, b2);
    CVec ebar = gi.mean.head(n);  // E[conj(beta)]
    CVec e = gi.mean.tail(n);     // E[beta]
    CVec y1 = b1 + a1 * e;
    CVec y2 = b2 + a2 * ebar;
    CMat cross = gi.cov.bottomLeftCorner(n, n);  // Cov(beta_k, conj(beta_l))
    CMat c12 = a1 * cross * a2.transpose();
    cplx sum = 0.0;
    for (int j = 0; j < n; j++) {
        sum += y1(j) * y2(j) + c12(j, j);
    }
    return std::conj(g1.ref_overlap()) * g2.ref_overlap() * gi.value * sum;
}

CoherentProjection project_coherent(const GaussianPure& g, const std::vector<int>& modes, const CVec& beta) {
    int n = g.modes();
    std::vector<int> rest = complement_modes(modes, n);
    if (rest.empty()) {
        throw ValidationError("project_coherent: all modes projected; use coherent_amplitude");
    }
    if (beta.size() != static_cast<Eigen::Index>(modes.size())) {
        throw ValidationError("project_coherent: outcome dimension mismatch");
    }
    Eigen::Index k = beta.size();
    CMat abb(k, k);
    CVec bb(k);
    for (Eigen::Index i = 0; i < k; i++) {
        bb(i) = g.b()(modes[i]);
        for (Eigen::Index j = 0; j < k; j++) {
            abb(i, j) = g.A()(modes[i], modes[j]);
        }
    }
    CVec z = beta.conjugate();
    cplx c = g.ref_overlap() * std::exp(-0.5 * beta.squaredNorm() + bilinear(bb, z) + 0.5 * quad_form(z, abb));
    GaussianMixed cond =
        condition_on_generaldyne(g.mixed(), GeneralDyne::heterodyne(modes), alpha_to_quadrature(beta));
    double f = fidelity_pure(cond, GaussianMixed::vacuum(static_cast<int>(rest.size())));
    double w = std::abs(c) / std::sqrt(f);
    if (!(w > 0.0) || !std::isfinite(w)) {
        return {make_pure(cond.cov, cond.mean), 0.0};
    }
    return {GaussianPure(cond.cov, cond.mean, c / w), w};
}

}  // namespace ngs
