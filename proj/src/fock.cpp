#include "ngsim/fock.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <fmt/core.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>

#include "ngsim/errors.hpp"

namespace ngs {

namespace {

std::vector<Eigen::Index> strides(int n, int cutoff) {
    std::vector<Eigen::Index> s(n, 1);
    for (int j = n - 2; j >= 0; j--) {
        s[j] = s[j + 1] * cutoff;
    }
    return s;
}

Eigen::Index total_size(int n, int cutoff) {
    Eigen::Index t = 1;
    for (int j = 0; j < n; j++) {
        t *= cutoff;
    }
    return t;
}

// Offsets of all multi-indices with the listed modes set to zero.
std::vector<Eigen::Index> base_offsets(int n, int cutoff, const std::vector<int>& fixed) {
    std::vector<Eigen::Index> st = strides(n, cutoff);
    std::vector<Eigen::Index> out{0};
    for (int j = 0; j < n; j++) {
        if (std::find(fixed.begin(), fixed.end(), j) != fixed.end()) {
            continue;
        }
        std::vector<Eigen::Index> next;
        next.reserve(out.size() * cutoff);
        for (Eigen::Index o : out) {
            for (int m = 0; m < cutoff; m++) {
                next.push_back(o + m * st[j]);
            }
        }
        out.swap(next);
    }
    return out;
}

void check_mode(const FockVector& psi, int mode) {
    if (mode < 0 || mode >= psi.modes) {
        throw ValidationError(fmt::format("fock oracle: mode {} out of range", mode));
    }
}

// Generator G with (G v)(k) = up(k) v(k - d) + down(k) v(k + d).
struct BandGenerator {
    int d = 1;
    CVec up;
    CVec down;
};

BandGenerator displacement_generator(Eigen::Index n, cplx alpha) {
    BandGenerator g{1, CVec::Zero(n), CVec::Zero(n)};
    for (Eigen::Index k = 0; k < n; k++) {
        g.up(k) = alpha * std::sqrt(static_cast<double>(k));
        g.down(k) = -std::conj(alpha) * std::sqrt(static_cast<double>(k + 1));
    }
    return g;
}

BandGenerator squeeze_generator(Eigen::Index n, cplx xi) {
    BandGenerator g{2, CVec::Zero(n), CVec::Zero(n)};
    for (Eigen::Index k = 0; k < n; k++) {
        g.up(k) = -0.5 * xi * std::sqrt(static_cast<double>(k * (k - 1)));
        g.down(k) = 0.5 * std::conj(xi) * std::sqrt(static_cast<double>((k + 1) * (k + 2)));
    }
    return g;
}

// Block of fixed total photon number t, indexed by the photon number m of the first mode.
BandGenerator beamsplitter_generator(int t, double theta, cplx e) {
    BandGenerator g{1, CVec::Zero(t + 1), CVec::Zero(t + 1)};
    for (int m = 0; m <= t; m++) {
        g.up(m) = theta * e * std::sqrt(static_cast<double>(m) * (t - m + 1));
        g.down(m) = -theta * std::conj(e) * std::sqrt(static_cast<double>(m + 1) * (t - m));
    }
    return g;
}

// chebyshev_exp specialised to a band generator, without temporaries in the recurrence.
CVec band_exp(const BandGenerator& g, const CVec& x, double lambda) {
    if (lambda < 1e-15) {
        return x;
    }
    const Eigen::Index n = x.size();
    const Eigen::Index d = g.d;
    int kmax = static_cast<int>(std::ceil(lambda + 12.0 * std::cbrt(lambda) + 40.0));
    std::vector<double> j = bessel_j_array(kmax, lambda);
    // h = -i G / lambda; the recurrence uses 2 h.
    const cplx s = cplx(0.0, -1.0 / lambda);
    CVec up = s * g.up;
    CVec down = s * g.down;
    auto apply = [&](const CVec& v, CVec& out, double scale, const CVec* sub) {
        for (Eigen::Index k = 0; k < n; k++) {
            cplx acc = 0.0;
            if (k >= d) {
                acc += up(k) * v(k - d);
            }
            if (k + d < n) {
                acc += down(k) * v(k + d);
            }
            out(k) = sub != nullptr ? scale * acc - (*sub)(k) : scale * acc;
        }
    };
    CVec prev = x;
    CVec cur(n);
    apply(x, cur, 1.0, nullptr);
    CVec y = j[0] * x + 2.0 * cplx(0.0, 1.0) * j[1] * cur;
    cplx ik = cplx(0.0, 1.0);
    for (int k = 2; k <= kmax; k++) {
        // prev <- 2 h cur - prev, computed in place since entry k only reads prev(k).
        apply(cur, prev, 2.0, &prev);
        ik *= cplx(0.0, 1.0);
        y += (2.0 * j[k]) * ik * prev;
        prev.swap(cur);
    }
    return y;
}

void apply_single_mode(FockVector& psi, const Gate& g) {
    int nc = psi.cutoff;
    int nw = 2 * nc + 64;
    std::vector<Eigen::Index> st = strides(psi.modes, nc);
    Eigen::Index s = st[g.mode1];
    double lambda = 0.0;
    if (g.kind == GateKind::displace) {
        lambda = 2.0 * std::abs(g.z) * std::sqrt(static_cast<double>(nw));
    } else {
        lambda = std::abs(g.z) * (nw + 1);
    }
    BandGenerator gen = g.kind == GateKind::displace ? displacement_generator(nw, g.z) : squeeze_generator(nw, g.z);
    for (Eigen::Index base : base_offsets(psi.modes, nc, {g.mode1})) {
        CVec fiber = CVec::Zero(nw);
        bool nonzero = false;
        for (int m = 0; m < nc; m++) {
            fiber(m) = psi.amp(base + m * s);
            nonzero = nonzero || fiber(m) != cplx(0.0);
        }
        if (!nonzero) {
            continue;
        }
        CVec out = band_exp(gen, fiber, lambda);
        for (int m = 0; m < nc; m++) {
            psi.amp(base + m * s) = out(m);
        }
        psi.leakage += out.tail(nw - nc).squaredNorm();
    }
}

void apply_phase(FockVector& psi, const Gate& g) {
    std::vector<Eigen::Index> st = strides(psi.modes, psi.cutoff);
    Eigen::Index s = st[g.mode1];
    for (Eigen::Index i = 0; i < psi.amp.size(); i++) {
        int m = static_cast<int>((i / s) % psi.cutoff);
        psi.amp(i) *= std::polar(1.0, g.theta * m);
    }
}

void apply_beamsplitter(FockVector& psi, const Gate& g) {
    if (g.mode1 == g.mode2) {
        throw ValidationError("fock oracle: beamsplitter modes must differ");
    }
    int nc = psi.cutoff;
    std::vector<Eigen::Index> st = strides(psi.modes, nc);
    Eigen::Index s1 = st[g.mode1];
    Eigen::Index s2 = st[g.mode2];
    cplx e = std::polar(1.0, g.phi);
    for (Eigen::Index base : base_offsets(psi.modes, nc, {g.mode1, g.mode2})) {
        for (int total = 0; total <= 2 * (nc - 1); total++) {
            int lo = std::max(0, total - (nc - 1));
            int hi = std::min(total, nc - 1);
            if (total > nc - 1) {
                // Block only partially representable: counted as truncation loss.
                for (int m = lo; m <= hi; m++) {
                    Eigen::Index idx = base + m * s1 + (total - m) * s2;
                    psi.leakage += std::norm(psi.amp(idx));
                    psi.amp(idx) = 0.0;
                }
                continue;
            }
            CVec block(total + 1);
            bool nonzero = false;
            for (int m = 0; m <= total; m++) {
                block(m) = psi.amp(base + m * s1 + (total - m) * s2);
                nonzero = nonzero || block(m) != cplx(0.0);
            }
            if (!nonzero || total == 0) {
                continue;
            }
            CVec out = band_exp(beamsplitter_generator(total, g.theta, e), block, std::abs(g.theta) * total);
            for (int m = 0; m <= total; m++) {
                psi.amp(base + m * s1 + (total - m) * s2) = out(m);
            }
        }
    }
}

}  // namespace

std::vector<double> bessel_j_array(int kmax, double x) {
    static std::once_flag flag;
    std::call_once(flag, [] { gsl_set_error_handler_off(); });
    std::vector<double> out(kmax + 1);
    int status = gsl_sf_bessel_Jn_array(0, kmax, x, out.data());
    if (status == GSL_EUNDRFLW) {
        // High orders at small x: evaluate one by one and flush the underflowing tail to zero.
        status = GSL_SUCCESS;
        for (int k = 0; k <= kmax; k++) {
            gsl_sf_result r;
            int s = gsl_sf_bessel_Jn_e(k, x, &r);
            if (s == GSL_EUNDRFLW) {
                std::fill(out.begin() + k, out.end(), 0.0);
                break;
            }
            if (s != GSL_SUCCESS) {
                status = s;
                break;
            }
            out[k] = r.val;
        }
    }
    if (status != GSL_SUCCESS) {
        throw NumericalError(fmt::format("bessel_j_array: GSL error {} at x = {}", status, x));
    }
    return out;
}

Eigen::Index FockVector::index(const std::vector<int>& m) const {
    if (static_cast<int>(m.size()) != modes) {
        throw ValidationError("FockVector: multi-index length mismatch");
    }
    Eigen::Index idx = 0;
    for (int j = 0; j < modes; j++) {
        if (m[j] < 0 || m[j] >= cutoff) {
            throw ValidationError(fmt::format("FockVector: photon number {} outside cutoff {}", m[j], cutoff));
        }
        idx = idx * cutoff + m[j];
    }
    return idx;
}

FockVector fock_vacuum(int n, int cutoff) {
    if (n < 1 || cutoff < 1) {
        throw ValidationError("fock_vacuum: modes and cutoff must be positive");
    }
    FockVector v;
    v.modes = n;
    v.cutoff = cutoff;
    v.amp = CVec::Zero(total_size(n, cutoff));
    v.amp(0) = 1.0;
    return v;
}

FockVector fock_number_state(const std::vector<int>& m, int cutoff) {
    FockVector v = fock_vacuum(static_cast<int>(m.size()), cutoff);
    v.amp(0) = 0.0;
    v.amp(v.index(m)) = 1.0;
    return v;
}

FockVector fock_tensor(const FockVector& a, const FockVector& b) {
    if (a.cutoff != b.cutoff) {
        throw ValidationError("fock_tensor: cutoff mismatch");
    }
    FockVector v;
    v.modes = a.modes + b.modes;
    v.cutoff = a.cutoff;
    v.amp.resize(a.amp.size() * b.amp.size());
    for (Eigen::Index i = 0; i < a.amp.size(); i++) {
        v.amp.segment(i * b.amp.size(), b.amp.size()) = a.amp(i) * b.amp;
    }
    v.leakage = a.leakage + b.leakage;
    return v;
}

void apply_gate(FockVector& psi, const Gate& g) {
    check_mode(psi, g.mode1);
    switch (g.kind) {
        case GateKind::displace:
        case GateKind::squeeze:
            apply_single_mode(psi, g);
            return;
        case GateKind::phase:
            apply_phase(psi, g);
            return;
        case GateKind::beamsplitter:
            check_mode(psi, g.mode2);
            apply_beamsplitter(psi, g);
            return;
    }
}

void apply_circuit(FockVector& psi, const Circuit& c) {
    for (const auto& g : c) {
        apply_gate(psi, g);
    }
}

FockVector oracle_state(int n, const Circuit& program, int cutoff, double leak_tol) {
    FockVector psi = fock_vacuum(n, cutoff);
    apply_circuit(psi, program);
    if (psi.leakage > leak_tol) {
        throw NumericalError(
            fmt::format("oracle_state: truncation leakage {:.3e} exceeds {:.1e} at cutoff {}", psi.leakage, leak_tol, cutoff));
    }
    return psi;
}

FockVector oracle_state_adaptive(int n, const Circuit& program, double leak_tol, int start, int max_cutoff) {
    for (int cutoff = start; cutoff <= max_cutoff; cutoff *= 2) {
        FockVector psi = fock_vacuum(n, cutoff);
        apply_circuit(psi, program);
        if (psi.leakage <= leak_tol) {
            return psi;
        }
    }
    throw NumericalError(fmt::format("oracle_state_adaptive: leakage above {:.1e} at cutoff {}", leak_tol, max_cutoff));
}

cplx oracle_overlap(const FockVector& a, const FockVector& b) {
    if (a.modes != b.modes || a.cutoff != b.cutoff) {
        throw ValidationError("oracle_overlap: cutoff or mode mismatch");
    }
    return a.amp.dot(b.amp);
}

cplx oracle_coherent_amplitude(const FockVector& psi, const CVec& beta) {
    if (beta.size() != psi.modes) {
        throw ValidationError("oracle_coherent_amplitude: dimension mismatch");
    }
    // <beta|m> = exp(-|beta|^2/2) prod conj(beta_j)^{m_j} / sqrt(m_j!)
    std::vector<CVec> single(psi.modes, CVec(psi.cutoff));
    for (int j = 0; j < psi.modes; j++) {
        single[j](0) = std::exp(-0.5 * std::norm(beta(j)));
        for (int m = 1; m < psi.cutoff; m++) {
            single[j](m) = single[j](m - 1) * std::conj(beta(j)) / std::sqrt(static_cast<double>(m));
        }
    }
    cplx acc = 0.0;
    std::vector<int> m(psi.modes, 0);
    for (Eigen::Index i = 0; i < psi.amp.size(); i++) {
        Eigen::Index rem = i;
        cplx w = 1.0;
        for (int j = psi.modes - 1; j >= 0; j--) {
            w *= single[j](rem % psi.cutoff);
            rem /= psi.cutoff;
        }
        acc += w * psi.amp(i);
    }
    return acc;
}

double oracle_born(const FockVector& psi, const CVec& beta) {
    double nrm = psi.norm2();
    if (!(nrm > 0.0)) {
        throw NumericalError("oracle_born: zero state");
    }
    return std::norm(oracle_coherent_amplitude(psi, beta)) / (std::pow(M_PI, psi.modes) * nrm);
}

}  // namespace ngs
