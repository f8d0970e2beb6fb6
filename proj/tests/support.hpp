#pragma once

// Helpers shared by the unit tests and the acceptance runner.

#include <cmath>
#include <random>
#include <vector>

#include "ngsim/fock.hpp"
#include "ngsim/phase.hpp"
#include "ngsim/states.hpp"

namespace ngs::testing {

inline double uniform(std::mt19937_64& eng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(eng);
}

inline cplx random_disk(std::mt19937_64& eng, double radius) {
    double r = radius * std::sqrt(uniform(eng, 0.0, 1.0));
    return std::polar(r, uniform(eng, -M_PI, M_PI));
}

// Haar-ish random 2x2 unitary from three angles and a global phase.
inline CMat random_unitary2(std::mt19937_64& eng) {
    double th = uniform(eng, 0.0, M_PI / 2);
    double a = uniform(eng, -M_PI, M_PI);
    double b = uniform(eng, -M_PI, M_PI);
    double g = uniform(eng, -M_PI, M_PI);
    CMat W(2, 2);
    W << std::polar(std::cos(th), a), std::polar(std::sin(th), b), -std::polar(std::sin(th), g - b),
        std::polar(std::cos(th), g - a);
    return W;
}

// Per-mode S(z_j) then D(alpha_j), then a passive W (two modes only).
struct ProductProgram {
    std::vector<cplx> xi;
    std::vector<cplx> alpha;
    CMat W;  // identity for one mode

    int modes() const { return static_cast<int>(xi.size()); }

    Circuit mode_circuit(int j) const { return {Gate::squeeze(0, xi[j]), Gate::displace(0, alpha[j])}; }

    Circuit circuit() const {
        Circuit c;
        for (int j = 0; j < modes(); j++) {
            c.push_back(Gate::squeeze(j, xi[j]));
            c.push_back(Gate::displace(j, alpha[j]));
        }
        if (modes() == 2) {
            for (const Gate& g : decompose_passive2(W, 0, 1)) {
                c.push_back(g);
            }
        }
        return c;
    }
};

inline ProductProgram random_product_program(std::mt19937_64& eng, int n, double alpha_max, double r_max) {
    ProductProgram p;
    for (int j = 0; j < n; j++) {
        p.xi.push_back(std::polar(uniform(eng, 0.0, r_max), uniform(eng, -M_PI, M_PI)));
        p.alpha.push_back(random_disk(eng, alpha_max));
    }
    p.W = n == 2 ? random_unitary2(eng) : CMat(CMat::Identity(1, 1));
    return p;
}

// Gate-by-gate propagation from vacuum.
inline GaussianPure prepare(int n, const Circuit& c) {
    GaussianPure g = GaussianPure::vacuum(n);
    for (const Gate& gate : c) {
        g = propagate(g, gate_unitary(gate, n));
    }
    return g;
}

// Single-mode oracle vector: first cutoff of a geometric ladder with leakage below tol.
inline FockVector oracle_single(const Circuit& c, double tol, int start = 40, int max_cutoff = 1600) {
    for (int cutoff = start; cutoff <= max_cutoff; cutoff = cutoff * 5 / 4) {
        FockVector psi = fock_vacuum(1, cutoff);
        apply_circuit(psi, c);
        if (psi.leakage <= tol) {
            return psi;
        }
    }
    return oracle_state(1, c, max_cutoff, tol);
}

// Starting cutoff for S(xi) then D(alpha): squeezed-vacuum tail tanh(r)^(2k) plus a displacement margin.
inline int cutoff_guess(cplx xi, cplx alpha, double tol) {
    double r = std::abs(xi);
    double t2 = std::pow(std::tanh(r), 2);
    double sq = r > 1e-3 ? 2.0 * std::log(tol) / std::log(t2) : 0.0;
    double a2 = std::norm(alpha);
    return static_cast<int>(24 + 0.6 * sq + a2 + 8.0 * std::sqrt(a2) * (1.0 + std::exp(r)));
}

inline FockVector oracle_mode(const ProductProgram& p, int j, double tol) {
    return oracle_single(p.mode_circuit(j), tol, cutoff_guess(p.xi[j], p.alpha[j], tol));
}

inline FockVector pad(const FockVector& v, int cutoff) {
    FockVector out = fock_vacuum(1, cutoff);
    out.amp.setZero();
    Eigen::Index m = std::min<Eigen::Index>(v.amp.size(), cutoff);
    out.amp.head(m) = v.amp.head(m);
    out.leakage = v.leakage;
    return out;
}

// Norms of the total-photon-number blocks of a two-mode product a (x) b.
inline std::vector<double> block_norms(const FockVector& a, const FockVector& b, int blocks) {
    std::vector<double> out(blocks, 0.0);
    for (Eigen::Index m = 0; m < a.amp.size(); m++) {
        for (Eigen::Index k = 0; k < b.amp.size() && m + k < blocks; k++) {
            out[m + k] += std::norm(a.amp(m) * b.amp(k));
        }
    }
    for (double& x : out) {
        x = std::sqrt(x);
    }
    return out;
}

// <p1|p2> through single-mode oracle vectors. Two modes: the passive layers are merged into
// W1^dag W2 acting on the second product state. Passive maps conserve the total photon number,
// so dropping blocks t >= T changes the overlap by at most sum_{t>=T} |P1_t| |P2_t|; T is the
// smallest cutoff for which that sum is below tol.
inline cplx oracle_program_overlap(const ProductProgram& p1, const ProductProgram& p2, double tol) {
    if (p1.modes() == 1) {
        FockVector a = oracle_mode(p1, 0, tol);
        FockVector b = oracle_mode(p2, 0, tol);
        int c = std::max(a.cutoff, b.cutoff);
        return oracle_overlap(pad(a, c), pad(b, c));
    }
    FockVector a0 = oracle_mode(p1, 0, tol);
    FockVector a1 = oracle_mode(p1, 1, tol);
    FockVector b0 = oracle_mode(p2, 0, tol);
    FockVector b1 = oracle_mode(p2, 1, tol);
    int full = std::max(a0.cutoff, b0.cutoff) + std::max(a1.cutoff, b1.cutoff);
    std::vector<double> n1 = block_norms(a0, a1, full);
    std::vector<double> n2 = block_norms(b0, b1, full);
    int T = full;
    double tail = 0.0;
    while (T > 1 && tail + n1[T - 1] * n2[T - 1] <= tol) {
        tail += n1[T - 1] * n2[T - 1];
        T--;
    }
    auto product = [&](const FockVector& x, const FockVector& y) {
        FockVector v = fock_tensor(pad(x, T), pad(y, T));
        for (int m = 0; m < T; m++) {
            for (int k = T - m; k < T; k++) {
                v.amp(static_cast<Eigen::Index>(m) * T + k) = 0.0;
            }
        }
        return v;
    };
    FockVector a = product(a0, a1);
    FockVector b = product(b0, b1);
    apply_circuit(b, decompose_passive2(p1.W.adjoint() * p2.W, 0, 1));
    return oracle_overlap(a, b);
}

// sum_k c_k |recipe_k> for a single-mode superposition whose terms all carry recipes.
inline FockVector oracle_superposition(const Superposition& s, int cutoff) {
    FockVector acc = fock_vacuum(s.modes(), cutoff);
    acc.amp.setZero();
    for (const auto& t : s.terms()) {
        FockVector v = fock_vacuum(s.modes(), cutoff);
        apply_circuit(v, *t.recipe);
        acc.amp += t.coeff * v.amp;
        acc.leakage = std::max(acc.leakage, v.leakage);
    }
    return acc;
}

// Random gate drawn from {displace, squeeze, phase, beamsplitter} on two modes.
inline Gate random_gate(std::mt19937_64& eng, double alpha_max, double r_max) {
    int kind = std::uniform_int_distribution<int>(0, 3)(eng);
    int m = std::uniform_int_distribution<int>(0, 1)(eng);
    switch (kind) {
        case 0:
            return Gate::displace(m, random_disk(eng, alpha_max));
        case 1:
            return Gate::squeeze(m, std::polar(uniform(eng, 0.0, r_max), uniform(eng, -M_PI, M_PI)));
        case 2:
            return Gate::phase(m, uniform(eng, -M_PI, M_PI));
        default:
            return Gate::beamsplitter(m, 1 - m, uniform(eng, -M_PI, M_PI), uniform(eng, -M_PI, M_PI));
    }
}

inline Circuit random_circuit(std::mt19937_64& eng, int depth, double alpha_max, double r_max) {
    Circuit c;
    for (int i = 0; i < depth; i++) {
        c.push_back(random_gate(eng, alpha_max, r_max));
    }
    return c;
}

// Superposition on two modes: `one` on mode 0, vacuum on mode 1.
inline Superposition with_vacuum_mode(const Superposition& one) {
    std::vector<WeightedGaussian> terms;
    for (const auto& t : one.terms()) {
        terms.push_back({t.coeff, tensor(t.term, GaussianPure::vacuum(1)), t.recipe});
    }
    return Superposition(std::move(terms));
}

}  // namespace ngs::testing
