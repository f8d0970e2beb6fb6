#pragma once

#include <vector>

#include "ngsim/linalg.hpp"
#include "ngsim/symplectic.hpp"

namespace ngs {

// Truncated Fock-basis state. Amplitudes are stored row-major over photon numbers
// (mode 0 slowest), each mode truncated to photon numbers < cutoff.
struct FockVector {
    int modes = 1;
    int cutoff = 1;
    CVec amp;
    // Probability mass discarded by truncation while building the state.
    double leakage = 0.0;

    Eigen::Index index(const std::vector<int>& m) const;
    cplx at(const std::vector<int>& m) const { return amp(index(m)); }
    double norm2() const { return amp.squaredNorm(); }
};

inline constexpr int default_cutoff_1mode = 60;
inline constexpr int default_cutoff_2mode = 40;
inline constexpr double default_leak_tol = 1e-10;

FockVector fock_vacuum(int n, int cutoff);
FockVector fock_number_state(const std::vector<int>& m, int cutoff);
FockVector fock_tensor(const FockVector& a, const FockVector& b);

// Applies the gate in place. Truncation losses are added to psi.leakage.
void apply_gate(FockVector& psi, const Gate& g);
void apply_circuit(FockVector& psi, const Circuit& c);

// Circuit applied to vacuum. Throws NumericalError when leakage exceeds leak_tol.
FockVector oracle_state(int n, const Circuit& program, int cutoff, double leak_tol = default_leak_tol);
// Same, doubling the cutoff from `start` until leakage <= leak_tol.
FockVector oracle_state_adaptive(int n, const Circuit& program, double leak_tol, int start = 32, int max_cutoff = 2048);

cplx oracle_overlap(const FockVector& a, const FockVector& b);
// <beta|psi> for a multimode coherent state.
cplx oracle_coherent_amplitude(const FockVector& psi, const CVec& beta);
// Heterodyne density |<beta|psi>|^2 / (pi^n <psi|psi>).
double oracle_born(const FockVector& psi, const CVec& beta);

// exp(G) x for anti-Hermitian G given through `apply` (y = G x), with ||G|| <= lambda.
template <class Apply>
CVec chebyshev_exp(const Apply& apply, const CVec& x, double lambda);

std::vector<double> bessel_j_array(int kmax, double x);

template <class Apply>
CVec chebyshev_exp(const Apply& apply, const CVec& x, double lambda) {
    if (lambda < 1e-15) {
        return x;
    }
    int kmax = static_cast<int>(std::ceil(lambda + 12.0 * std::cbrt(lambda) + 40.0));
    std::vector<double> j = bessel_j_array(kmax, lambda);
    // T_k(H / lambda) x with H = -i G.
    auto h = [&](const CVec& v) -> CVec { return (cplx(0.0, -1.0 / lambda)) * apply(v); };
    CVec prev = x;
    CVec cur = h(x);
    CVec y = j[0] * x + 2.0 * cplx(0.0, 1.0) * j[1] * cur;
    cplx ik = cplx(0.0, 1.0);
    for (int k = 2; k <= kmax; k++) {
        CVec next = 2.0 * h(cur) - prev;
        ik *= cplx(0.0, 1.0);
        y += 2.0 * ik * j[k] * next;
        prev = std::move(cur);
        cur = std::move(next);
    }
    return y;
}

}  // namespace ngs
