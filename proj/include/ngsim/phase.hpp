#pragma once

#include <cstdint>
#include <vector>

#include "ngsim/gaussian.hpp"
#include "ngsim/symplectic.hpp"

namespace ngs {

// Value and moments of
//   I = int d^2beta / pi^n exp(-|beta|^2 + u^T beta + v^T conj(beta)
//                               + beta^T P beta / 2 + conj(beta)^T R conj(beta) / 2).
// Moments refer to x = (conj(beta), beta) under the normalized complex weight.
struct GaussianIntegral {
    cplx value;
    CVec mean;
    CMat cov;
};

cplx gaussian_integral(const CMat& P, const CVec& u, const CMat& R, const CVec& v);
GaussianIntegral gaussian_integral_moments(const CMat& P, const CVec& u, const CMat& R, const CVec& v);

struct TripleKernel {
    CMat Delta;
    CVec mu_Delta;
};

TripleKernel triple_kernel(const GaussianMixed& g1, const GaussianMixed& g2);

// T = <G2|G0><G1|G2><G0|G1>.
cplx triple_overlap(const GaussianPure& g0, const GaussianPure& g1, const GaussianPure& g2);

// <G1|G2> through the triple product with the vacuum reference. Falls back once to a
// seeded random squeezed-coherent reference when a vacuum overlap is below tol::ref.
cplx overlap(const GaussianPure& g1, const GaussianPure& g2);
// <G1|G2> through the stellar Gaussian integral.
cplx stellar_overlap(const GaussianPure& g1, const GaussianPure& g2);

// Set of pure Gaussian states whose phases are fixed by overlaps with a common reference.
struct AnchoredSet {
    GaussianPure reference;
    std::vector<GaussianPure> states;
    std::vector<cplx> ref_overlaps;  // <reference|state_i>

    static AnchoredSet from_vacuum(std::vector<GaussianPure> states);
    cplx overlap(std::size_t i, std::size_t j) const;
};

AnchoredSet reanchor(const AnchoredSet& set, const GaussianPure& new_reference);

// Seeded random squeezed-coherent state near `center` (quadrature mean), real positive vacuum overlap.
GaussianPure random_reference(const Vec& center, std::uint64_t seed);

// G = U_O (prod_i S(gamma_i) D(beta_i)) |0>, U_O passive, gamma_i real.
struct BlochMessiahProgram {
    Mat O;
    Vec gamma;
    CVec beta;

    int modes() const { return static_cast<int>(beta.size()); }
};

BlochMessiahProgram bloch_messiah_program(const Mat& cov, const Vec& mean);
cplx ref_overlap_bloch_messiah(const BlochMessiahProgram& program);
// Single-mode <0|S(xi) D(beta)|0>.
cplx vacuum_amplitude_squeezed_displaced(cplx xi, cplx beta);

// Mixed-state parameters in variables nu = (beta, alpha):
//   <conj(alpha)|rho|beta> = exp(-(|alpha|^2+|beta|^2)/2) c exp(b^T nu + nu^T A nu / 2).
StellarParams stellar_from_covariance(const GaussianMixed& rho);

// Kernel of a Gaussian unitary in variables nu = (alpha, beta):
//   <0|exp(alpha.a) U exp(beta.a^dag)|0> = c exp(b^T nu + nu^T A nu / 2).
struct UnitaryStellar {
    CMat A;
    CVec b;
    cplx c;
    GaussianUnitary source;

    int modes() const { return source.modes(); }
    CMat A_aa() const;
    CMat A_ab() const;
    CMat A_bb() const;
    CVec b_a() const;
    CVec b_b() const;
};

// Direct construction; c is chosen real positive.
UnitaryStellar stellar_unitary(const GaussianUnitary& U);
// Parameters of U1 U2 with the product phase tracked.
UnitaryStellar stellar_compose(const UnitaryStellar& U1, const UnitaryStellar& U2);
// <conj(alpha)|U|beta>.
cplx stellar_sandwich(const CVec& alpha, const CVec& beta, const UnitaryStellar& U);

GaussianPure propagate(const GaussianPure& g, const UnitaryStellar& U);
GaussianPure propagate(const GaussianPure& g, const GaussianUnitary& U);

// <m|G> for a multi-index of photon numbers m.
cplx fock_amplitude(const GaussianPure& g, const std::vector<int>& m);
// All amplitudes <m|G> with m_j < cutoff, row-major in mode order (mode 0 slowest).
CVec fock_amplitudes(const GaussianPure& g, int cutoff);

// <G1| sum_j a_j^dag a_j |G2>.
cplx number_matrix_element(const GaussianPure& g1, const GaussianPure& g2);

// Projection of the listed modes on the coherent state |beta>:
//   (<beta| (x) 1)|G> = weight * phase-exact normalized Gaussian on the remaining modes.
struct CoherentProjection {
    GaussianPure state;
    double weight;
};

CoherentProjection project_coherent(const GaussianPure& g, const std::vector<int>& modes, const CVec& beta);

}  // namespace ngs
