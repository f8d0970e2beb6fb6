#pragma once

#include <vector>

#include "ngsim/linalg.hpp"

namespace ngs {

// Single-mode squeezer S(xi) = exp((conj(xi) a^2 - xi a^dag^2)/2) as a 2x2 symplectic.
Mat squeeze_matrix(cplx xi);
// Phase rotation exp(i theta n): (q, p) rotated by theta.
Mat rotation_matrix(double theta);

// Heisenberg map a -> u a + v a^dag  <->  quadrature symplectic.
Mat symplectic_from_bogoliubov(const CMat& u, const CMat& v);
void bogoliubov_from_symplectic(const Mat& S, CMat& u, CMat& v);

// Orthogonal symplectic of the passive unitary with a -> W a.
Mat passive_from_unitary(const CMat& W);
CMat unitary_from_passive(const Mat& O);

// 2x2 mode matrix of exp(theta (e^{i phi} a1^dag a2 - e^{-i phi} a1 a2^dag)).
CMat beamsplitter_unitary(double theta, double phi);

struct BlochMessiahResult {
    Mat O1;
    Mat Z;
    Mat O2;
};

// S = O1 Z O2 with O1, O2 orthogonal symplectic and Z = diag(z1, 1/z1, ...), z_i >= 1.
BlochMessiahResult bloch_messiah(const Mat& S);

// Pure covariance cov = O diag(z1^2, z1^-2, ...) O^T with O orthogonal symplectic, z_i >= 1.
void williamson_pure(const Mat& cov, Mat& O, Vec& z);

// Gaussian unitary U with U^dag r U = S r + d.
struct GaussianUnitary {
    Mat S;
    Vec d;

    int modes() const { return static_cast<int>(d.size() / 2); }

    static GaussianUnitary identity(int n);
    static GaussianUnitary displacement(const CVec& alpha);
    static GaussianUnitary displacement(int n, int mode, cplx alpha);
    static GaussianUnitary squeezing(int n, int mode, cplx xi);
    static GaussianUnitary phase(int n, int mode, double theta);
    static GaussianUnitary beamsplitter(int n, int mode1, int mode2, double theta, double phi);
    static GaussianUnitary passive(const CMat& W);
    static GaussianUnitary symplectic(const Mat& S);
};

enum class GateKind { displace, squeeze, phase, beamsplitter };

// Elementary gate. displace: z = alpha; squeeze: z = xi; phase: theta;
// beamsplitter on (mode1, mode2): theta, phi.
struct Gate {
    GateKind kind;
    int mode1 = 0;
    int mode2 = -1;
    cplx z = 0.0;
    double theta = 0.0;
    double phi = 0.0;

    static Gate displace(int mode, cplx alpha) { return {GateKind::displace, mode, -1, alpha, 0.0, 0.0}; }
    static Gate squeeze(int mode, cplx xi) { return {GateKind::squeeze, mode, -1, xi, 0.0, 0.0}; }
    static Gate phase(int mode, double theta) { return {GateKind::phase, mode, -1, 0.0, theta, 0.0}; }
    static Gate beamsplitter(int m1, int m2, double theta, double phi) {
        return {GateKind::beamsplitter, m1, m2, 0.0, theta, phi};
    }
};

// Gates in application order (first element acts first on the state).
using Circuit = std::vector<Gate>;

GaussianUnitary gate_unitary(const Gate& g, int n);
// Product of the circuit, last gate leftmost.
GaussianUnitary circuit_unitary(const Circuit& c, int n);

// W = diag(e^{i a1}, e^{i a2}) B(theta, 0) diag(1, e^{i b2}) as a circuit on (m1, m2).
Circuit decompose_passive2(const CMat& W, int m1, int m2);

// Operator product U1 U2 (U2 acts first on states).
GaussianUnitary compose(const GaussianUnitary& U1, const GaussianUnitary& U2);
GaussianUnitary inverse(const GaussianUnitary& U);

}  // namespace ngs
