#pragma once

#include <vector>

#include "ngsim/linalg.hpp"

namespace ngs {

// Mixed Gaussian state: covariance (vacuum = identity) and quadrature mean.
struct GaussianMixed {
    Mat cov;
    Vec mean;

    int modes() const { return static_cast<int>(mean.size() / 2); }
    void validate() const;

    static GaussianMixed vacuum(int n);
    static GaussianMixed thermal(int n, double nbar);
};

// Holomorphic (Bargmann) parameters: F(z) = c exp(b^T z + z^T A z / 2).
struct StellarParams {
    CMat A;
    CVec b;
    cplx c;
};

// Pure Gaussian state with its phase fixed by the vacuum overlap o = <0|G>.
class GaussianPure {
  public:
    GaussianPure(Mat cov, Vec mean, cplx ref_overlap);

    static GaussianPure vacuum(int n);
    static GaussianPure coherent(const CVec& alpha);
    static GaussianPure coherent(cplx alpha);
    // D(alpha) S(xi) |0> with S(xi) = exp((conj(xi) a^2 - xi a^dag^2)/2).
    static GaussianPure squeezed_coherent(cplx alpha, cplx xi);

    int modes() const { return static_cast<int>(mean_.size() / 2); }
    const Mat& cov() const { return cov_; }
    const Vec& mean() const { return mean_; }
    cplx ref_overlap() const { return ref_; }
    const CMat& A() const { return A_; }
    const CVec& b() const { return b_; }
    StellarParams stellar() const { return {A_, b_, ref_}; }
    GaussianMixed mixed() const { return {cov_, mean_}; }

    // Same ray, global phase multiplied by `phase` (|phase| = 1).
    GaussianPure with_phase(cplx phase) const;
    // <beta|G> for a multimode coherent state |beta>.
    cplx coherent_amplitude(const CVec& beta) const;
    // Mean photon number summed over modes.
    double mean_photon_number() const;

  private:
    Mat cov_;
    Vec mean_;
    cplx ref_;
    CMat A_;
    CVec b_;
};

// (A, b) of the Bargmann function of a pure state with given covariance and mean.
void pure_stellar_ab(const Mat& cov, const Vec& mean, CMat& A, CVec& b);

// Gaussian CPTP map: mean -> X mean + D, cov -> X cov X^T + Y.
struct GaussianChannel {
    Mat X;
    Mat Y;
    Vec D;

    void validate() const;
    static GaussianChannel identity(int n);
    // Additive classical noise: Y = 2 nbar I.
    static GaussianChannel classical_noise(int n, double nbar);
    static GaussianChannel pure_loss(int n, double eta);
};

// General-dyne POVM seed covariance on a subset of modes.
struct GeneralDyne {
    Mat cov_m;
    std::vector<int> modes;

    static GeneralDyne heterodyne(std::vector<int> modes);
    // Finite-squeezing homodyne of q (or p) with squeezing factor z.
    static GeneralDyne homodyne(std::vector<int> modes, bool measure_q = true, double z = 1e6);
};

GaussianMixed displace(const GaussianMixed& state, const Vec& shift);
GaussianMixed apply_symplectic(const GaussianMixed& state, const Mat& S);
GaussianMixed tensor(const GaussianMixed& a, const GaussianMixed& b);
GaussianPure tensor(const GaussianPure& a, const GaussianPure& b);
GaussianMixed partial_trace(const GaussianMixed& state, const std::vector<int>& keep);
GaussianMixed apply_channel(const GaussianMixed& state, const GaussianChannel& ch);
GaussianChannel compose_channels(const GaussianChannel& first, const GaussianChannel& second);

// Density of general-dyne outcome r_m (quadrature units, one (q,p) pair per measured mode).
double generaldyne_density(const GaussianMixed& state, const GeneralDyne& meas, const Vec& outcome);
// Ideal homodyne density of the q quadratures (or p) of the listed modes.
double homodyne_density(const GaussianMixed& state, const std::vector<int>& modes, const Vec& x,
                        bool measure_q = true);
// State of the unmeasured modes after outcome r_m on meas.modes.
GaussianMixed condition_on_generaldyne(const GaussianMixed& state, const GeneralDyne& meas, const Vec& outcome);

// |<phi|rho|phi>| via the Gaussian fidelity formula.
double fidelity_pure(const GaussianMixed& rho, const GaussianPure& phi);
double fidelity_pure(const GaussianMixed& rho, const GaussianMixed& phi);

double mean_photon_number(const GaussianMixed& state);
bool is_pure(const Mat& cov, double tolerance = tol::pure);

std::vector<int> complement_modes(const std::vector<int>& modes, int n);
Vec select_modes(const Vec& v, const std::vector<int>& modes);
Mat select_modes(const Mat& m, const std::vector<int>& rows, const std::vector<int>& cols);

}  // namespace ngs
