#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ngsim/states.hpp"

namespace ngs {

// Term-wise Gaussian evolution; coefficients, rank and l1 are unchanged.
Superposition evolve(const Superposition& sup, const GaussianUnitary& op);
// Single gate; recipes are extended when present.
Superposition evolve(const Superposition& sup, const Gate& gate);
Superposition evolve(const Superposition& sup, const Circuit& circuit);

struct ConditionResult {
    Superposition state;  // normalized, on the unmeasured modes (ascending order)
    double norm;          // ||(<beta| (x) 1)|psi>|| / ||psi||
    double density;       // heterodyne outcome density norm^2 / pi^k
};

// Heterodyne outcome beta on `modes`. Terms whose projected weight underflows are dropped.
ConditionResult condition(const Superposition& sup, const std::vector<int>& modes, const CVec& beta);

struct BornEstimate {
    std::string method;  // "exact" or "sparsified"
    double value;        // density per d^2beta (coherent POVM |beta><beta| / pi^n)
    double numerator;    // |<beta|psi>|^2 or |<beta|Omega>|^2
    double norm;         // <psi|psi> or the estimate of <Omega|Omega>
    double band_lo;
    double band_hi;
    std::uint64_t amplitude_evals;
    std::uint64_t samples;
    bool clamped;
};

inline constexpr double clamp_tol = 1e-12;

BornEstimate exact_born(const Superposition& sup, const CVec& beta);
// Outcome on a subset of modes; unmeasured modes traced out.
BornEstimate exact_born(const Superposition& sup, const std::vector<int>& modes, const CVec& beta);

struct SparsifyPlan {
    double delta;
    std::uint64_t k;
    std::uint64_t seed;
};

// k = ceil((l1 / delta)^2).
SparsifyPlan make_sparsify_plan(const Superposition& sup, double delta, std::uint64_t seed);

// Multiplicities of the k IID draws with p(i) = |c_i| / l1.
std::vector<std::uint64_t> sparsify_counts(const Superposition& sup, std::uint64_t k, std::mt19937_64& eng);
// Omega with one term per distinct draw: coefficient (l1 / k) * count, phase folded into the term.
Superposition sparsify_from_counts(const Superposition& sup, const std::vector<std::uint64_t>& counts, std::uint64_t k);
Superposition sparsify(const Superposition& sup, const SparsifyPlan& plan);

// ||psi - Omega||^2 and <Omega|Omega> from the Gram matrix of sup.
struct SparsifyError {
    double distance2;
    double omega_norm2;
    cplx psi_omega;  // <psi|Omega>
};

SparsifyError sparsify_error(const Superposition& sup, const CMat& gram, const std::vector<std::uint64_t>& counts,
                             std::uint64_t k);

enum class SampleRule {
    // L = ceil((N/2)^n / (eps^2 p_f)); Chebyshev with the second-moment bound E[X^2] <= (N/2)^n ||Omega||^4.
    guarantee,
    // L = ceil((2^-n N^n + delta pi^n) / pi^n / (eps^2 p_f)).
    compact,
};

struct NormOptions {
    double epsilon = 0.1;
    double p_fail = 0.05;
    double ensemble_n = 0.0;    // <= 0: max(20, 10 N_Omega)
    double delta = 0.0;         // only enters the compact rule
    double mean_photons = -1.0;  // < 0: computed (O(chi^2)) unless ensemble_n is set
    SampleRule rule = SampleRule::guarantee;
    std::uint64_t samples = 0;  // > 0 overrides the rule
    std::uint64_t seed = 0;
    int threads = 0;
};

struct NormEstimate {
    double eta;
    std::uint64_t L;
    double ensemble_n;
    double mean_photons;  // N_Omega used for the bias bound (negative when not computed)
    double delta_bias;    // (N_Omega + n) / N, NaN when N_Omega is unknown
    double epsilon;
    double p_fail;
    double std_error;
    std::uint64_t amplitude_evals;
    std::uint64_t seed;
};

// <Omega|N|Omega> / <Omega|Omega>, O(chi^2).
double mean_photon_number(const Superposition& sup);
std::uint64_t fast_norm_samples(int n, double ensemble_n, const NormOptions& opt);
NormEstimate fast_norm(const Superposition& sup, const NormOptions& opt);

struct ApproxBornOptions {
    double delta = 0.1;
    NormOptions norm;
};

BornEstimate approx_born(const Superposition& sup, const CVec& beta, const ApproxBornOptions& opt);

struct HoeffdingReport {
    std::uint64_t trials;
    std::uint64_t failures;
    double frequency;
    double bound;  // min(1, 2 exp(-delta^2 / (8 F)))
    double slack;  // three binomial standard deviations at the bound
    bool passed;
};

// Frequency of ||psi - Omega||^2 > <Omega|Omega> - 1 + delta^2 over seeded sparsifications.
// F defaults to 1, an upper bound on the Gaussian fidelity of any state.
HoeffdingReport hoeffding_tail_check(const Superposition& sup, double delta, std::uint64_t trials, std::uint64_t seed,
                                     double fidelity_bound = 1.0);

// Draws member j with probability p_j.
const Superposition& sample_ensemble_member(const std::vector<std::pair<double, Superposition>>& ensemble,
                                            std::uint64_t seed);

// Critical precision 8 (C - 1) / l1^2 of the renormalized sampling variant (reporting only).
double seddon_critical_precision(double C, double l1);

}  // namespace ngs
