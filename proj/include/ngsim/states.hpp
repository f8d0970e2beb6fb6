#pragma once

#include <optional>
#include <vector>

#include "ngsim/phase.hpp"

namespace ngs {

struct WeightedGaussian {
    cplx coeff;
    GaussianPure term;
    // Gate sequence preparing `term` from vacuum, when known. Used by the Fock oracle.
    std::optional<Circuit> recipe;
};

// |psi> = sum_k c_k |G_k>.
class Superposition {
  public:
    explicit Superposition(std::vector<WeightedGaussian> terms);

    int modes() const { return modes_; }
    std::size_t rank() const { return terms_.size(); }
    double l1() const { return l1_; }
    const std::vector<WeightedGaussian>& terms() const { return terms_; }
    CVec coefficients() const;

    // Gram matrix G_ij = <G_i|G_j> from the stellar backend.
    CMat gram() const;
    // <psi|psi> = c^dag G c.
    double norm2() const;
    double norm2(const CMat& gram) const;

    Superposition scaled(cplx factor) const;
    Superposition normalized() const;

    // l1 mass of coefficients dropped by a finite truncation (same normalization as the terms).
    double tail_l1() const { return tail_l1_; }
    void set_tail_l1(double t) { tail_l1_ = t; }

  private:
    int modes_;
    std::vector<WeightedGaussian> terms_;
    double l1_;
    double tail_l1_ = 0.0;
};

// Superposition of pure Gaussians prepared by gate recipes.
Superposition from_recipes(int n, const std::vector<std::pair<cplx, Circuit>>& terms);

struct ExtentReport {
    std::size_t rank;
    double l1;
    double norm;
    // (sum |c_k|)^2 for the normalized state.
    double extent_upper;

    double approx_rank_bound(double delta) const { return 1.0 + extent_upper / (delta * delta); }
};

ExtentReport measures(const Superposition& sup);

// 2N rotated copies of a single-mode seed projecting onto |1>:
//   |1> ~ sum_m e^{-i pi m/N} / (2N <1|seed>) R(pi m/N)|seed>,  R(theta) = exp(i theta n).
Superposition fock1_ring(const GaussianPure& seed, int N, std::optional<Circuit> seed_recipe = std::nullopt);
// Seed D(alpha) S(xi)|0> with recipe.
Superposition fock1_ring(cplx alpha, cplx xi, int N);

// (|alpha> + parity |-alpha>) / sqrt(2 (1 + parity e^{-2|alpha|^2})).
Superposition cat_state(cplx alpha, int parity);

// sum_{m<2M} (-1)^{mu m} |e^{i pi m/M} alpha>, normalized.
Superposition rotational_code(int M, int mu, cplx alpha);

inline constexpr double default_tail_tol = 1e-8;

// Finite-energy GKP codeword: sum_s exp(-kappa^2 x_s^2 / 2) D(x_s) S(Delta)|0> with
// x_s = sqrt(2 pi / d)(d s + mu) a position shift and S(Delta) of position variance Delta^2.
// tail_tol > 0 requires the dropped relative l1 mass to stay below it.
Superposition gkp_state(int d, int mu, double kappa, double Delta, int s_max, double tail_tol = 0.0);

// Grid sensor state sum_t exp(-pi Delta^2 t^2) D(t sqrt(pi/2)) S(Delta)|0>, |t| <= t_max.
// t_max < 0 selects the smallest range with tail l1 mass below tail_tol.
Superposition grid_sensor(double Delta, int t_max = -1, double tail_tol = default_tail_tol);
int grid_tmax_for_tail(double Delta, double tail_tol);
// (sum |w_t|)^2 / sum |w_t|^2 of the grid envelope, ignoring term overlaps.
double grid_naive_extent(double Delta, double tail_tol = default_tail_tol);
// (sum |w_t|)^2 / <psi|psi> with the exact term overlaps; uses translation invariance
// <G_t|G_t'> = <G_0|G_{t'-t}> so it stays finite for small Delta.
double grid_gram_extent(double Delta, double tail_tol = default_tail_tol);

// Witness <w| = scale <m| for a Fock multi-index m.
struct Witness {
    std::vector<int> fock;
    double scale;
};

struct WitnessReport {
    std::vector<double> values;  // |<w|G_k>|
    double min_value;
    double max_value;
    bool equal_moduli;
};

inline constexpr double witness_tol = 1e-9;

WitnessReport witness_check(const Superposition& sup, const Witness& w, double tolerance = witness_tol);

// ceil(xi / 2).
int breeding_lower_bound(double xi_grid);

struct BosonSamplingBound {
    double bound;      // (4e / (3 sqrt 3))^M
    double classical;  // e^M
};

BosonSamplingBound boson_sampling_bound(int Mbar);

// Gaussian state closest to |1>: D(alpha) S(xi)|0> with alpha = sqrt(2/3), xi = ln sqrt 3,
// |<1|G>|^2 = 3 sqrt(3) / (4e).
double fock1_alpha_opt();
double fock1_xi_opt();

struct Table1Row {
    double Delta;
    double xi_reference;
    int n_reference;
};

const std::vector<Table1Row>& table1_reference();

}  // namespace ngs
