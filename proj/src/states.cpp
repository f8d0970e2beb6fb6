#include "ngsim/states.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <fmt/core.h>

#include "ngsim/errors.hpp"
#include "ngsim/parallel.hpp"

namespace ngs {

Superposition::Superposition(std::vector<WeightedGaussian> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) {
        throw ValidationError("Superposition: at least one term required");
    }
    modes_ = terms_.front().term.modes();
    l1_ = 0.0;
    for (const auto& t : terms_) {
        if (t.term.modes() != modes_) {
            throw ValidationError("Superposition: all terms must have the same number of modes");
        }
        if (!std::isfinite(t.coeff.real()) || !std::isfinite(t.coeff.imag())) {
            throw ValidationError("Superposition: non-finite coefficient");
        }
        l1_ += std::abs(t.coeff);
    }
}

CVec Superposition::coefficients() const {
    CVec c(static_cast<Eigen::Index>(terms_.size()));
    for (std::size_t i = 0; i < terms_.size(); i++) {
        c(static_cast<Eigen::Index>(i)) = terms_[i].coeff;
    }
    return c;
}

CMat Superposition::gram() const {
    auto n = static_cast<Eigen::Index>(terms_.size());
    CMat g(n, n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
        auto ii = static_cast<Eigen::Index>(i);
        g(ii, ii) = 1.0;
        for (Eigen::Index j = ii + 1; j < n; j++) {
            g(ii, j) = stellar_overlap(terms_[i].term, terms_[static_cast<std::size_t>(j)].term);
        }
    });
    for (Eigen::Index i = 0; i < n; i++) {
        for (Eigen::Index j = 0; j < i; j++) {
            g(i, j) = std::conj(g(j, i));
        }
    }
    return g;
}

double Superposition::norm2(const CMat& gram) const {
    CVec c = coefficients();
    return c.dot(gram * c).real();
}

double Superposition::norm2() const { return norm2(gram()); }

Superposition Superposition::scaled(cplx factor) const {
    std::vector<WeightedGaussian> t = terms_;
    for (auto& w : t) {
        w.coeff *= factor;
    }
    Superposition out(std::move(t));
    out.tail_l1_ = tail_l1_ * std::abs(factor);
    return out;
}

Superposition Superposition::normalized() const {
    double n2 = norm2();
    if (!(n2 > 0.0)) {
        throw NumericalError("Superposition: zero norm");
    }
    return scaled(1.0 / std::sqrt(n2));
}

Superposition from_recipes(int n, const std::vector<std::pair<cplx, Circuit>>& terms) {
    std::vector<WeightedGaussian> out;
    out.reserve(terms.size());
    for (const auto& [c, circuit] : terms) {
        GaussianPure g = GaussianPure::vacuum(n);
        for (const auto& gate : circuit) {
            g = propagate(g, gate_unitary(gate, n));
        }
        out.push_back({c, g, circuit});
    }
    return Superposition(std::move(out));
}

ExtentReport measures(const Superposition& sup) {
    double n2 = sup.norm2();
    if (!(n2 > 0.0)) {
        throw NumericalError("measures: zero norm");
    }
    if (sup.rank() == 1) {
        return {1, sup.l1(), std::sqrt(n2), 1.0};
    }
    return {sup.rank(), sup.l1(), std::sqrt(n2), sup.l1() * sup.l1() / n2};
}

Superposition fock1_ring(const GaussianPure& seed, int N, std::optional<Circuit> seed_recipe) {
    if (seed.modes() != 1) {
        throw ValidationError("fock1_ring: seed must be single-mode");
    }
    if (N < 2) {
        throw ValidationError("fock1_ring: N must be at least 2");
    }
    cplx psi1 = fock_amplitude(seed, {1});
    if (std::abs(psi1) < 1e-14) {
        throw ValidationError("fock1_ring: seed has no single-photon component");
    }
    std::vector<WeightedGaussian> terms;
    for (int m = 0; m < 2 * N; m++) {
        double theta = M_PI * m / N;
        std::optional<Circuit> recipe;
        if (seed_recipe) {
            recipe = *seed_recipe;
            recipe->push_back(Gate::phase(0, theta));
        }
        terms.push_back({std::polar(1.0, -theta) / (2.0 * N * psi1), propagate(seed, GaussianUnitary::phase(1, 0, theta)),
                         recipe});
    }
    return Superposition(std::move(terms));
}

Superposition fock1_ring(cplx alpha, cplx xi, int N) {
    Circuit recipe{Gate::squeeze(0, xi), Gate::displace(0, alpha)};
    return fock1_ring(GaussianPure::squeezed_coherent(alpha, xi), N, recipe);
}

Superposition cat_state(cplx alpha, int parity) {
    if (parity != 1 && parity != -1) {
        throw ValidationError("cat_state: parity must be +1 or -1");
    }
    if (alpha == cplx(0.0)) {
        if (parity == -1) {
            throw ValidationError("cat_state: odd cat with alpha = 0 is the zero vector");
        }
        return from_recipes(1, {{1.0, {}}});
    }
    double nrm = std::sqrt(2.0 * (1.0 + parity * std::exp(-2.0 * std::norm(alpha))));
    return from_recipes(1, {{1.0 / nrm, {Gate::displace(0, alpha)}}, {parity / nrm, {Gate::displace(0, -alpha)}}});
}

Superposition rotational_code(int M, int mu, cplx alpha) {
    if (M < 1) {
        throw ValidationError("rotational_code: M must be positive");
    }
    if (mu != 0 && mu != 1) {
        throw ValidationError("rotational_code: mu must be 0 or 1");
    }
    std::vector<std::pair<cplx, Circuit>> terms;
    for (int m = 0; m < 2 * M; m++) {
        double sign = (mu * m) % 2 == 0 ? 1.0 : -1.0;
        terms.push_back({sign, {Gate::displace(0, std::polar(1.0, M_PI * m / M) * alpha)}});
    }
    return from_recipes(1, terms).normalized();
}

namespace {

double tail_mass(const std::function<double(int)>& weight, int kept) {
    double tail = 0.0;
    for (int s = kept + 1;; s++) {
        double w = weight(s) + weight(-s);
        tail += w;
        if (w < 1e-300 || w < 1e-18 * tail) {
            break;
        }
    }
    return tail;
}

}  // namespace

Superposition gkp_state(int d, int mu, double kappa, double Delta, int s_max, double tail_tol) {
    if (d < 2 || mu < 0 || mu >= d) {
        throw ValidationError(fmt::format("gkp_state: need d >= 2 and 0 <= mu < d (got d={}, mu={})", d, mu));
    }
    if (s_max < 0 || !(kappa > 0.0) || !(Delta > 0.0)) {
        throw ValidationError("gkp_state: need s_max >= 0, kappa > 0, Delta > 0");
    }
    double ad = std::sqrt(2.0 * M_PI / d);
    auto x = [&](int s) { return ad * (d * s + mu); };
    auto weight = [&](int s) { return std::exp(-0.5 * kappa * kappa * x(s) * x(s)); };
    double r = -std::log(Delta);
    std::vector<std::pair<cplx, Circuit>> terms;
    double kept = 0.0;
    for (int s = -s_max; s <= s_max; s++) {
        kept += weight(s);
        terms.push_back({weight(s), {Gate::squeeze(0, r), Gate::displace(0, x(s) / std::sqrt(2.0))}});
    }
    double tail = tail_mass(weight, s_max);
    if (tail_tol > 0.0 && tail > tail_tol * kept) {
        throw ValidationError(
            fmt::format("gkp_state: s_max = {} leaves relative tail mass {:.3e} above {:.1e}", s_max, tail / kept, tail_tol));
    }
    Superposition raw = from_recipes(1, terms);
    raw.set_tail_l1(tail);
    return raw.normalized();
}

int grid_tmax_for_tail(double Delta, double tail_tol) {
    if (!(Delta > 0.0) || !(tail_tol > 0.0)) {
        throw ValidationError("grid_tmax_for_tail: Delta and tail_tol must be positive");
    }
    auto weight = [&](int t) { return std::exp(-M_PI * Delta * Delta * t * t); };
    double total = 1.0;
    for (int t = 1; weight(t) > 1e-300; t++) {
        total += 2.0 * weight(t);
        if (weight(t) < 1e-18 * total) {
            break;
        }
    }
    int t_max = 0;
    while (tail_mass(weight, t_max) > tail_tol * total) {
        t_max++;
    }
    return t_max;
}

Superposition grid_sensor(double Delta, int t_max, double tail_tol) {
    if (!(Delta > 0.0)) {
        throw ValidationError("grid_sensor: Delta must be positive");
    }
    if (t_max < 0) {
        t_max = grid_tmax_for_tail(Delta, tail_tol);
    }
    auto weight = [&](int t) { return std::exp(-M_PI * Delta * Delta * t * t); };
    double r = -std::log(Delta);
    double spacing = std::sqrt(M_PI / 2.0);
    std::vector<std::pair<cplx, Circuit>> terms;
    for (int t = -t_max; t <= t_max; t++) {
        terms.push_back({weight(t), {Gate::squeeze(0, r), Gate::displace(0, t * spacing / std::sqrt(2.0))}});
    }
    Superposition raw = from_recipes(1, terms);
    raw.set_tail_l1(tail_mass(weight, t_max));
    return raw.normalized();
}

double grid_naive_extent(double Delta, double tail_tol) {
    int t_max = grid_tmax_for_tail(Delta, tail_tol);
    double l1 = 0.0;
    double l2 = 0.0;
    for (int t = -t_max; t <= t_max; t++) {
        double w = std::exp(-M_PI * Delta * Delta * t * t);
        l1 += w;
        l2 += w * w;
    }
    return l1 * l1 / l2;
}

double grid_gram_extent(double Delta, double tail_tol) {
    int t_max = grid_tmax_for_tail(Delta, tail_tol);
    double r = -std::log(Delta);
    double spacing = std::sqrt(M_PI / 2.0);
    std::vector<double> w(2 * t_max + 1);
    double l1 = 0.0;
    for (int t = -t_max; t <= t_max; t++) {
        w[t + t_max] = std::exp(-M_PI * Delta * Delta * t * t);
        l1 += w[t + t_max];
    }
    GaussianPure g0 = GaussianPure::squeezed_coherent(0.0, r);
    double n2 = 0.0;
    for (int k = 0; k <= 2 * t_max; k++) {
        GaussianPure gk = propagate(g0, GaussianUnitary::displacement(1, 0, k * spacing / std::sqrt(2.0)));
        double gval = stellar_overlap(g0, gk).real();
        double corr = 0.0;
        for (int t = 0; t + k <= 2 * t_max; t++) {
            corr += w[t] * w[t + k];
        }
        n2 += (k == 0 ? 1.0 : 2.0) * gval * corr;
        if (k > 0 && std::abs(gval) < 1e-18) {
            break;
        }
    }
    return l1 * l1 / n2;
}

WitnessReport witness_check(const Superposition& sup, const Witness& w, double tolerance) {
    if (static_cast<int>(w.fock.size()) != sup.modes()) {
        throw ValidationError("witness_check: witness multi-index does not match mode count");
    }
    WitnessReport rep;
    for (const auto& t : sup.terms()) {
        rep.values.push_back(std::abs(w.scale * fock_amplitude(t.term, w.fock)));
    }
    rep.min_value = *std::min_element(rep.values.begin(), rep.values.end());
    rep.max_value = *std::max_element(rep.values.begin(), rep.values.end());
    rep.equal_moduli = rep.max_value - rep.min_value <= tolerance;
    return rep;
}

int breeding_lower_bound(double xi_grid) {
    if (!(xi_grid >= 1.0)) {
        throw ValidationError("breeding_lower_bound: xi must be at least 1");
    }
    return static_cast<int>(std::ceil(xi_grid / 2.0));
}

BosonSamplingBound boson_sampling_bound(int Mbar) {
    if (Mbar < 0) {
        throw ValidationError("boson_sampling_bound: Mbar must be non-negative");
    }
    double base = 4.0 * std::exp(1.0) / (3.0 * std::sqrt(3.0));
    return {std::pow(base, Mbar), std::exp(static_cast<double>(Mbar))};
}

double fock1_alpha_opt() { return std::sqrt(2.0 / 3.0); }

double fock1_xi_opt() { return std::log(std::sqrt(3.0)); }

const std::vector<Table1Row>& table1_reference() {
    static const std::vector<Table1Row> rows{{0.3, 2.797, 2},    {0.2, 3.969, 2},    {0.1, 7.496, 4},
                                             {0.05, 14.562, 8},  {0.025, 28.701, 15}, {0.01, 71.126, 36}};
    return rows;
}

}  // namespace ngs
