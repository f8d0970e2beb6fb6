#include "ngsim/simulator.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "ngsim/errors.hpp"
#include "ngsim/parallel.hpp"

namespace ngs {

namespace {

constexpr std::uint64_t chunk_size = 4096;

Superposition evolve_with(const Superposition& sup, const UnitaryStellar& us, const Gate* gate) {
    std::vector<WeightedGaussian> terms;
    terms.reserve(sup.rank());
    for (const auto& t : sup.terms()) {
        std::optional<Circuit> recipe;
        if (gate != nullptr && t.recipe) {
            recipe = *t.recipe;
            recipe->push_back(*gate);
        }
        terms.push_back({t.coeff, propagate(t.term, us), recipe});
    }
    Superposition out(std::move(terms));
    out.set_tail_l1(sup.tail_l1());
    return out;
}

// sum_i w_i <beta|G_i>
cplx superposed_amplitude(const Superposition& sup, const CVec& beta) {
    cplx acc = 0.0;
    for (const auto& t : sup.terms()) {
        acc += t.coeff * t.term.coherent_amplitude(beta);
    }
    return acc;
}

}  // namespace

Superposition evolve(const Superposition& sup, const GaussianUnitary& op) {
    if (op.modes() != sup.modes()) {
        throw ValidationError("evolve: mode count mismatch");
    }
    return evolve_with(sup, stellar_unitary(op), nullptr);
}

Superposition evolve(const Superposition& sup, const Gate& gate) {
    return evolve_with(sup, stellar_unitary(gate_unitary(gate, sup.modes())), &gate);
}

Superposition evolve(const Superposition& sup, const Circuit& circuit) {
    Superposition out = sup;
    for (const auto& g : circuit) {
        out = evolve(out, g);
    }
    return out;
}

ConditionResult condition(const Superposition& sup, const std::vector<int>& modes, const CVec& beta) {
    std::vector<WeightedGaussian> terms;
    for (const auto& t : sup.terms()) {
        CoherentProjection pr = project_coherent(t.term, modes, beta);
        if (pr.weight > 0.0) {
            terms.push_back({t.coeff * pr.weight, pr.state, std::nullopt});
        }
    }
    if (terms.empty()) {
        throw NumericalError("condition: outcome has vanishing amplitude on every term");
    }
    Superposition raw(std::move(terms));
    double n2 = raw.norm2();
    double total = sup.norm2();
    if (!(n2 > 0.0)) {
        throw NumericalError("condition: conditional state has zero norm");
    }
    double norm = std::sqrt(n2 / total);
    return {raw.scaled(1.0 / std::sqrt(n2)), norm,
            norm * norm / std::pow(M_PI, static_cast<double>(modes.size()))};
}

BornEstimate exact_born(const Superposition& sup, const CVec& beta) {
    if (beta.size() != sup.modes()) {
        throw ValidationError("exact_born: outcome dimension does not match mode count");
    }
    double num = std::norm(superposed_amplitude(sup, beta));
    double den = sup.norm2();
    if (!(den > 0.0)) {
        throw NumericalError("exact_born: zero norm");
    }
    double value = num / (std::pow(M_PI, sup.modes()) * den);
    std::uint64_t chi = sup.rank();
    return {"exact", value, num, den, value, value, chi + chi * (chi - 1) / 2, 0, false};
}

BornEstimate exact_born(const Superposition& sup, const std::vector<int>& modes, const CVec& beta) {
    if (static_cast<int>(modes.size()) == sup.modes()) {
        CVec b(beta.size());
        for (std::size_t i = 0; i < modes.size(); i++) {
            b(modes[i]) = beta(static_cast<Eigen::Index>(i));
        }
        return exact_born(sup, b);
    }
    ConditionResult cr = condition(sup, modes, beta);
    std::uint64_t chi = sup.rank();
    std::uint64_t chi2 = cr.state.rank();
    double value = cr.density;
    bool clamped = false;
    if (value < 0.0) {
        clamped = value >= -clamp_tol;
        value = 0.0;
    }
    return {"exact", value, cr.norm * cr.norm, 1.0, value, value, chi + chi * (chi - 1) / 2 + chi2 * (chi2 - 1) / 2, 0,
            clamped};
}

SparsifyPlan make_sparsify_plan(const Superposition& sup, double delta, std::uint64_t seed) {
    if (!(delta > 0.0)) {
        throw ValidationError("sparsify: delta must be positive");
    }
    double k = std::ceil(std::pow(sup.l1() / delta, 2) - 1e-9);
    return {delta, static_cast<std::uint64_t>(std::max(1.0, k)), seed};
}

std::vector<std::uint64_t> sparsify_counts(const Superposition& sup, std::uint64_t k, std::mt19937_64& eng) {
    std::vector<std::uint64_t> counts(sup.rank(), 0);
    double remaining_mass = sup.l1();
    std::uint64_t remaining = k;
    for (std::size_t i = 0; i < sup.rank() && remaining > 0; i++) {
        double p = std::abs(sup.terms()[i].coeff);
        if (i + 1 == sup.rank() || p >= remaining_mass) {
            counts[i] = remaining;
            remaining = 0;
            break;
        }
        std::binomial_distribution<std::uint64_t> bin(remaining, std::clamp(p / remaining_mass, 0.0, 1.0));
        counts[i] = bin(eng);
        remaining -= counts[i];
        remaining_mass -= p;
    }
    return counts;
}

Superposition sparsify_from_counts(const Superposition& sup, const std::vector<std::uint64_t>& counts, std::uint64_t k) {
    std::vector<WeightedGaussian> terms;
    for (std::size_t i = 0; i < counts.size(); i++) {
        if (counts[i] == 0) {
            continue;
        }
        const auto& t = sup.terms()[i];
        cplx phase = t.coeff / std::abs(t.coeff);
        terms.push_back({sup.l1() * static_cast<double>(counts[i]) / static_cast<double>(k), t.term.with_phase(phase),
                         std::nullopt});
    }
    return Superposition(std::move(terms));
}

Superposition sparsify(const Superposition& sup, const SparsifyPlan& plan) {
    std::mt19937_64 eng = stream_engine(plan.seed, 0);
    return sparsify_from_counts(sup, sparsify_counts(sup, plan.k, eng), plan.k);
}

SparsifyError sparsify_error(const Superposition& sup, const CMat& gram, const std::vector<std::uint64_t>& counts,
                             std::uint64_t k) {
    CVec c = sup.coefficients();
    CVec w(c.size());
    for (Eigen::Index i = 0; i < c.size(); i++) {
        double mag = std::abs(c(i));
        w(i) = mag > 0.0 ? sup.l1() * static_cast<double>(counts[static_cast<std::size_t>(i)]) / static_cast<double>(k) *
                               (c(i) / mag)
                         : cplx(0.0);
    }
    CVec d = c - w;
    return {d.dot(gram * d).real(), w.dot(gram * w).real(), c.dot(gram * w)};
}

double mean_photon_number(const Superposition& sup) {
    const auto& t = sup.terms();
    auto chi = t.size();
    std::vector<cplx> rows(chi, 0.0);
    parallel_for(chi, [&](std::size_t i) {
        cplx acc = 0.0;
        for (std::size_t j = 0; j < chi; j++) {
            acc += std::conj(t[i].coeff) * t[j].coeff * number_matrix_element(t[i].term, t[j].term);
        }
        rows[i] = acc;
    });
    cplx num = 0.0;
    for (cplx r : rows) {
        num += r;
    }
    return num.real() / sup.norm2();
}

std::uint64_t fast_norm_samples(int n, double ensemble_n, const NormOptions& opt) {
    if (opt.samples > 0) {
        return opt.samples;
    }
    double scale = 1.0 / (opt.epsilon * opt.epsilon * opt.p_fail);
    double l = 0.0;
    if (opt.rule == SampleRule::guarantee) {
        l = std::pow(ensemble_n / 2.0, n) * scale;
    } else {
        double pin = std::pow(M_PI, n);
        l = (std::pow(2.0, -n) * std::pow(ensemble_n, n) + opt.delta * pin) / pin * scale;
    }
    return static_cast<std::uint64_t>(std::max(1.0, std::ceil(l - 1e-9)));
}

NormEstimate fast_norm(const Superposition& sup, const NormOptions& opt) {
    if (!(opt.epsilon > 0.0 && opt.epsilon < 1.0) || !(opt.p_fail > 0.0 && opt.p_fail < 1.0)) {
        throw ValidationError("fast_norm: epsilon and p_fail must lie in (0, 1)");
    }
    int n = sup.modes();
    double nphot = opt.mean_photons;
    if (nphot < 0.0 && opt.ensemble_n <= 0.0) {
        nphot = mean_photon_number(sup);
    }
    double big_n = opt.ensemble_n > 0.0 ? opt.ensemble_n : std::max(20.0, 10.0 * nphot);
    if (nphot >= 0.0 && big_n < nphot) {
        throw ValidationError(
            fmt::format("fast_norm: ensemble width {} below the mean photon number {}", big_n, nphot));
    }
    std::uint64_t L = fast_norm_samples(n, big_n, opt);
    std::uint64_t chunks = (L + chunk_size - 1) / chunk_size;
    std::vector<double> sum(chunks, 0.0);
    std::vector<double> sum2(chunks, 0.0);
    double scale = std::pow(big_n, n);
    double sd = std::sqrt(big_n / 2.0);
    parallel_for(
        chunks,
        [&](std::size_t ci) {
            std::mt19937_64 eng = stream_engine(opt.seed, ci);
            std::normal_distribution<double> gauss(0.0, sd);
            std::uint64_t begin = ci * chunk_size;
            std::uint64_t end = std::min<std::uint64_t>(L, begin + chunk_size);
            CVec xi(n);
            double s = 0.0;
            double s2 = 0.0;
            for (std::uint64_t i = begin; i < end; i++) {
                for (int j = 0; j < n; j++) {
                    double re = gauss(eng);
                    double im = gauss(eng);
                    xi(j) = cplx(re, im);
                }
                double x = scale * std::norm(superposed_amplitude(sup, xi));
                s += x;
                s2 += x * x;
            }
            sum[ci] = s;
            sum2[ci] = s2;
        },
        opt.threads);
    double total = 0.0;
    double total2 = 0.0;
    for (std::uint64_t ci = 0; ci < chunks; ci++) {
        total += sum[ci];
        total2 += sum2[ci];
    }
    double eta = total / static_cast<double>(L);
    double var = std::max(0.0, total2 / static_cast<double>(L) - eta * eta);
    NormEstimate est;
    est.eta = eta;
    est.L = L;
    est.ensemble_n = big_n;
    est.mean_photons = nphot;
    est.delta_bias = nphot >= 0.0 ? (nphot + n) / big_n : std::nan("");
    est.epsilon = opt.epsilon;
    est.p_fail = opt.p_fail;
    est.std_error = std::sqrt(var / static_cast<double>(L));
    est.amplitude_evals = L * sup.rank();
    est.seed = opt.seed;
    return est;
}

BornEstimate approx_born(const Superposition& sup, const CVec& beta, const ApproxBornOptions& opt) {
    if (beta.size() != sup.modes()) {
        throw ValidationError("approx_born: outcome dimension does not match mode count");
    }
    SparsifyPlan plan = make_sparsify_plan(sup, opt.delta, opt.norm.seed);
    Superposition omega = sparsify(sup, plan);
    double num = std::norm(superposed_amplitude(omega, beta));
    NormOptions nopt = opt.norm;
    nopt.seed = opt.norm.seed ^ 0x9e3779b97f4a7c15ULL;
    if (nopt.mean_photons < 0.0) {
        nopt.mean_photons = mean_photon_number(omega);
    }
    NormEstimate est = fast_norm(omega, nopt);
    double pin = std::pow(M_PI, sup.modes());
    double value = num / (pin * est.eta);

    double e = est.epsilon + est.delta_bias;
    double amp = std::sqrt(num);
    double om_lo = std::sqrt(est.eta / (1.0 + e));
    double om_hi = e < 1.0 ? std::sqrt(est.eta / (1.0 - e)) : INFINITY;
    double psi_lo = std::max(0.0, om_lo - opt.delta);
    double psi_hi = om_hi + opt.delta;
    double a_lo = std::max(0.0, amp - opt.delta);
    double a_hi = amp + opt.delta;
    double lo = a_lo * a_lo / (pin * psi_hi * psi_hi);
    double hi = psi_lo > 0.0 ? a_hi * a_hi / (pin * psi_lo * psi_lo) : INFINITY;
    return {"sparsified", value, num, est.eta, lo, hi, omega.rank() + est.amplitude_evals, plan.k + est.L, false};
}

HoeffdingReport hoeffding_tail_check(const Superposition& sup, double delta, std::uint64_t trials, std::uint64_t seed,
                                     double fidelity_bound) {
    if (trials == 0 || !(fidelity_bound > 0.0)) {
        throw ValidationError("hoeffding_tail_check: need trials > 0 and a positive fidelity bound");
    }
    SparsifyPlan plan = make_sparsify_plan(sup, delta, seed);
    CMat gram = sup.gram();
    double psi2 = sup.norm2(gram);
    std::vector<int> fail(trials, 0);
    parallel_for(trials, [&](std::size_t t) {
        std::mt19937_64 eng = stream_engine(seed, t);
        auto counts = sparsify_counts(sup, plan.k, eng);
        SparsifyError err = sparsify_error(sup, gram, counts, plan.k);
        fail[t] = err.distance2 > err.omega_norm2 - psi2 + delta * delta ? 1 : 0;
    });
    HoeffdingReport rep;
    rep.trials = trials;
    rep.failures = 0;
    for (int f : fail) {
        rep.failures += static_cast<std::uint64_t>(f);
    }
    rep.frequency = static_cast<double>(rep.failures) / static_cast<double>(trials);
    rep.bound = std::min(1.0, 2.0 * std::exp(-delta * delta / (8.0 * fidelity_bound)));
    rep.slack = 3.0 * std::sqrt(rep.bound * (1.0 - rep.bound) / static_cast<double>(trials));
    rep.passed = rep.frequency <= rep.bound + rep.slack;
    return rep;
}

const Superposition& sample_ensemble_member(const std::vector<std::pair<double, Superposition>>& ensemble,
                                            std::uint64_t seed) {
    if (ensemble.empty()) {
        throw ValidationError("sample_ensemble_member: empty ensemble");
    }
    double total = 0.0;
    for (const auto& [p, s] : ensemble) {
        if (!(p >= 0.0)) {
            throw ValidationError("sample_ensemble_member: negative probability");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw ValidationError(fmt::format("sample_ensemble_member: probabilities sum to {}", total));
    }
    std::mt19937_64 eng = stream_engine(seed, 0);
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(eng);
    double acc = 0.0;
    for (const auto& member : ensemble) {
        acc += member.first;
        if (u < acc) {
            return member.second;
        }
    }
    for (auto it = ensemble.rbegin(); it != ensemble.rend(); ++it) {
        if (it->first > 0.0) {
            return it->second;
        }
    }
    return ensemble.back().second;
}

double seddon_critical_precision(double C, double l1) {
    if (!(l1 > 0.0)) {
        throw ValidationError("seddon_critical_precision: l1 must be positive");
    }
    return 8.0 * (C - 1.0) / (l1 * l1);
}

}  // namespace ngs
