#include "ngsim/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include <fmt/core.h>
#include <gsl/gsl_multimin.h>

#include "ngsim/fock.hpp"
#include "ngsim/parallel.hpp"
#include "ngsim/phase.hpp"

namespace ngs::cli {

namespace {

std::string field(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

const json& require(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw ValidationError(fmt::format("{}: missing required field", field(path, key)));
    }
    return obj.at(key);
}

double as_double(const json& v, const std::string& path) {
    if (!v.is_number()) {
        throw ValidationError(fmt::format("{}: expected a number", path));
    }
    double x = v.get<double>();
    if (!std::isfinite(x)) {
        throw ValidationError(fmt::format("{}: must be finite", path));
    }
    return x;
}

int as_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) {
        throw ValidationError(fmt::format("{}: expected an integer", path));
    }
    return v.get<int>();
}

double get_double(const json& obj, const std::string& key, const std::string& path, double fallback) {
    return obj.contains(key) ? as_double(obj.at(key), field(path, key)) : fallback;
}

int get_int(const json& obj, const std::string& key, const std::string& path, int fallback) {
    return obj.contains(key) ? as_int(obj.at(key), field(path, key)) : fallback;
}

CVec parse_complex_vector(const json& v, const std::string& path) {
    if (!v.is_array()) {
        throw ValidationError(fmt::format("{}: expected an array of complex numbers", path));
    }
    CVec out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); i++) {
        out(static_cast<Eigen::Index>(i)) = parse_complex(v[i], fmt::format("{}[{}]", path, i));
    }
    return out;
}

std::vector<int> parse_modes(const json& v, const std::string& path, int n) {
    if (!v.is_array() || v.empty()) {
        throw ValidationError(fmt::format("{}: expected a non-empty array of mode indices", path));
    }
    std::vector<int> out;
    for (std::size_t i = 0; i < v.size(); i++) {
        int m = as_int(v[i], fmt::format("{}[{}]", path, i));
        if (m < 0 || m >= n) {
            throw ValidationError(fmt::format("{}[{}]: mode {} out of range for {} modes", path, i, m, n));
        }
        if (std::find(out.begin(), out.end(), m) != out.end()) {
            throw ValidationError(fmt::format("{}[{}]: duplicate mode {}", path, i, m));
        }
        out.push_back(m);
    }
    return out;
}

int parse_mode(const json& obj, const std::string& key, const std::string& path, int n) {
    int m = as_int(require(obj, key, path), field(path, key));
    if (m < 0 || m >= n) {
        throw ValidationError(fmt::format("{}: mode {} out of range for {} modes", field(path, key), m, n));
    }
    return m;
}

Mat parse_matrix(const json& v, Eigen::Index rows, Eigen::Index cols, const std::string& path) {
    if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != rows) {
        throw ValidationError(fmt::format("{}: expected {} rows", path, rows));
    }
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; i++) {
        const json& row = v[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw ValidationError(fmt::format("{}[{}]: expected {} columns", path, i, cols));
        }
        for (Eigen::Index j = 0; j < cols; j++) {
            m(i, j) = as_double(row[static_cast<std::size_t>(j)], fmt::format("{}[{}][{}]", path, i, j));
        }
    }
    return m;
}

Vec parse_real_vector(const json& v, Eigen::Index size, const std::string& path) {
    if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != size) {
        throw ValidationError(fmt::format("{}: expected {} numbers", path, size));
    }
    Vec out(size);
    for (Eigen::Index i = 0; i < size; i++) {
        out(i) = as_double(v[static_cast<std::size_t>(i)], fmt::format("{}[{}]", path, i));
    }
    return out;
}

void check_state_spec(const StateSpec& s, int n) {
    const std::string p = "initial";
    const json& q = s.params;
    if (s.type == "vacuum") {
        return;
    }
    if (s.type == "coherent" || s.type == "squeezed") {
        CVec a = parse_complex_vector(require(q, "alpha", p), field(p, "alpha"));
        if (a.size() != n) {
            throw ValidationError(fmt::format("initial.alpha: expected {} entries", n));
        }
        if (s.type == "squeezed") {
            CVec z = parse_complex_vector(require(q, "xi", p), field(p, "xi"));
            if (z.size() != n) {
                throw ValidationError(fmt::format("initial.xi: expected {} entries", n));
            }
        }
        return;
    }
    if (s.type == "cat") {
        parse_complex(require(q, "alpha", p), field(p, "alpha"));
        int parity = get_int(q, "parity", p, 1);
        if (parity != 1 && parity != -1) {
            throw ValidationError("initial.parity: must be +1 or -1");
        }
        return;
    }
    if (s.type == "gkp") {
        if (get_int(q, "d", p, 2) < 1) {
            throw ValidationError("initial.d: must be positive");
        }
        get_int(q, "mu", p, 0);
        if (!(as_double(require(q, "kappa", p), "initial.kappa") > 0.0)) {
            throw ValidationError("initial.kappa: must be positive");
        }
        if (!(as_double(require(q, "Delta", p), "initial.Delta") > 0.0)) {
            throw ValidationError("initial.Delta: must be positive");
        }
        if (get_int(q, "s_max", p, 5) < 0) {
            throw ValidationError("initial.s_max: must be non-negative");
        }
        return;
    }
    if (s.type == "grid") {
        if (!(as_double(require(q, "Delta", p), "initial.Delta") > 0.0)) {
            throw ValidationError("initial.Delta: must be positive");
        }
        get_int(q, "t_max", p, -1);
        return;
    }
    if (s.type == "fock1_ring") {
        if (get_int(q, "N", p, 16) < 1) {
            throw ValidationError("initial.N: must be positive");
        }
        if (q.contains("alpha")) {
            parse_complex(q.at("alpha"), "initial.alpha");
        }
        if (q.contains("xi")) {
            parse_complex(q.at("xi"), "initial.xi");
        }
        return;
    }
    throw ValidationError(fmt::format("initial.type: unknown state constructor '{}'", s.type));
}

Operation parse_op(const json& op, const std::string& p, int& n) {
    if (!op.is_object()) {
        throw ValidationError(fmt::format("{}: expected an object", p));
    }
    const json& kind_v = require(op, "op", p);
    if (!kind_v.is_string()) {
        throw ValidationError(fmt::format("{}.op: expected a string", p));
    }
    std::string kind = kind_v.get<std::string>();
    if (kind == "displace") {
        return Gate::displace(parse_mode(op, "mode", p, n), parse_complex(require(op, "alpha", p), field(p, "alpha")));
    }
    if (kind == "squeeze") {
        return Gate::squeeze(parse_mode(op, "mode", p, n), parse_complex(require(op, "xi", p), field(p, "xi")));
    }
    if (kind == "phase") {
        return Gate::phase(parse_mode(op, "mode", p, n), as_double(require(op, "theta", p), field(p, "theta")));
    }
    if (kind == "beamsplitter") {
        std::vector<int> m = parse_modes(require(op, "modes", p), field(p, "modes"), n);
        if (m.size() != 2) {
            throw ValidationError(fmt::format("{}.modes: a beamsplitter needs exactly two modes", p));
        }
        return Gate::beamsplitter(m[0], m[1], as_double(require(op, "theta", p), field(p, "theta")),
                                  get_double(op, "phi", p, 0.0));
    }
    if (kind == "symplectic") {
        Mat S = parse_matrix(require(op, "S", p), 2 * n, 2 * n, field(p, "S"));
        if (!is_symplectic(S)) {
            throw ValidationError(fmt::format("{}.S: matrix is not symplectic", p));
        }
        Vec d = op.contains("d") ? parse_real_vector(op.at("d"), 2 * n, field(p, "d")) : Vec(Vec::Zero(2 * n));
        return SymplecticOp{S, d};
    }
    if (kind == "channel") {
        std::string type = require(op, "type", p).is_string() ? op.at("type").get<std::string>() : "";
        std::vector<int> modes = op.contains("modes") ? parse_modes(op.at("modes"), field(p, "modes"), n)
                                                      : complement_modes({}, n);
        GaussianChannel ch = GaussianChannel::identity(n);
        for (int m : modes) {
            if (type == "loss") {
                double eta = as_double(require(op, "eta", p), field(p, "eta"));
                if (eta < 0.0 || eta > 1.0) {
                    throw ValidationError(fmt::format("{}.eta: must lie in [0, 1]", p));
                }
                ch.X.block<2, 2>(2 * m, 2 * m) *= std::sqrt(eta);
                ch.Y.block<2, 2>(2 * m, 2 * m) += (1.0 - eta) * Mat::Identity(2, 2);
            } else if (type == "noise") {
                double nbar = as_double(require(op, "nbar", p), field(p, "nbar"));
                if (nbar < 0.0) {
                    throw ValidationError(fmt::format("{}.nbar: must be non-negative", p));
                }
                ch.Y.block<2, 2>(2 * m, 2 * m) += 2.0 * nbar * Mat::Identity(2, 2);
            } else {
                throw ValidationError(fmt::format("{}.type: unknown channel '{}' (loss | noise)", p, type));
            }
        }
        ch.validate();
        return ChannelOp{ch};
    }
    if (kind == "condition") {
        std::vector<int> modes = parse_modes(require(op, "modes", p), field(p, "modes"), n);
        CVec beta = parse_complex_vector(require(op, "beta", p), field(p, "beta"));
        if (beta.size() != static_cast<Eigen::Index>(modes.size())) {
            throw ValidationError(fmt::format("{}.beta: expected {} outcomes", p, modes.size()));
        }
        if (static_cast<int>(modes.size()) >= n) {
            throw ValidationError(fmt::format("{}.modes: at least one mode must stay unmeasured", p));
        }
        n -= static_cast<int>(modes.size());
        return ConditionOp{modes, beta};
    }
    throw ValidationError(fmt::format("{}.op: unknown operation '{}'", p, kind));
}

void check_prob(double x, const std::string& path) {
    if (!(x > 0.0 && x < 1.0)) {
        throw ValidationError(fmt::format("{}: must lie in (0, 1)", path));
    }
}

void check_task(const TaskSpec& t, int n_final) {
    const std::string p = "task";
    const json& q = t.params;
    auto check_beta = [&] {
        CVec beta = parse_complex_vector(require(q, "beta", p), "task.beta");
        int expect = n_final;
        if (q.contains("modes")) {
            expect = static_cast<int>(parse_modes(q.at("modes"), "task.modes", n_final).size());
        }
        if (beta.size() != expect) {
            throw ValidationError(fmt::format("task.beta: expected {} outcomes", expect));
        }
    };
    if (t.kind == "exact_born") {
        check_beta();
    } else if (t.kind == "approx_born") {
        check_beta();
        if (!(get_double(q, "delta", p, 0.1) > 0.0)) {
            throw ValidationError("task.delta: must be positive");
        }
        check_prob(get_double(q, "epsilon", p, 0.1), "task.epsilon");
        check_prob(get_double(q, "p_fail", p, 0.05), "task.p_fail");
    } else if (t.kind == "norm") {
        check_prob(get_double(q, "epsilon", p, 0.1), "task.epsilon");
        check_prob(get_double(q, "p_fail", p, 0.05), "task.p_fail");
        if (q.contains("delta") && !(as_double(q.at("delta"), "task.delta") > 0.0)) {
            throw ValidationError("task.delta: must be positive");
        }
    } else if (t.kind == "extent") {
        if (q.contains("delta") && !(as_double(q.at("delta"), "task.delta") > 0.0)) {
            throw ValidationError("task.delta: must be positive");
        }
    } else if (t.kind == "breed_bound") {
        if (q.contains("xi") && !(as_double(q.at("xi"), "task.xi") >= 1.0)) {
            throw ValidationError("task.xi: an extent is at least 1");
        }
    } else if (t.kind == "bs_bound") {
        if (as_int(require(q, "mbar", p), "task.mbar") < 1) {
            throw ValidationError("task.mbar: must be positive");
        }
    } else if (t.kind == "optimize_fidelity") {
        std::string target = q.value("target", std::string("11"));
        if (target != "11" && target != "1") {
            throw ValidationError("task.target: must be \"11\" or \"1\"");
        }
        if (get_int(q, "restarts", p, 32) < 1) {
            throw ValidationError("task.restarts: must be positive");
        }
        if (get_int(q, "budget", p, 20000) < 1) {
            throw ValidationError("task.budget: must be positive");
        }
        if (!(get_double(q, "tolerance", p, 1e-10) > 0.0)) {
            throw ValidationError("task.tolerance: must be positive");
        }
    } else {
        throw ValidationError(fmt::format("task.type: unknown task '{}'", t.kind));
    }
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
    int line = 1;
    int col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); i++) {
        if (text[i] == '\n') {
            line++;
            col = 1;
        } else {
            col++;
        }
    }
    return {line, col};
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

Superposition embed(const Superposition& one, int n) {
    if (n == 1) {
        return one;
    }
    GaussianPure vac = GaussianPure::vacuum(n - 1);
    std::vector<WeightedGaussian> terms;
    for (const auto& t : one.terms()) {
        terms.push_back({t.coeff, tensor(t.term, vac), t.recipe});
    }
    Superposition out(std::move(terms));
    out.set_tail_l1(one.tail_l1());
    return out;
}

struct Evolved {
    std::optional<Superposition> pure;
    std::optional<GaussianMixed> mixed;
    json conditioning = json::array();
    bool recipes = true;
};

Evolved evolve_program(const CircuitProgram& prog) {
    Evolved st;
    st.pure = build_state(prog.initial, prog.modes);
    for (std::size_t i = 0; i < prog.ops.size(); i++) {
        const Operation& op = prog.ops[i];
        std::string p = fmt::format("ops[{}]", i);
        if (const auto* g = std::get_if<Gate>(&op)) {
            if (st.pure) {
                st.pure = evolve(*st.pure, *g);
            } else {
                GaussianUnitary u = gate_unitary(*g, st.mixed->modes());
                st.mixed = displace(apply_symplectic(*st.mixed, u.S), u.d);
            }
        } else if (const auto* s = std::get_if<SymplecticOp>(&op)) {
            GaussianUnitary u{s->S, s->d};
            st.recipes = false;
            if (st.pure) {
                st.pure = evolve(*st.pure, u);
            } else {
                st.mixed = displace(apply_symplectic(*st.mixed, u.S), u.d);
            }
        } else if (const auto* c = std::get_if<ChannelOp>(&op)) {
            st.recipes = false;
            if (st.pure) {
                if (st.pure->rank() != 1) {
                    throw ValidationError(fmt::format(
                        "{}: channels are only supported on Gaussian (rank-1) states, got rank {}", p, st.pure->rank()));
                }
                st.mixed = st.pure->terms()[0].term.mixed();
                st.pure.reset();
            }
            st.mixed = apply_channel(*st.mixed, c->channel);
        } else {
            const auto& cond = std::get<ConditionOp>(op);
            st.recipes = false;
            if (st.pure) {
                ConditionResult r = condition(*st.pure, cond.modes, cond.beta);
                st.conditioning.push_back({{"op", i}, {"density", r.density}, {"rank_after", r.state.rank()}});
                st.pure = r.state;
            } else {
                Vec y(2 * cond.beta.size());
                for (Eigen::Index j = 0; j < cond.beta.size(); j++) {
                    y(2 * j) = std::sqrt(2.0) * cond.beta(j).real();
                    y(2 * j + 1) = std::sqrt(2.0) * cond.beta(j).imag();
                }
                GeneralDyne het = GeneralDyne::heterodyne(cond.modes);
                double density =
                    generaldyne_density(*st.mixed, het, y) * std::pow(2.0, static_cast<double>(cond.modes.size()));
                st.conditioning.push_back({{"op", i}, {"density", density}});
                st.mixed = condition_on_generaldyne(*st.mixed, het, y);
            }
        }
    }
    if (st.pure) {
        for (const auto& t : st.pure->terms()) {
            st.recipes = st.recipes && t.recipe.has_value();
        }
    }
    return st;
}

json superposition_summary(const Superposition& s) {
    return {{"modes", s.modes()}, {"rank", s.rank()}, {"l1", s.l1()}, {"tail_l1", s.tail_l1()}};
}

NormOptions norm_options(const json& q, const RunOptions& o, std::uint64_t seed) {
    NormOptions n;
    n.epsilon = o.epsilon.value_or(q.value("epsilon", 0.1));
    n.p_fail = o.p_fail.value_or(q.value("p_fail", 0.05));
    n.ensemble_n = o.ensemble_n.value_or(q.value("ensemble_n", 0.0));
    n.samples = q.value("samples", static_cast<std::uint64_t>(0));
    std::string rule = q.value("rule", std::string("guarantee"));
    if (rule == "guarantee") {
        n.rule = SampleRule::guarantee;
    } else if (rule == "compact") {
        n.rule = SampleRule::compact;
    } else {
        throw ValidationError(fmt::format("task.rule: unknown sample rule '{}' (guarantee | compact)", rule));
    }
    n.seed = seed;
    n.threads = o.threads;
    return n;
}

json norm_details(const NormEstimate& e) {
    return {{"L", e.L},
            {"ensemble_n", e.ensemble_n},
            {"mean_photons", e.mean_photons},
            {"delta_bias", e.delta_bias},
            {"epsilon", e.epsilon},
            {"p_fail", e.p_fail},
            {"std_error", e.std_error}};
}

json born_json(const BornEstimate& b) {
    return {{"method", b.method}, {"numerator", b.numerator}, {"norm", b.norm}, {"clamped", b.clamped}};
}

// sum_k c_k (Fock vector of recipe_k), leakage summed over terms.
FockVector oracle_superposition(const Superposition& s, int cutoff) {
    FockVector acc = fock_vacuum(s.modes(), cutoff);
    acc.amp.setZero();
    for (const auto& t : s.terms()) {
        FockVector v = oracle_state(s.modes(), *t.recipe, cutoff, std::numeric_limits<double>::infinity());
        acc.amp += t.coeff * v.amp;
        acc.leakage += std::abs(t.coeff) * std::sqrt(v.leakage);
    }
    return acc;
}

json params_json(const TwoModeParams& p) {
    return {{"alpha1", complex_json(p.alpha1)}, {"alpha2", complex_json(p.alpha2)}, {"r1", p.r1},
            {"theta1", p.theta1},               {"r2", p.r2},                       {"theta2", p.theta2},
            {"phi", p.phi},                     {"xi", p.xi}};
}

TwoModeParams params_from_vector(const double* x, double alpha_bound, double r_bound) {
    auto clampa = [&](double v) { return std::clamp(v, -alpha_bound, alpha_bound); };
    TwoModeParams p;
    p.alpha1 = cplx(clampa(x[0]), clampa(x[1]));
    p.alpha2 = cplx(clampa(x[2]), clampa(x[3]));
    p.r1 = std::clamp(x[4], 0.0, r_bound);
    p.theta1 = x[5];
    p.r2 = std::clamp(x[6], 0.0, r_bound);
    p.theta2 = x[7];
    p.phi = x[8];
    p.xi = x[9];
    return p;
}

double box_penalty(const double* x, int dim, double alpha_bound, double r_bound) {
    double pen = 0.0;
    auto excess = [](double v, double lo, double hi) { return v < lo ? lo - v : (v > hi ? v - hi : 0.0); };
    for (int i = 0; i < dim; i++) {
        bool is_alpha = i < 4;
        bool is_r = i == 4 || i == 6;
        if (is_alpha) {
            pen += std::pow(excess(x[i], -alpha_bound, alpha_bound), 2);
        } else if (is_r) {
            pen += std::pow(excess(x[i], 0.0, r_bound), 2);
        }
    }
    return pen;
}

struct SimplexRun {
    std::vector<double> x;
    double value;  // maximized objective
    int evaluations;
};

// Nelder-Mead (GSL nmsimplex2) maximizing f from x0 within `budget` evaluations.
SimplexRun simplex_maximize(const std::function<double(const double*)>& f, std::vector<double> x0, double step,
                            int budget, double tolerance) {
    struct Ctx {
        const std::function<double(const double*)>* f;
        int evals;
    } ctx{&f, 0};
    const int dim = static_cast<int>(x0.size());
    gsl_multimin_function fn;
    fn.n = static_cast<std::size_t>(dim);
    fn.params = &ctx;
    fn.f = [](const gsl_vector* v, void* p) {
        auto* c = static_cast<Ctx*>(p);
        c->evals++;
        double val = (*c->f)(v->data);
        return std::isfinite(val) ? -val : 1e3;
    };
    gsl_vector* x = gsl_vector_alloc(fn.n);
    gsl_vector* ss = gsl_vector_alloc(fn.n);
    for (int i = 0; i < dim; i++) {
        gsl_vector_set(x, i, x0[i]);
    }
    gsl_vector_set_all(ss, step);
    gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, fn.n);
    gsl_multimin_fminimizer_set(s, &fn, x, ss);
    while (ctx.evals < budget) {
        if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) {
            break;
        }
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), tolerance) == GSL_SUCCESS) {
            break;
        }
    }
    SimplexRun out;
    out.x.assign(s->x->data, s->x->data + dim);
    out.value = -s->fval;
    out.evaluations = ctx.evals;
    gsl_multimin_fminimizer_free(s);
    gsl_vector_free(ss);
    gsl_vector_free(x);
    return out;
}

json evaluate_optimize(const CircuitProgram& prog, const RunOptions& o, std::uint64_t seed) {
    const json& q = prog.task.params;
    OptimizerConfig cfg;
    cfg.restarts = q.value("restarts", 32);
    cfg.budget = q.value("budget", 20000);
    cfg.tolerance = q.value("tolerance", 1e-10);
    cfg.seed = seed;
    cfg.threads = o.threads;
    std::string target = q.value("target", std::string("11"));
    int cutoff = o.cutoff.value_or(40);
    double single_best = 3.0 * std::sqrt(3.0) / (4.0 * std::exp(1.0));
    if (target == "1") {
        SingleModeResult r = optimize_fidelity_single(cfg);
        json doc = result_document("optimize_fidelity", prog.source, r.fidelity, nullptr,
                                   static_cast<std::uint64_t>(r.evaluations), 0, seed);
        doc["details"] = {{"alpha", complex_json(r.alpha)},
                          {"xi", complex_json(r.xi)},
                          {"closed_form", single_best}};
        return doc;
    }
    json details;
    TwoModeParams ref_point = reference_parameters();
    details["reference_parameters"] = params_json(ref_point);
    details["reference_fidelity"] = two_mode_fidelity(ref_point);
    double value = 0.0;
    int evals = 0;
    TwoModeParams best;
    if (q.value("evaluate_only", false)) {
        best = ref_point;
        value = details["reference_fidelity"].get<double>();
        evals = 1;
    } else {
        OptimizerResult r = optimize_fidelity(cfg);
        best = r.best;
        value = r.fidelity;
        evals = r.evaluations;
        details["restart_values"] = r.restart_values;
        details["best_restart"] = r.best_restart;
    }
    details["best_parameters"] = params_json(best);
    details["single_mode_optimum"] = single_best;
    details["product_bound"] = single_best * single_best;
    details["non_multiplicative"] = value > single_best * single_best;
    try {
        FockVector psi = oracle_state_adaptive(2, two_mode_ansatz_circuit(best), 1e-10, cutoff, 8 * cutoff);
        details["oracle"] = {{"cutoff", psi.cutoff},
                             {"fidelity", std::norm(psi.amp(psi.index({1, 1})))},
                             {"leakage", psi.leakage}};
    } catch (const NumericalError& e) {
        details["oracle"] = {{"error", e.what()}};
    }
    json doc = result_document("optimize_fidelity", prog.source, value, nullptr, static_cast<std::uint64_t>(evals), 0,
                               seed);
    doc["details"] = details;
    return doc;
}

}  // namespace

cplx parse_complex(const json& v, const std::string& path) {
    if (v.is_number()) {
        return {as_double(v, path), 0.0};
    }
    if (v.is_array() && v.size() == 2) {
        return {as_double(v[0], path + "[0]"), as_double(v[1], path + "[1]")};
    }
    throw ValidationError(fmt::format("{}: expected a number or a [re, im] pair", path));
}

CircuitProgram program_from_json(const json& doc) {
    if (!doc.is_object()) {
        throw ValidationError("program: expected a JSON object at top level");
    }
    if (doc.contains("schema_version") && as_int(doc.at("schema_version"), "schema_version") != schema_version) {
        throw ValidationError(fmt::format("schema_version: unsupported version (this build reads {})", schema_version));
    }
    CircuitProgram prog;
    prog.modes = as_int(require(doc, "modes", ""), "modes");
    if (prog.modes < 1) {
        throw ValidationError("modes: must be positive");
    }
    const json& init = require(doc, "initial", "");
    if (!init.is_object() || !init.contains("type") || !init.at("type").is_string()) {
        throw ValidationError("initial.type: missing or not a string");
    }
    prog.initial = {init.at("type").get<std::string>(), init};
    check_state_spec(prog.initial, prog.modes);

    int n = prog.modes;
    if (doc.contains("ops")) {
        const json& ops = doc.at("ops");
        if (!ops.is_array()) {
            throw ValidationError("ops: expected an array");
        }
        for (std::size_t i = 0; i < ops.size(); i++) {
            prog.ops.push_back(parse_op(ops[i], fmt::format("ops[{}]", i), n));
        }
    }
    const json& task = require(doc, "task", "");
    if (!task.is_object() || !task.contains("type") || !task.at("type").is_string()) {
        throw ValidationError("task.type: missing or not a string");
    }
    prog.task = {task.at("type").get<std::string>(), task};
    check_task(prog.task, n);

    if (doc.contains("seed")) {
        const json& s = doc.at("seed");
        if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
            throw ValidationError("seed: expected a non-negative 64-bit integer");
        }
        prog.seed = s.get<std::uint64_t>();
    }
    prog.source = doc;
    prog.source["schema_version"] = schema_version;
    prog.source["seed"] = prog.seed;
    return prog;
}

CircuitProgram parse_program(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        auto [line, col] = line_column(text, e.byte);
        throw ProgramParseError(fmt::format("parse error at line {}, column {}: {}", line, col, e.what()), line, col);
    }
    return program_from_json(doc);
}

CircuitProgram load_program(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError(fmt::format("cannot open program file '{}'", path));
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_program(ss.str());
}

Superposition build_state(const StateSpec& spec, int modes) {
    const json& q = spec.params;
    if (spec.type == "vacuum") {
        return from_recipes(modes, {{1.0, {}}});
    }
    if (spec.type == "coherent" || spec.type == "squeezed") {
        CVec a = parse_complex_vector(q.at("alpha"), "initial.alpha");
        CVec z = spec.type == "squeezed" ? parse_complex_vector(q.at("xi"), "initial.xi") : CVec(CVec::Zero(modes));
        Circuit c;
        for (int j = 0; j < modes; j++) {
            if (z(j) != cplx(0.0)) {
                c.push_back(Gate::squeeze(j, z(j)));
            }
            if (a(j) != cplx(0.0)) {
                c.push_back(Gate::displace(j, a(j)));
            }
        }
        return from_recipes(modes, {{1.0, c}});
    }
    Superposition one = [&] {
        if (spec.type == "cat") {
            return cat_state(parse_complex(q.at("alpha"), "initial.alpha"), q.value("parity", 1));
        }
        if (spec.type == "gkp") {
            return gkp_state(q.value("d", 2), q.value("mu", 0), q.at("kappa").get<double>(), q.at("Delta").get<double>(),
                             q.value("s_max", 5), q.value("tail_tol", 0.0));
        }
        if (spec.type == "grid") {
            return grid_sensor(q.at("Delta").get<double>(), q.value("t_max", -1), q.value("tail_tol", default_tail_tol));
        }
        if (spec.type == "fock1_ring") {
            cplx alpha = q.contains("alpha") ? parse_complex(q.at("alpha"), "initial.alpha") : cplx(fock1_alpha_opt());
            cplx xi = q.contains("xi") ? parse_complex(q.at("xi"), "initial.xi") : cplx(fock1_xi_opt());
            return fock1_ring(alpha, xi, q.value("N", 16));
        }
        throw ValidationError(fmt::format("initial.type: unknown state constructor '{}'", spec.type));
    }();
    return embed(one, modes);
}

json result_document(const std::string& task, const json& inputs, const json& value, const json& error_band,
                     std::uint64_t amplitude_evals, std::uint64_t samples, std::uint64_t seed) {
    json doc;
    doc["schema_version"] = schema_version;
    doc["task"] = task;
    doc["inputs"] = inputs;
    doc["value"] = value;
    doc["error_band"] = error_band;
    doc["counters"] = {{"amplitude_evals", amplitude_evals}, {"samples", samples}};
    doc["seed"] = seed;
    return doc;
}

json run(const CircuitProgram& prog, const RunOptions& o) {
    if (o.threads > 0) {
        set_default_threads(o.threads);
    }
    const std::uint64_t seed = o.seed.value_or(prog.seed);
    const json& q = prog.task.params;
    const std::string& kind = prog.task.kind;
    json inputs = prog.source;
    inputs["seed"] = seed;

    if (kind == "bs_bound") {
        int mbar = q.at("mbar").get<int>();
        json rows = json::array();
        for (int m = 1; m <= mbar; m++) {
            BosonSamplingBound b = boson_sampling_bound(m);
            rows.push_back({{"mbar", m}, {"bound", b.bound}, {"classical", b.classical}, {"holds", b.bound < b.classical}});
        }
        BosonSamplingBound last = boson_sampling_bound(mbar);
        json doc = result_document(kind, inputs, last.bound, nullptr, 0, 0, seed);
        doc["details"] = {{"classical", last.classical}, {"rows", rows}};
        return doc;
    }
    if (kind == "optimize_fidelity") {
        return evaluate_optimize(prog, o, seed);
    }

    if (kind == "breed_bound" && q.contains("xi")) {
        double xi = q.at("xi").get<double>();
        json doc = result_document(kind, inputs, breeding_lower_bound(xi), nullptr, 0, 0, seed);
        doc["details"] = {{"xi", xi}, {"xi_source", "given"}};
        return doc;
    }

    Evolved st = evolve_program(prog);
    json details;
    if (!st.conditioning.empty()) {
        details["conditioning"] = st.conditioning;
    }

    if (st.mixed) {
        if (kind != "exact_born") {
            throw ValidationError(fmt::format("task.type: '{}' needs a pure state; the program applies a channel", kind));
        }
        int n = st.mixed->modes();
        std::vector<int> modes = q.contains("modes") ? parse_modes(q.at("modes"), "task.modes", n) : complement_modes({}, n);
        CVec beta = parse_complex_vector(q.at("beta"), "task.beta");
        Vec y(2 * beta.size());
        for (Eigen::Index j = 0; j < beta.size(); j++) {
            y(2 * j) = std::sqrt(2.0) * beta(j).real();
            y(2 * j + 1) = std::sqrt(2.0) * beta(j).imag();
        }
        double value = generaldyne_density(*st.mixed, GeneralDyne::heterodyne(modes), y) *
                       std::pow(2.0, static_cast<double>(modes.size()));
        details["method"] = "covariance";
        json doc = result_document(kind, inputs, value, json::array({value, value}), 0, 0, seed);
        doc["details"] = details;
        return doc;
    }

    const Superposition& psi = *st.pure;
    details["state"] = superposition_summary(psi);

    if (kind == "breed_bound") {
        ExtentReport m = measures(psi);
        json doc = result_document(kind, inputs, breeding_lower_bound(m.extent_upper), nullptr, 0, 0, seed);
        details["xi"] = m.extent_upper;
        details["xi_source"] = "computed";
        doc["details"] = details;
        return doc;
    }
    if (kind == "extent") {
        ExtentReport m = measures(psi);
        details["rank"] = m.rank;
        details["l1"] = m.l1;
        details["norm"] = m.norm;
        double delta = o.delta.value_or(q.value("delta", 0.0));
        if (delta > 0.0) {
            details["approx_rank_bound"] = m.approx_rank_bound(delta);
        }
        std::uint64_t chi = m.rank;
        json doc = result_document(kind, inputs, m.extent_upper, nullptr, chi * (chi + 1) / 2, 0, seed);
        doc["details"] = details;
        return doc;
    }
    if (kind == "exact_born") {
        CVec beta = parse_complex_vector(q.at("beta"), "task.beta");
        BornEstimate b;
        if (q.contains("modes")) {
            b = exact_born(psi, parse_modes(q.at("modes"), "task.modes", psi.modes()), beta);
        } else {
            b = exact_born(psi, beta);
            if (o.cutoff && st.recipes) {
                FockVector f = oracle_superposition(psi, *o.cutoff);
                details["oracle"] = {{"cutoff", *o.cutoff}, {"value", oracle_born(f, beta)}, {"leakage", f.leakage}};
            }
        }
        details.update(born_json(b));
        json doc = result_document(kind, inputs, b.value, json::array({b.band_lo, b.band_hi}), b.amplitude_evals,
                                   b.samples, seed);
        doc["details"] = details;
        return doc;
    }
    if (kind == "approx_born") {
        ApproxBornOptions ao;
        ao.delta = o.delta.value_or(q.value("delta", 0.1));
        ao.norm = norm_options(q, o, seed);
        CVec beta = parse_complex_vector(q.at("beta"), "task.beta");
        BornEstimate b = approx_born(psi, beta, ao);
        details.update(born_json(b));
        details["delta"] = ao.delta;
        json doc = result_document(kind, inputs, b.value, json::array({b.band_lo, b.band_hi}), b.amplitude_evals,
                                   b.samples, seed);
        doc["details"] = details;
        return doc;
    }
    // norm
    NormOptions no = norm_options(q, o, seed);
    std::optional<double> delta = o.delta;
    if (!delta && q.contains("delta")) {
        delta = q.at("delta").get<double>();
    }
    Superposition target = psi;
    std::uint64_t draws = 0;
    if (delta) {
        SparsifyPlan plan = make_sparsify_plan(psi, *delta, seed);
        target = sparsify(psi, plan);
        no.seed = seed ^ 0x9e3779b97f4a7c15ULL;
        no.delta = *delta;
        draws = plan.k;
        details["sparsified"] = superposition_summary(target);
    }
    NormEstimate e = fast_norm(target, no);
    details.update(norm_details(e));
    if (target.rank() <= 4096) {
        details["exact_norm2"] = target.norm2();
    }
    double band = e.epsilon + e.delta_bias;
    json error_band = json::array({e.eta / (1.0 + band), band < 1.0 ? json(e.eta / (1.0 - band)) : json(nullptr)});
    json doc = result_document(kind, inputs, e.eta, error_band, e.amplitude_evals, e.L + draws, seed);
    doc["details"] = details;
    return doc;
}

TwoModeParams reference_parameters() {
    TwoModeParams p;
    p.r1 = 0.8814;
    p.theta1 = 0.609;
    p.r2 = 0.8814;
    p.theta2 = 1.107;
    p.phi = -1.322;
    p.xi = 1.571;
    return p;
}

namespace {

CMat ansatz_passive(double phi, double xi) {
    CMat W(2, 2);
    double c = std::cos(0.5 * xi);
    double s = std::sin(0.5 * xi);
    cplx e = std::polar(1.0, phi);
    W << c, -std::conj(e) * s, e * s, c;
    return W;
}

}  // namespace

GaussianPure two_mode_ansatz(const TwoModeParams& p) {
    GaussianPure g = GaussianPure::vacuum(2);
    CVec a(2);
    a << p.alpha1, p.alpha2;
    g = propagate(g, GaussianUnitary::displacement(a));
    g = propagate(g, GaussianUnitary::squeezing(2, 0, std::polar(p.r1, p.theta1)));
    g = propagate(g, GaussianUnitary::squeezing(2, 1, std::polar(p.r2, p.theta2)));
    return propagate(g, GaussianUnitary::passive(ansatz_passive(p.phi, p.xi)));
}

Circuit two_mode_ansatz_circuit(const TwoModeParams& p) {
    Circuit c{Gate::displace(0, p.alpha1), Gate::displace(1, p.alpha2), Gate::squeeze(0, std::polar(p.r1, p.theta1)),
              Gate::squeeze(1, std::polar(p.r2, p.theta2))};
    for (const Gate& g : decompose_passive2(ansatz_passive(p.phi, p.xi), 0, 1)) {
        c.push_back(g);
    }
    return c;
}

double two_mode_fidelity(const TwoModeParams& p) { return std::norm(fock_amplitude(two_mode_ansatz(p), {1, 1})); }

OptimizerResult optimize_fidelity(const OptimizerConfig& cfg) {
    if (cfg.restarts < 1 || cfg.budget < 1 || !(cfg.alpha_bound > 0.0) || !(cfg.r_bound > 0.0)) {
        throw ValidationError("optimize_fidelity: restarts, budget and bounds must be positive");
    }
    const int dim = 10;
    int per = std::max(1, cfg.budget / cfg.restarts);
    std::vector<SimplexRun> runs(static_cast<std::size_t>(cfg.restarts));
    auto objective = [&](const double* x) {
        return two_mode_fidelity(params_from_vector(x, cfg.alpha_bound, cfg.r_bound)) -
               box_penalty(x, dim, cfg.alpha_bound, cfg.r_bound);
    };
    parallel_for(
        runs.size(),
        [&](std::size_t i) {
            std::vector<double> x0(dim);
            if (i == 0 && cfg.initial) {
                const TwoModeParams& p = *cfg.initial;
                x0 = {p.alpha1.real(), p.alpha1.imag(), p.alpha2.real(), p.alpha2.imag(), p.r1,
                      p.theta1,        p.r2,            p.theta2,        p.phi,           p.xi};
            } else {
                std::mt19937_64 eng = stream_engine(cfg.seed, i);
                std::uniform_real_distribution<double> ua(-0.5 * cfg.alpha_bound, 0.5 * cfg.alpha_bound);
                std::uniform_real_distribution<double> ur(0.0, 0.75 * cfg.r_bound);
                std::uniform_real_distribution<double> uang(-M_PI, M_PI);
                x0 = {ua(eng), ua(eng), ua(eng), ua(eng), ur(eng), uang(eng), ur(eng), uang(eng), uang(eng), uang(eng)};
            }
            runs[i] = simplex_maximize(objective, x0, cfg.step, per, cfg.tolerance);
        },
        cfg.threads);
    OptimizerResult res{};
    res.fidelity = -1.0;
    res.evaluations = 0;
    for (std::size_t i = 0; i < runs.size(); i++) {
        res.evaluations += runs[i].evaluations;
        res.restart_values.push_back(runs[i].value);
        if (runs[i].value > res.fidelity) {
            res.fidelity = runs[i].value;
            res.best = params_from_vector(runs[i].x.data(), cfg.alpha_bound, cfg.r_bound);
            res.best_restart = static_cast<int>(i);
        }
    }
    res.fidelity = two_mode_fidelity(res.best);
    return res;
}

SingleModeResult optimize_fidelity_single(const OptimizerConfig& cfg) {
    if (cfg.restarts < 1 || cfg.budget < 1) {
        throw ValidationError("optimize_fidelity: restarts and budget must be positive");
    }
    auto to_state = [&](const double* x, cplx& alpha, cplx& xi) {
        alpha = cplx(std::clamp(x[0], -cfg.alpha_bound, cfg.alpha_bound),
                     std::clamp(x[1], -cfg.alpha_bound, cfg.alpha_bound));
        xi = std::polar(std::clamp(x[2], 0.0, cfg.r_bound), x[3]);
    };
    auto objective = [&](const double* x) {
        cplx alpha;
        cplx xi;
        to_state(x, alpha, xi);
        return std::norm(fock_amplitude(GaussianPure::squeezed_coherent(alpha, xi), {1}));
    };
    int per = std::max(1, cfg.budget / cfg.restarts);
    std::vector<SimplexRun> runs(static_cast<std::size_t>(cfg.restarts));
    parallel_for(
        runs.size(),
        [&](std::size_t i) {
            std::mt19937_64 eng = stream_engine(cfg.seed, i);
            std::uniform_real_distribution<double> ua(-0.5 * cfg.alpha_bound, 0.5 * cfg.alpha_bound);
            std::uniform_real_distribution<double> ur(0.0, 0.75 * cfg.r_bound);
            std::uniform_real_distribution<double> uang(-M_PI, M_PI);
            runs[i] = simplex_maximize(objective, {ua(eng), ua(eng), ur(eng), uang(eng)}, cfg.step, per, cfg.tolerance);
        },
        cfg.threads);
    SingleModeResult res{};
    res.fidelity = -1.0;
    for (const auto& r : runs) {
        res.evaluations += r.evaluations;
        if (r.value > res.fidelity) {
            res.fidelity = r.value;
            to_state(r.x.data(), res.alpha, res.xi);
        }
    }
    return res;
}

std::vector<TableRow> report_table(const std::vector<double>& deltas) {
    std::vector<TableRow> rows;
    for (double d : deltas) {
        if (!(d > 0.0)) {
            throw ValidationError(fmt::format("report_table: Delta must be positive, got {}", d));
        }
        TableRow r;
        r.Delta = d;
        r.naive_extent = grid_naive_extent(d);
        r.gram_extent = grid_gram_extent(d);
        r.n_naive = breeding_lower_bound(r.naive_extent);
        for (const auto& ref : table1_reference()) {
            if (std::abs(ref.Delta - d) < 1e-12) {
                r.xi_reference = ref.xi_reference;
                r.n_reference = ref.n_reference;
                r.n_from_reference = breeding_lower_bound(ref.xi_reference);
            }
        }
        rows.push_back(r);
    }
    return rows;
}

json table_json(const std::vector<TableRow>& rows) {
    json out = json::array();
    for (const auto& r : rows) {
        json j = {{"Delta", r.Delta}, {"naive_extent", r.naive_extent}, {"gram_extent", r.gram_extent},
                  {"n_naive", r.n_naive}};
        j["xi_reference"] = r.xi_reference ? json(*r.xi_reference) : json(nullptr);
        j["n_reference"] = r.n_reference ? json(*r.n_reference) : json(nullptr);
        j["n_from_reference"] = r.n_from_reference ? json(*r.n_from_reference) : json(nullptr);
        out.push_back(j);
    }
    return out;
}

namespace {

std::string csv_cell(const json& v) {
    if (v.is_null()) {
        return "";
    }
    if (v.is_string()) {
        return v.get<std::string>();
    }
    if (v.is_number() || v.is_boolean()) {
        return v.dump();
    }
    std::string s = v.dump();
    std::string q = "\"";
    for (char c : s) {
        q += c == '"' ? std::string("\"\"") : std::string(1, c);
    }
    return q + "\"";
}

}  // namespace

std::string to_csv(const json& result) {
    std::ostringstream out;
    if (result.contains("details") && result["details"].contains("rows") && result["details"]["rows"].is_array() &&
        !result["details"]["rows"].empty()) {
        const json& rows = result["details"]["rows"];
        std::vector<std::string> keys;
        for (auto it = rows[0].begin(); it != rows[0].end(); ++it) {
            keys.push_back(it.key());
        }
        for (std::size_t i = 0; i < keys.size(); i++) {
            out << (i ? "," : "") << keys[i];
        }
        out << "\n";
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < keys.size(); i++) {
                out << (i ? "," : "") << csv_cell(row.contains(keys[i]) ? row.at(keys[i]) : json(nullptr));
            }
            out << "\n";
        }
        return out.str();
    }
    const json& band = result.value("error_band", json(nullptr));
    out << "task,value,error_lo,error_hi,amplitude_evals,samples,seed\n";
    out << csv_cell(result.at("task")) << "," << csv_cell(result.at("value")) << ","
        << csv_cell(band.is_array() ? band[0] : json(nullptr)) << ","
        << csv_cell(band.is_array() ? band[1] : json(nullptr)) << ","
        << csv_cell(result["counters"]["amplitude_evals"]) << "," << csv_cell(result["counters"]["samples"]) << ","
        << csv_cell(result.at("seed")) << "\n";
    return out.str();
}

}  // namespace ngs::cli
