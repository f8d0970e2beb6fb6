// ngsim: command-line front end for the Gaussian-superposition simulator.
#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ngsim/cli.hpp"

using ngs::cli::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_validation = 2;
constexpr int exit_numerical = 3;

struct Flags {
    std::uint64_t seed = 0;
    bool seed_set = false;
    double delta = 0.0;
    double epsilon = 0.0;
    double pfail = 0.0;
    double ensemble_n = 0.0;
    int cutoff = 0;
    int threads = 0;
    std::string format = "json";
};

void add_common(CLI::App* app, Flags& f) {
    app->add_option("--seed", f.seed, "Master seed (64-bit)");
    app->add_option("--delta", f.delta, "Sparsification precision");
    app->add_option("--epsilon", f.epsilon, "Relative precision of the norm estimate");
    app->add_option("--pfail", f.pfail, "Failure probability of the norm estimate");
    app->add_option("--ensemble-n", f.ensemble_n, "Width N of the coherent-state ensemble");
    app->add_option("--cutoff", f.cutoff, "Fock cutoff for oracle cross-checks");
    app->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    app->add_option("--threads", f.threads, "Worker threads (0: hardware)");
}

ngs::cli::RunOptions run_options(const CLI::App* app, const Flags& f) {
    ngs::cli::RunOptions o;
    if (app->count("--seed") > 0) {
        o.seed = f.seed;
    }
    if (app->count("--delta") > 0) {
        o.delta = f.delta;
    }
    if (app->count("--epsilon") > 0) {
        o.epsilon = f.epsilon;
    }
    if (app->count("--pfail") > 0) {
        o.p_fail = f.pfail;
    }
    if (app->count("--ensemble-n") > 0) {
        o.ensemble_n = f.ensemble_n;
    }
    if (app->count("--cutoff") > 0) {
        o.cutoff = f.cutoff;
    }
    o.threads = f.threads;
    return o;
}

// Program document built from a state description and a task object.
ngs::cli::CircuitProgram inline_program(const std::string& state, int modes, json task, std::uint64_t seed) {
    json init;
    try {
        init = json::parse(state);
    } catch (const json::parse_error& e) {
        throw ngs::ValidationError(std::string("--state: ") + e.what());
    }
    json doc = {{"schema_version", ngs::cli::schema_version},
                {"modes", modes},
                {"initial", init},
                {"ops", json::array()},
                {"task", std::move(task)},
                {"seed", seed}};
    return ngs::cli::program_from_json(doc);
}

void emit(const json& doc, const std::string& format) {
    if (format == "csv") {
        std::cout << ngs::cli::to_csv(doc);
    } else {
        std::cout << doc.dump(2) << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation of superpositions of Gaussian states"};
    app.require_subcommand(1);
    Flags f;

    std::string program_path;
    auto* run = app.add_subcommand("run", "Execute a program file");
    run->add_option("program", program_path, "Program file (JSON)")->required();
    add_common(run, f);

    std::string state = R"({"type":"vacuum"})";
    int modes = 1;
    auto* extent = app.add_subcommand("extent", "Rank, l1 norm and extent upper bound of a state");
    extent->add_option("--state", state, "Initial-state object (JSON)");
    extent->add_option("--modes", modes, "Number of modes");
    add_common(extent, f);

    std::string norm_rule = "guarantee";
    auto* norm = app.add_subcommand("norm", "Fast norm estimate of a state");
    norm->add_option("--state", state, "Initial-state object (JSON)");
    norm->add_option("--modes", modes, "Number of modes");
    norm->add_option("--rule", norm_rule, "Sample-count rule")->check(CLI::IsMember({"guarantee", "compact"}));
    add_common(norm, f);

    std::string beta = "[0]";
    bool approximate = false;
    auto* born = app.add_subcommand("born", "Heterodyne outcome density");
    born->add_option("--state", state, "Initial-state object (JSON)");
    born->add_option("--modes", modes, "Number of modes");
    born->add_option("--beta", beta, "Outcome as a JSON array of numbers or [re, im] pairs");
    born->add_flag("--approx", approximate, "Sparsified estimate instead of the exact value");
    add_common(born, f);

    double xi = 0.0;
    auto* breed = app.add_subcommand("breed-bound", "Lower bound on breeding rounds from a grid-state extent");
    breed->add_option("--xi", xi, "Extent; computed from --state when omitted");
    breed->add_option("--state", state, "Initial-state object (JSON)");
    add_common(breed, f);

    int mbar = 20;
    auto* bs = app.add_subcommand("bs-bound", "Boson-sampling cost bound for 1..M photons");
    bs->add_option("--mbar", mbar, "Largest photon number")->check(CLI::PositiveNumber);
    add_common(bs, f);

    std::string target = "11";
    int restarts = 32;
    int budget = 20000;
    bool evaluate_only = false;
    auto* opt = app.add_subcommand("optimize-fidelity", "Maximize the Gaussian fidelity with |1,1> (or |1>)");
    opt->add_option("--target", target, "11 or 1")->check(CLI::IsMember({"11", "1"}));
    opt->add_option("--restarts", restarts, "Simplex restarts")->check(CLI::PositiveNumber);
    opt->add_option("--budget", budget, "Total objective evaluations")->check(CLI::PositiveNumber);
    opt->add_flag("--evaluate-only", evaluate_only, "Only evaluate the reference parameter set");
    add_common(opt, f);

    std::vector<double> deltas;
    auto* table = app.add_subcommand("table1", "Grid-state extents and breeding bounds");
    table->add_option("--deltas", deltas, "Delta values (default: the reference rows)")->delimiter(',');
    add_common(table, f);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? exit_ok : exit_validation;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        ngs::cli::RunOptions o = run_options(sub, f);
        std::uint64_t seed = o.seed.value_or(0);
        json doc;
        if (sub == run) {
            doc = ngs::cli::run(ngs::cli::load_program(program_path), o);
        } else if (sub == extent) {
            doc = ngs::cli::run(inline_program(state, modes, {{"type", "extent"}}, seed), o);
        } else if (sub == norm) {
            doc = ngs::cli::run(inline_program(state, modes, {{"type", "norm"}, {"rule", norm_rule}}, seed), o);
        } else if (sub == born) {
            json b;
            try {
                b = json::parse(beta);
            } catch (const json::parse_error& e) {
                throw ngs::ValidationError(std::string("--beta: ") + e.what());
            }
            json task = {{"type", approximate ? "approx_born" : "exact_born"}, {"beta", b}};
            doc = ngs::cli::run(inline_program(state, modes, task, seed), o);
        } else if (sub == breed) {
            json task = {{"type", "breed_bound"}};
            if (breed->count("--xi") > 0) {
                task["xi"] = xi;
            }
            doc = ngs::cli::run(inline_program(state, 1, task, seed), o);
        } else if (sub == bs) {
            doc = ngs::cli::run(inline_program(R"({"type":"vacuum"})", 1, {{"type", "bs_bound"}, {"mbar", mbar}}, seed),
                                o);
        } else if (sub == opt) {
            json task = {{"type", "optimize_fidelity"},
                         {"target", target},
                         {"restarts", restarts},
                         {"budget", budget},
                         {"evaluate_only", evaluate_only}};
            doc = ngs::cli::run(inline_program(R"({"type":"vacuum"})", 2, task, seed), o);
        } else {
            if (deltas.empty()) {
                for (const auto& r : ngs::table1_reference()) {
                    deltas.push_back(r.Delta);
                }
            }
            auto rows = ngs::cli::report_table(deltas);
            doc = ngs::cli::result_document("table1", {{"deltas", deltas}}, ngs::cli::table_json(rows), nullptr, 0, 0,
                                            seed);
            doc["details"] = {{"rows", ngs::cli::table_json(rows)},
                              {"note",
                               "naive_extent = (sum w)^2 / sum w^2 of the grid envelope; gram_extent uses exact term "
                               "overlaps. Both differ from xi_reference by about a factor of two; n_from_reference "
                               "applies n = ceil(xi / 2) to the reference values."}};
        }
        emit(doc, f.format);
        return exit_ok;
    } catch (const ngs::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return exit_validation;
    } catch (const ngs::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numerical;
    }
}
