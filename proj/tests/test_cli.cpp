#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "ngsim/cli.hpp"

using namespace ngs;
using cli::json;

namespace {

json program(const json& initial, const json& task, int modes = 1, json ops = json::array()) {
    return {{"schema_version", 1}, {"modes", modes}, {"initial", initial}, {"ops", ops}, {"task", task}, {"seed", 7}};
}

json run_doc(const json& doc, const cli::RunOptions& o = {}) { return cli::run(cli::program_from_json(doc), o); }

std::string temp_file(const std::string& name, const std::string& text) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << text;
    return path.string();
}

int tool_exit(const std::string& args) {
    std::string cmd = std::string(NGSIM_TOOL) + " " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const json cat1 = {{"type", "cat"}, {"alpha", 1.0}, {"parity", 1}};

}  // namespace

TEST(Parse, ErrorCarriesLineAndColumn) {
    std::string text = "{\n  \"modes\": 1,\n  oops\n}\n";
    try {
        cli::parse_program(text);
        FAIL() << "no error";
    } catch (const cli::ProgramParseError& e) {
        EXPECT_EQ(e.line(), 3);
        EXPECT_GE(e.column(), 1);
    }
}

TEST(Parse, ValidationNamesField) {
    json doc = program({{"type", "vacuum"}}, {{"type", "exact_born"}});
    try {
        cli::program_from_json(doc);
        FAIL() << "no error";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("task.beta"), std::string::npos) << e.what();
    }
    json bad_mode = program({{"type", "vacuum"}}, {{"type", "exact_born"}, {"beta", {0}}}, 1,
                            json::array({{{"op", "displace"}, {"mode", 3}, {"alpha", 0.5}}}));
    try {
        cli::program_from_json(bad_mode);
        FAIL() << "no error";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("ops[0]"), std::string::npos) << e.what();
    }
    EXPECT_THROW(cli::program_from_json(program({{"type", "squeezed-ish"}}, {{"type", "extent"}})), ValidationError);
}

TEST(Parse, ComplexValues) {
    EXPECT_EQ(cli::parse_complex(json(1.5), "x"), cplx(1.5, 0.0));
    EXPECT_EQ(cli::parse_complex(json::array({0.5, -2.0}), "x"), cplx(0.5, -2.0));
    EXPECT_THROW(cli::parse_complex(json("a"), "x"), ValidationError);
}

TEST(Run, VacuumExactBorn) {
    json r = run_doc(program({{"type", "vacuum"}}, {{"type", "exact_born"}, {"beta", {0}}}));
    EXPECT_NEAR(r["value"].get<double>(), 1.0 / M_PI, 1e-15);
    EXPECT_EQ(r["task"], "exact_born");
}

TEST(Run, CatExtent) {
    json r = run_doc(program(cat1, {{"type", "extent"}}));
    EXPECT_NEAR(r["value"].get<double>(), 1.76160, 1e-5);
}

TEST(Run, GridBreedingBound) {
    json r = run_doc(program({{"type", "grid"}, {"Delta", 0.1}}, {{"type", "breed_bound"}, {"xi", 7.496}}));
    EXPECT_EQ(r["value"].get<int>(), 4);
}

TEST(Run, GatesAndCondition) {
    json ops = json::array({{{"op", "beamsplitter"}, {"modes", {0, 1}}, {"theta", M_PI / 4}, {"phi", 0.0}},
                            {{"op", "condition"}, {"modes", {1}}, {"beta", {{0.2, 0.1}}}}});
    json r = run_doc(program(cat1, {{"type", "exact_born"}, {"beta", {0.3}}}, 2, ops));
    EXPECT_GT(r["value"].get<double>(), 0.0);
    EXPECT_THROW(run_doc(program(cat1, {{"type", "exact_born"}, {"beta", {0.3, 0.0}}}, 2, ops)), ValidationError);
}

TEST(Run, ResultSchemaRoundTrip) {
    json r = run_doc(program(cat1, {{"type", "approx_born"}, {"beta", {0}}, {"delta", 0.2}}));
    for (const char* key : {"schema_version", "task", "inputs", "value", "error_band", "counters", "seed"}) {
        EXPECT_TRUE(r.contains(key)) << key;
    }
    EXPECT_EQ(json::parse(r.dump()), r);
    EXPECT_EQ(r["seed"].get<std::uint64_t>(), 7u);
    EXPECT_GT(r["counters"]["amplitude_evals"].get<std::uint64_t>(), 0u);
    std::string csv = cli::to_csv(r);
    EXPECT_EQ(csv.rfind("task,value", 0), 0u);
}

TEST(Run, DeterministicForFixedSeed) {
    json doc = program(cat1, {{"type", "norm"}});
    cli::RunOptions one;
    one.threads = 1;
    cli::RunOptions three;
    three.threads = 3;
    std::string a = run_doc(doc, one).dump();
    EXPECT_EQ(a, run_doc(doc, one).dump());
    EXPECT_EQ(a, run_doc(doc, three).dump());
    cli::RunOptions other;
    other.seed = 8;
    EXPECT_NE(a, run_doc(doc, other).dump());
}

TEST(Run, OracleCrossCheck) {
    cli::RunOptions o;
    o.cutoff = 40;
    json r = run_doc(program(cat1, {{"type", "exact_born"}, {"beta", {{0.3, 0.2}}}}), o);
    ASSERT_TRUE(r["details"].contains("oracle"));
    EXPECT_NEAR(r["details"]["oracle"]["value"].get<double>(), r["value"].get<double>(), 1e-8);
}

TEST(ReportTable, LargeDeltaNeedsOneRound) {
    auto rows = cli::report_table({1.0, 2.0});
    for (const auto& row : rows) {
        EXPECT_EQ(row.n_naive, 1);
    }
    auto ref = cli::report_table({0.1});
    ASSERT_TRUE(ref[0].n_from_reference.has_value());
    EXPECT_EQ(*ref[0].n_from_reference, 4);
}

TEST(Optimizer, ReferenceParameters) {
    EXPECT_NEAR(cli::two_mode_fidelity(cli::reference_parameters()), 0.25, 1e-3);
    GaussianPure g = cli::two_mode_ansatz(cli::reference_parameters());
    EXPECT_EQ(g.modes(), 2);
}

TEST(Optimizer, ShortSearchFromReferencePoint) {
    cli::OptimizerConfig cfg;
    cfg.restarts = 2;
    cfg.budget = 2000;
    cfg.seed = 3;
    cfg.initial = cli::reference_parameters();
    cli::OptimizerResult r = cli::optimize_fidelity(cfg);
    EXPECT_GE(r.fidelity, 0.25 - 1e-3);
    EXPECT_LE(r.evaluations, cfg.budget + 2 * 11);
}

TEST(Optimizer, SingleModeAnalogue) {
    cli::OptimizerConfig cfg;
    cfg.restarts = 8;
    cfg.budget = 8000;
    cfg.seed = 1;
    cli::SingleModeResult r = cli::optimize_fidelity_single(cfg);
    EXPECT_NEAR(r.fidelity, 0.47789, 1e-4);
}

TEST(Tool, ExitCodes) {
    std::string good = temp_file("ngsim_good.json", program({{"type", "vacuum"}}, {{"type", "extent"}}).dump());
    std::string malformed = temp_file("ngsim_bad.json", "{\"modes\": 1,,}");
    std::string invalid = temp_file("ngsim_invalid.json", program({{"type", "vacuum"}}, {{"type", "exact_born"}}).dump());
    EXPECT_EQ(tool_exit("run " + good), 0);
    EXPECT_EQ(tool_exit("run " + malformed), 2);
    EXPECT_EQ(tool_exit("run " + invalid), 2);
    EXPECT_EQ(tool_exit("run /nonexistent/program.json"), 2);
    EXPECT_EQ(tool_exit("frobnicate"), 2);
    EXPECT_EQ(tool_exit("bs-bound --mbar 3 --format csv"), 0);
}
