#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "ngsim/errors.hpp"
#include "ngsim/gaussian.hpp"
#include "ngsim/simulator.hpp"

namespace ngs::cli {

using json = nlohmann::json;

inline constexpr int schema_version = 1;

class ProgramParseError : public ValidationError {
  public:
    ProgramParseError(const std::string& what, int line, int column)
        : ValidationError(what), line_(line), column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

  private:
    int line_;
    int column_;
};

struct StateSpec {
    std::string type;  // vacuum | coherent | squeezed | cat | gkp | grid | fock1_ring
    json params;
};

struct SymplecticOp {
    Mat S;
    Vec d;
};

struct ChannelOp {
    GaussianChannel channel;
};

struct ConditionOp {
    std::vector<int> modes;
    CVec beta;
};

using Operation = std::variant<Gate, SymplecticOp, ChannelOp, ConditionOp>;

struct TaskSpec {
    std::string kind;  // exact_born | approx_born | norm | extent | breed_bound | bs_bound | optimize_fidelity
    json params;
};

struct CircuitProgram {
    int modes = 1;
    StateSpec initial;
    std::vector<Operation> ops;
    TaskSpec task;
    std::uint64_t seed = 0;
    json source;  // normalized input tree echoed in results
};

// Throws ProgramParseError (with line/column) on malformed text and ValidationError
// naming the offending field otherwise.
CircuitProgram parse_program(const std::string& text);
CircuitProgram load_program(const std::string& path);
CircuitProgram program_from_json(const json& doc);

// Command-line overrides of task parameters.
struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<double> delta;
    std::optional<double> epsilon;
    std::optional<double> p_fail;
    std::optional<double> ensemble_n;
    std::optional<int> cutoff;  // enables the Fock-oracle cross-check where applicable
    int threads = 0;
};

json run(const CircuitProgram& program, const RunOptions& options = {});

// Builds the initial superposition on `modes` modes (single-mode constructors act on mode 0).
Superposition build_state(const StateSpec& spec, int modes);
cplx parse_complex(const json& v, const std::string& field);

// Two-mode ansatz U(phi, xi) S(z1) (x) S(z2) D(a1) (x) D(a2) |00>, U the passive map
// W = [[cos(xi/2), -e^{-i phi} sin(xi/2)], [e^{i phi} sin(xi/2), cos(xi/2)]].
struct TwoModeParams {
    cplx alpha1 = 0.0;
    cplx alpha2 = 0.0;
    double r1 = 0.0;
    double theta1 = 0.0;
    double r2 = 0.0;
    double theta2 = 0.0;
    double phi = 0.0;
    double xi = 0.0;
};

TwoModeParams reference_parameters();
GaussianPure two_mode_ansatz(const TwoModeParams& p);
Circuit two_mode_ansatz_circuit(const TwoModeParams& p);
// |<1,1|G'>|^2
double two_mode_fidelity(const TwoModeParams& p);

struct OptimizerConfig {
    double alpha_bound = 2.0;  // |Re alpha|, |Im alpha|
    double r_bound = 2.0;
    int restarts = 32;
    int budget = 20000;  // total evaluations over all restarts
    double tolerance = 1e-10;
    double step = 0.3;
    std::uint64_t seed = 0;
    int threads = 0;
    std::optional<TwoModeParams> initial;  // used as the first restart when set
};

struct OptimizerResult {
    TwoModeParams best;
    double fidelity;
    int evaluations;
    int best_restart;
    std::vector<double> restart_values;
};

OptimizerResult optimize_fidelity(const OptimizerConfig& cfg);

// max over single-mode Gaussians of |<1|G>|^2 by the same simplex search over D(alpha) S(r e^{i theta}).
struct SingleModeResult {
    cplx alpha;
    cplx xi;
    double fidelity;
    int evaluations;
};

SingleModeResult optimize_fidelity_single(const OptimizerConfig& cfg);

struct TableRow {
    double Delta;
    double naive_extent;
    double gram_extent;
    int n_naive;
    std::optional<double> xi_reference;
    std::optional<int> n_reference;
    std::optional<int> n_from_reference;
};

std::vector<TableRow> report_table(const std::vector<double>& deltas);
json table_json(const std::vector<TableRow>& rows);

// Result document skeleton shared by all subcommands.
json result_document(const std::string& task, const json& inputs, const json& value, const json& error_band,
                     std::uint64_t amplitude_evals, std::uint64_t samples, std::uint64_t seed);

// CSV rendering: `details.rows` when present, else the scalar fields.
std::string to_csv(const json& result);

}  // namespace ngs::cli
