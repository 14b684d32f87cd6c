#pragma once

#include "hmvi/analysis.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hmvi::cli {

enum ExitCode : int
{
    exit_ok = 0,
    exit_usage = 1,
    exit_infeasible = 2,
    exit_numerical = 3,
};

/// Everything a subcommand needs. Built from the JSON config document after
/// command-line flags have been merged into it.
struct RunConfig
{
    /// Generator or explicit operator description (see README for the schema).
    nlohmann::json problem = {{"kind", "scalar-affine"}, {"b", 2.0}};
    std::vector<Algorithm> algorithms{Algorithm::fh};
    std::string xi = "const:0.5";
    std::string mu = "const:0.5";
    /// Empty means "auto": the kappa-minimising grid point.
    std::optional<double> lambda;
    StoppingRule stopping;
    double inner_tolerance = 1e-12;
    std::filesystem::path output_dir = "hmvi-out";
    /// Zero the timing columns so identical inputs give identical files.
    bool deterministic = false;
    std::uint64_t seed = 0;

    RateOptions rate;
    std::string grid = "lin:0:2:200";
    double gap_tolerance = 1e-8;
    /// Standard deviation of independent per-algorithm start perturbations (audit).
    double start_spread = 0.0;
};

RunConfig parse_config(const nlohmann::json& doc);

/// The problem with lambda resolved (explicit, or auto).
ProblemInstance build_problem(const RunConfig& config);

/// Operator constants of the configured problem without building a resolvent
/// (the "constants" kind has no operators).
OperatorConstants problem_constants(const RunConfig& config);

/// Lambda minimising kappa: 256 interior points of the closed-form interval,
/// or a log-grid scan when s <= eta. Throws ConstantsError when kappa < 1 is
/// unattainable.
double auto_lambda(const OperatorConstants& c);

Vector build_start(const RunConfig& config, Index dim);

struct GridSpec
{
    bool logarithmic = false;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;

    std::vector<double> points() const;
};

/// "lin:LO:HI:N" gives LO + (HI - LO) k / N for k = 1..N; "log:LO:HI:N"
/// gives N geometric points from LO to HI inclusive.
GridSpec parse_grid(const std::string& text);

int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_compare(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_audit(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Full command-line entry point; maps exceptions to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace hmvi::cli
