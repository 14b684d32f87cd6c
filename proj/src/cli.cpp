#include "hmvi/cli.hpp"

#include "hmvi/errors.hpp"
#include "hmvi/io.hpp"
#include "hmvi/problems.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace hmvi::cli {

using nlohmann::json;

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback)
{
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InputError(std::string("config key '") + key + "': " + e.what());
    }
}

template <class T>
T require(const json& j, const char* key, const char* where)
{
    if (!j.contains(key)) throw InputError(std::string(where) + ": missing key '" + key + "'");
    return get_or<T>(j, key, T{});
}

Eigen::VectorXd to_vector(const json& j, const char* what)
{
    if (!j.is_array() || j.empty()) throw InputError(std::string(what) + " must be a non-empty array");
    Eigen::VectorXd v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw InputError(std::string(what) + " must contain numbers");
        v[static_cast<Index>(i)] = j[i].get<double>();
    }
    return v;
}

Eigen::MatrixXd to_matrix(const json& j, const char* what)
{
    if (!j.is_array() || j.empty()) throw InputError(std::string(what) + " must be an array of rows");
    const auto rows = static_cast<Index>(j.size());
    Eigen::MatrixXd m(rows, rows);
    for (Index i = 0; i < rows; ++i) {
        const Eigen::VectorXd row = to_vector(j[static_cast<std::size_t>(i)], what);
        if (row.size() != rows) throw InputError(std::string(what) + " must be square");
        m.row(i) = row.transpose();
    }
    return m;
}

SingleValuedOperator single_from_json(const json& j, Index dim, const char* what)
{
    const auto type = require<std::string>(j, "type", what);
    if (type == "scaled-identity") return SingleValuedOperator::scaled_identity(dim, require<double>(j, "scale", what));
    if (type == "affine") {
        Eigen::MatrixXd m = to_matrix(j.at("matrix"), what);
        Eigen::VectorXd offset = j.contains("offset") ? to_vector(j.at("offset"), what)
                                                      : Eigen::VectorXd::Zero(m.rows());
        return SingleValuedOperator::affine(std::move(m), std::move(offset));
    }
    if (type == "diagonal-nonlinear") {
        Eigen::VectorXd offset = j.contains("offset") ? to_vector(j.at("offset"), what) : Eigen::VectorXd::Zero(dim);
        return SingleValuedOperator::diagonal_nonlinear(dim, require<double>(j, "slope", what),
                                                        get_or<double>(j, "tanh_weight", 0.0), std::move(offset));
    }
    throw InputError(std::string(what) + ": unknown operator type '" + type + "'");
}

MultiValuedOperator multi_from_json(const json& j, Index dim)
{
    const auto type = require<std::string>(j, "type", "M");
    if (type == "scaled-identity") return MultiValuedOperator::scaled_identity(dim, require<double>(j, "scale", "M"));
    if (type == "linear") return MultiValuedOperator::linear(to_matrix(j.at("matrix"), "M"));
    if (type == "shifted-subdifferential") {
        return MultiValuedOperator::shifted_subdifferential(dim, require<double>(j, "shift", "M"));
    }
    throw InputError("M: unknown operator type '" + type + "'");
}

OperatorConstants constants_from_json(const json& j)
{
    return OperatorConstants::make(require<double>(j, "gamma", "constants"), require<double>(j, "tau", "constants"),
                                   require<double>(j, "r", "constants"), require<double>(j, "s", "constants"),
                                   require<double>(j, "eta", "constants"));
}

std::optional<ResolventStrategy> parse_strategy(const json& j)
{
    const auto name = get_or<std::string>(j, "resolvent", "");
    if (name.empty()) return std::nullopt;
    for (auto s : {ResolventStrategy::closed_form_linear, ResolventStrategy::separable_scalar,
                   ResolventStrategy::newton_general}) {
        if (name == to_string(s)) return s;
    }
    throw InputError("unknown resolvent strategy '" + name + "'");
}

// Problem at a placeholder lambda; lambda is resolved once constants are known.
ProblemInstance make_problem(const RunConfig& config, double lambda)
{
    const json& p = config.problem;
    const auto kind = require<std::string>(p, "kind", "problem");
    if (kind == "scalar-affine") return gen_scalar_affine(get_or<double>(p, "b", 2.0), lambda);
    if (kind == "spd-linear" || kind == "diagonal-linear") {
        SpdLinearParams params;
        params.dim = get_or<Index>(p, "dim", params.dim);
        params.eigen_min = get_or<double>(p, "eigen_min", params.eigen_min);
        params.eigen_max = get_or<double>(p, "eigen_max", params.eigen_max);
        params.a_scale = get_or<double>(p, "a_scale", params.a_scale);
        params.m = get_or<double>(p, "m", params.m);
        params.b_scale = get_or<double>(p, "b_scale", params.b_scale);
        params.seed = config.seed;
        params.lambda = lambda;
        params.diagonal = kind == "diagonal-linear";
        return gen_spd_linear(params);
    }
    if (kind == "soft-threshold") {
        const double c = get_or<double>(p, "c", 1.0);
        if (p.contains("b") && p.at("b").is_array()) return gen_soft_threshold(Vector(to_vector(p.at("b"), "b")), c, lambda);
        return gen_soft_threshold(get_or<Index>(p, "dim", 10), c, lambda, config.seed, get_or<double>(p, "b_scale", 2.0));
    }
    if (kind == "explicit") {
        const Index dim = require<Index>(p, "dim", "problem");
        if (dim <= 0) throw InputError("problem: dim must be positive");
        auto H = single_from_json(p.at("H"), dim, "H");
        auto A = single_from_json(p.at("A"), dim, "A");
        auto M = multi_from_json(p.at("M"), dim);
        const OperatorConstants c = p.contains("constants") ? constants_from_json(p.at("constants"))
                                                            : catalog_constants(H, A, M);
        std::optional<Vector> solution;
        if (p.contains("solution")) solution = Vector(to_vector(p.at("solution"), "solution"));
        ResolventOptions options;
        options.strategy = parse_strategy(p);
        options.inner_tolerance = config.inner_tolerance;
        return ProblemInstance(std::move(H), std::move(A), std::move(M), c, lambda, std::move(solution), options,
                               "explicit");
    }
    if (kind == "constants") throw InputError("problem kind 'constants' only supports the sweep command");
    throw InputError("unknown problem kind '" + kind + "'");
}

void ensure_output_dir(const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    const auto probe = dir / ".hmvi-write-test";
    {
        std::ofstream test(probe);
        if (ec || !test) throw InputError("output directory " + dir.string() + " is not writable");
    }
    std::filesystem::remove(probe, ec);
}

double mean_error_ratio(const std::vector<double>& e, double floor)
{
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t n = 0; n + 1 < e.size(); ++n) {
        if (e[n] >= floor && e[n + 1] >= floor) {
            sum += std::log(e[n + 1] / e[n]);
            ++count;
        }
    }
    return count ? std::exp(sum / static_cast<double>(count)) : std::nan("");
}

json number_or_null(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

json trace_summary(const ProblemInstance& p, const IterationTrace& t, const std::string& file, bool timing)
{
    json j;
    j["algorithm"] = std::string(to_string(t.algorithm));
    j["trace_file"] = file;
    j["steps"] = t.steps_used;
    j["converged"] = t.converged;
    j["diverged"] = t.diverged;
    j["hypothesis_violated"] = t.hypothesis_violated;
    j["hypothesis_notes"] = t.hypothesis_notes;
    j["final_residual"] = number_or_null(t.residuals.back());
    if (t.xi) j["xi"] = t.xi->describe();
    if (t.mu) j["mu"] = t.mu->describe();
    j["wall_nanos"] = timing ? t.wall_time.count() : 0;
    if (!t.errors) {
        j["final_error"] = nullptr;
        return j;
    }
    const double floor = 10.0 * std::numeric_limits<double>::epsilon() * (1.0 + norm(*p.known_solution()));
    j["initial_error"] = t.errors->front();
    j["final_error"] = t.errors->back();
    j["mean_error_ratio"] = number_or_null(mean_error_ratio(*t.errors, floor));

    const double kappa = p.kappa();
    const double slack = audit_slack(p);
    if (kappa < 1.0) {
        const auto checks = check_envelope(t, kappa, slack);
        json env{{"available", !checks.empty()}};
        if (!checks.empty()) {
            std::size_t failed = 0;
            double worst = -std::numeric_limits<double>::infinity();
            for (const auto& c : checks) {
                failed += !c.pass;
                worst = std::max(worst, c.measured - c.bound);
            }
            env["checked"] = checks.size();
            env["failed"] = failed;
            env["max_excess"] = worst;
            env["passed"] = failed == 0;
        }
        j["envelope"] = env;
        const auto step = audit_step_contraction(t, kappa, slack);
        j["step_contraction"] = {{"checked", step.checked},
                                 {"violations", step.violations},
                                 {"max_excess", step.checked ? json(step.max_excess) : json(nullptr)}};
    }
    return j;
}

json problem_summary(const ProblemInstance& p)
{
    json j;
    j["description"] = p.notes();
    j["dim"] = p.dim();
    j["lambda"] = p.lambda();
    j["kappa"] = p.kappa();
    j["hypothesis_violated"] = !(p.kappa() < 1.0);
    j["constants"] = to_json(p.constants());
    j["feasibility"] = to_json(feasible_lambda(p.constants()));
    j["resolvent_strategy"] = std::string(to_string(p.resolvent().strategy()));
    j["known_solution"] = p.known_solution().has_value();
    return j;
}

void apply_stopping(RunConfig& config, const json& s)
{
    config.stopping.tolerance = get_or<double>(s, "tol", config.stopping.tolerance);
    config.stopping.max_steps = get_or<std::size_t>(s, "max_steps", config.stopping.max_steps);
    config.inner_tolerance = get_or<double>(s, "inner_tol", config.inner_tolerance);
}

} // namespace

// ---------------------------------------------------------------------------
// Config

RunConfig parse_config(const json& doc)
{
    if (!doc.is_object()) throw InputError("config must be a JSON object");
    RunConfig config;
    if (doc.contains("problem")) {
        if (!doc.at("problem").is_object()) throw InputError("config 'problem' must be an object");
        // Without a kind the keys refine the default scalar problem.
        if (doc.at("problem").contains("kind")) {
            config.problem = doc.at("problem");
        } else {
            config.problem.update(doc.at("problem"));
        }
    }
    if (doc.contains("algorithms")) {
        config.algorithms.clear();
        const json& algs = doc.at("algorithms");
        if (!algs.is_array()) throw InputError("config 'algorithms' must be an array");
        for (const auto& a : algs) config.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    }
    if (doc.contains("sequences")) {
        const json& s = doc.at("sequences");
        config.xi = get_or<std::string>(s, "xi", config.xi);
        config.mu = get_or<std::string>(s, "mu", config.mu);
    }
    if (doc.contains("lambda")) {
        const json& l = doc.at("lambda");
        if (l.is_string()) {
            if (l.get<std::string>() != "auto") throw InputError("lambda must be a number or \"auto\"");
            config.lambda.reset();
        } else if (l.is_number()) {
            config.lambda = l.get<double>();
        } else {
            throw InputError("lambda must be a number or \"auto\"");
        }
    }
    if (doc.contains("stopping")) apply_stopping(config, doc.at("stopping"));
    if (doc.contains("output")) {
        const json& o = doc.at("output");
        config.output_dir = get_or<std::string>(o, "dir", config.output_dir.string());
        config.deterministic = get_or<bool>(o, "deterministic", config.deterministic);
    }
    config.seed = get_or<std::uint64_t>(doc, "seed", config.seed);
    if (doc.contains("compare")) {
        config.rate.margin = get_or<double>(doc.at("compare"), "margin", config.rate.margin);
        config.rate.window_fraction = get_or<double>(doc.at("compare"), "window", config.rate.window_fraction);
    }
    if (doc.contains("sweep")) config.grid = get_or<std::string>(doc.at("sweep"), "grid", config.grid);
    if (doc.contains("audit")) {
        config.gap_tolerance = get_or<double>(doc.at("audit"), "gap_tol", config.gap_tolerance);
        config.start_spread = get_or<double>(doc.at("audit"), "spread", config.start_spread);
    }

    // Validate the pieces that do not need the problem.
    parse_step_sequence(config.xi);
    parse_step_sequence(config.mu);
    if (config.lambda && !(*config.lambda > 0.0)) throw InputError("lambda must be positive");
    if (!(config.rate.margin > 0.0 && config.rate.margin < 1.0)) throw InputError("compare margin must lie in (0, 1)");
    if (!(config.rate.window_fraction > 0.0 && config.rate.window_fraction <= 1.0)) {
        throw InputError("compare window must lie in (0, 1]");
    }
    return config;
}

OperatorConstants problem_constants(const RunConfig& config)
{
    if (get_or<std::string>(config.problem, "kind", "") == "constants") return constants_from_json(config.problem);
    return make_problem(config, 1.0).constants();
}

double auto_lambda(const OperatorConstants& c)
{
    const auto feas = feasible_lambda(c);
    if (feas.feasible) {
        const auto [lo, hi] = *feas.interval;
        KappaPoint best{0.0, std::numeric_limits<double>::infinity()};
        constexpr int points = 256;
        for (int k = 1; k <= points; ++k) {
            const double lambda = lo + (hi - lo) * k / (points + 1);
            const double kappa = contraction_factor(c, lambda);
            if (kappa < best.kappa) best = {lambda, kappa};
        }
        return best.lambda;
    }
    if (feas.regime == FeasibilityRegime::outside_formula) {
        const auto scan = scan_contraction(c);
        if (scan.best.kappa < 1.0) return scan.best.lambda;
        throw ConstantsError("no lambda on the scan grid gives kappa < 1 (best " + format_number(scan.best.kappa) + ")");
    }
    throw ConstantsError("infeasible constants: " + feas.diagnostic);
}

ProblemInstance build_problem(const RunConfig& config)
{
    ProblemInstance base = make_problem(config, config.lambda.value_or(1.0));
    if (config.lambda) return base;
    return base.with_lambda(auto_lambda(base.constants()));
}

Vector build_start(const RunConfig& config, Index dim)
{
    const json start = config.problem.contains("start") ? config.problem.at("start") : json("zero");
    if (start.is_number()) return Vector::constant(dim, start.get<double>());
    if (start.is_array()) {
        Vector v(to_vector(start, "start"));
        require_same_dim(v.dim(), dim, "start");
        return v;
    }
    if (start.is_string()) {
        const auto s = start.get<std::string>();
        if (s == "zero") return Vector::zeros(dim);
        if (s == "ones") return Vector::constant(dim, 1.0);
    }
    if (start.is_object() && get_or<std::string>(start, "kind", "") == "random") {
        std::mt19937_64 rng(config.seed ^ 0x5deece66dULL);
        std::normal_distribution<double> normal(0.0, get_or<double>(start, "scale", 1.0));
        Eigen::VectorXd v(dim);
        for (Index i = 0; i < dim; ++i) v[i] = normal(rng);
        return Vector(v);
    }
    throw InputError("start must be \"zero\", \"ones\", a number, an array or {\"kind\": \"random\"}");
}

std::vector<double> GridSpec::points() const
{
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        if (logarithmic) {
            const double t = count > 1 ? static_cast<double>(k) / static_cast<double>(count - 1) : 0.0;
            out.push_back(lo * std::pow(hi / lo, t));
        } else {
            out.push_back(lo + (hi - lo) * static_cast<double>(k + 1) / static_cast<double>(count));
        }
    }
    return out;
}

GridSpec parse_grid(const std::string& text)
{
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(part);
    if (parts.size() != 4 || (parts[0] != "lin" && parts[0] != "log")) {
        throw InputError("grid must look like lin:LO:HI:N or log:LO:HI:N");
    }
    GridSpec g;
    g.logarithmic = parts[0] == "log";
    try {
        g.lo = std::stod(parts[1]);
        g.hi = std::stod(parts[2]);
        const long long n = std::stoll(parts[3]);
        if (n < 1) throw InputError("grid needs at least one point");
        g.count = static_cast<std::size_t>(n);
    } catch (const std::logic_error&) {
        throw InputError("malformed grid '" + text + "'");
    }
    if (!(g.hi >= g.lo)) throw InputError("grid needs HI >= LO");
    if (g.logarithmic ? !(g.lo > 0.0) : !(g.lo >= 0.0 && g.hi > 0.0)) {
        throw InputError("grid lambdas must be positive");
    }
    return g;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    ensure_output_dir(config.output_dir);
    const ProblemInstance p = build_problem(config);
    const Vector x0 = build_start(config, p.dim());
    const StepSequence xi = parse_step_sequence(config.xi);
    const StepSequence mu = parse_step_sequence(config.mu);

    json summary;
    summary["command"] = "solve";
    summary["problem"] = problem_summary(p);
    summary["stopping"] = {{"tol", config.stopping.tolerance}, {"max_steps", config.stopping.max_steps}};
    summary["runs"] = json::array();
    if (!(p.kappa() < 1.0)) {
        err << "warning: kappa = " << format_number(p.kappa()) << " >= 1 at lambda = " << format_number(p.lambda())
            << "; convergence is not guaranteed\n";
    }
    for (const Algorithm alg : config.algorithms) {
        const auto trace = run_algorithm(alg, p, x0, xi, mu, config.stopping);
        const std::string file = "trace_" + std::string(to_string(alg)) + ".csv";
        write_trace_csv(config.output_dir / file, trace, !config.deterministic);
        summary["runs"].push_back(trace_summary(p, trace, file, !config.deterministic));
        out << to_string(alg) << ": steps=" << trace.steps_used << " converged=" << (trace.converged ? "yes" : "no")
            << " residual=" << format_number(trace.residuals.back());
        if (trace.errors) out << " error=" << format_number(trace.errors->back());
        out << '\n';
    }
    write_json(config.output_dir / "summary.json", summary);
    return exit_ok;
}

int cmd_compare(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    if (config.algorithms.size() != 2) throw InputError("compare needs exactly two algorithms (baseline,candidate)");
    ensure_output_dir(config.output_dir);
    const ProblemInstance p = build_problem(config);
    if (!p.known_solution()) throw CannotCompare("compare needs a problem with a known solution");
    const Vector x0 = build_start(config, p.dim());
    const StepSequence xi = parse_step_sequence(config.xi);
    const StepSequence mu = parse_step_sequence(config.mu);

    // The candidate (second) is "a", the baseline (first) is "b".
    const auto b = run_algorithm(config.algorithms[0], p, x0, xi, mu, config.stopping);
    const auto a = run_algorithm(config.algorithms[1], p, x0, xi, mu, config.stopping);
    const RateReport report = rate_compare(p, a, b, config.rate);
    if (!(p.kappa() < 1.0)) err << "warning: kappa >= 1; envelopes are not valid bounds\n";

    write_trace_csv(config.output_dir / "trace_a.csv", a, !config.deterministic);
    write_trace_csv(config.output_dir / "trace_b.csv", b, !config.deterministic);
    json doc = to_json(report);
    doc["problem"] = problem_summary(p);
    write_json(config.output_dir / "rate_report.json", doc);

    std::ofstream csv(config.output_dir / "compare.csv", std::ios::binary | std::ios::trunc);
    if (!csv) throw InputError("cannot write compare.csv");
    csv << "n,e_a,e_b,pi,envelope_a,envelope_b\n";
    for (std::size_t n = 0; n < report.pi.size(); ++n) {
        csv << n << ',' << format_number((*a.errors)[n]) << ',' << format_number((*b.errors)[n]) << ',';
        if (!report.censored[n]) csv << format_number(report.pi[n]);
        csv << ',';
        if (const auto env = envelope_for(a, report.kappa, n)) csv << format_number(*env);
        csv << ',';
        if (const auto env = envelope_for(b, report.kappa, n)) csv << format_number(*env);
        csv << '\n';
    }

    out << "a=" << to_string(report.algorithm_a) << " b=" << to_string(report.algorithm_b)
        << " verdict=" << to_string(report.verdict);
    if (report.fitted_ratio) out << " fitted_ratio=" << format_number(*report.fitted_ratio);
    out << '\n';
    return exit_ok;
}

int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    const GridSpec grid = parse_grid(config.grid);
    ensure_output_dir(config.output_dir);
    const OperatorConstants c = problem_constants(config);
    const FeasibilityResult feas = feasible_lambda(c);

    std::ofstream csv(config.output_dir / "sweep.csv", std::ios::binary | std::ios::trunc);
    if (!csv) throw InputError("cannot write sweep.csv");
    csv << "lambda,kappa,in_interval\n";
    KappaPoint best{0.0, std::numeric_limits<double>::infinity()};
    std::size_t below_one = 0;
    for (const double lambda : grid.points()) {
        const double kappa = contraction_factor(c, lambda);
        const bool inside = feas.interval && lambda > feas.interval->first && lambda < feas.interval->second;
        csv << format_number(lambda) << ',' << format_number(kappa) << ',' << (inside ? 1 : 0) << '\n';
        if (kappa < best.kappa) best = {lambda, kappa};
        below_one += kappa < 1.0;
    }

    json doc;
    doc["constants"] = to_json(c);
    doc["feasibility"] = to_json(feas);
    doc["rows"] = grid.count;
    doc["best_lambda"] = best.lambda;
    doc["best_kappa"] = best.kappa;
    doc["rows_below_one"] = below_one;
    if (below_one == 0) {
        doc["warning"] = "kappa >= 1 at every grid point";
        err << "warning: kappa >= 1 at every grid point\n";
    }
    write_json(config.output_dir / "sweep.json", doc);
    out << "best lambda=" << format_number(best.lambda) << " kappa=" << format_number(best.kappa) << '\n';
    return exit_ok;
}

int cmd_audit(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    if (config.algorithms.size() < 2) throw InputError("audit needs at least two algorithms");
    ensure_output_dir(config.output_dir);
    const ProblemInstance p = build_problem(config);
    const Vector x0 = build_start(config, p.dim());
    const StepSequence xi = parse_step_sequence(config.xi);
    const StepSequence mu = parse_step_sequence(config.mu);

    std::vector<Vector> starts;
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> normal(0.0, config.start_spread > 0.0 ? config.start_spread : 1.0);
    for (std::size_t k = 0; k < config.algorithms.size(); ++k) {
        if (config.start_spread > 0.0) {
            Eigen::VectorXd v = x0.values();
            for (Index i = 0; i < v.size(); ++i) v[i] += normal(rng);
            starts.emplace_back(v);
        } else {
            starts.push_back(x0);
        }
    }

    // Run to convergence once to find the horizon, then rerun everything for
    // exactly that many steps so the gaps are compared at equal n.
    std::size_t horizon = 0;
    for (std::size_t k = 0; k < config.algorithms.size(); ++k) {
        const auto t = run_algorithm(config.algorithms[k], p, starts[k], xi, mu, config.stopping);
        horizon = std::max(horizon, t.steps_used);
    }
    StoppingRule fixed = config.stopping;
    fixed.stop_early = false;
    fixed.max_steps = std::max<std::size_t>(horizon, 1);
    std::vector<IterationTrace> traces;
    for (std::size_t k = 0; k < config.algorithms.size(); ++k) {
        traces.push_back(run_algorithm(config.algorithms[k], p, starts[k], xi, mu, fixed));
    }

    const double kappa = p.kappa();
    if (!(kappa < 1.0)) err << "warning: kappa >= 1; gap recursions are not valid bounds\n";
    json doc;
    doc["problem"] = problem_summary(p);
    doc["horizon"] = fixed.max_steps;
    doc["pairs"] = json::array();
    bool all_passed = true;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        for (std::size_t j = i + 1; j < traces.size(); ++j) {
            const auto report = audit_pair(traces[i], traces[j], kappa, audit_slack(p), config.gap_tolerance);
            all_passed = all_passed && report.passed();
            doc["pairs"].push_back(to_json(report));
            out << to_string(traces[i].algorithm) << "-" << to_string(traces[j].algorithm)
                << ": final_gap=" << format_number(report.final_gap)
                << (report.recursion_applicable
                        ? " recursion_violations=" +
                              std::to_string(report.s_side.violations + report.q_side.violations)
                        : std::string(" recursion=n/a"))
                << (report.passed() ? " ok" : " FAIL") << '\n';
        }
    }
    doc["passed"] = all_passed;
    write_json(config.output_dir / "audit.json", doc);
    return all_passed ? exit_ok : exit_numerical;
}

// ---------------------------------------------------------------------------
// Command line

namespace {

struct Flags
{
    std::optional<std::string> config;
    std::optional<std::string> problem;
    std::optional<double> b, eigen_min, eigen_max, a_scale, m, c, b_scale;
    std::optional<long long> dim;
    std::optional<std::string> start;
    std::optional<double> gamma, tau, r, s, eta;
    std::optional<std::string> lambda;
    std::optional<std::string> algorithms;
    std::optional<std::string> xi, mu;
    std::optional<double> tol, inner_tol;
    std::optional<std::size_t> max_steps;
    std::optional<std::string> out;
    bool deterministic = false;
    std::optional<std::uint64_t> seed;
    std::optional<double> margin, window;
    std::optional<std::string> grid;
    std::optional<double> gap_tol, spread;
};

void add_common(CLI::App* cmd, Flags& f)
{
    cmd->add_option("--config", f.config, "JSON config file; flags override its values");
    cmd->add_option("--problem", f.problem,
                    "scalar-affine | spd-linear | diagonal-linear | soft-threshold | explicit | constants");
    cmd->add_option("--b", f.b, "scalar-affine offset b");
    cmd->add_option("--dim", f.dim, "problem dimension");
    cmd->add_option("--eigen-min", f.eigen_min, "smallest eigenvalue of H (spd/diagonal)");
    cmd->add_option("--eigen-max", f.eigen_max, "largest eigenvalue of H (spd/diagonal)");
    cmd->add_option("--a-scale", f.a_scale, "A = a_scale H - b (spd/diagonal)");
    cmd->add_option("--m", f.m, "M = m I (spd/diagonal)");
    cmd->add_option("--c", f.c, "shift c of M = c u + d|u| (soft-threshold)");
    cmd->add_option("--b-scale", f.b_scale, "standard deviation of the random offset b");
    cmd->add_option("--start", f.start, "zero | ones | NUMBER | random:SCALE");
    cmd->add_option("--gamma", f.gamma, "constant gamma (constants problem)");
    cmd->add_option("--tau", f.tau, "constant tau (constants problem)");
    cmd->add_option("--r", f.r, "constant r (constants problem)");
    cmd->add_option("--s", f.s, "constant s (constants problem)");
    cmd->add_option("--eta", f.eta, "constant eta (constants problem)");
    cmd->add_option("--lambda", f.lambda, "positive number or 'auto'");
    cmd->add_option("--alg", f.algorithms, "comma-separated list of fh, zgy, mann, new");
    cmd->add_option("--xi", f.xi, "xi_n sequence, e.g. const:0.5 or harmonic:1");
    cmd->add_option("--mu", f.mu, "mu_n sequence, e.g. const:0.9");
    cmd->add_option("--tol", f.tol, "residual stopping tolerance");
    cmd->add_option("--max-steps", f.max_steps, "iteration cap");
    cmd->add_option("--inner-tol", f.inner_tol, "inner resolvent tolerance");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_flag("--deterministic", f.deterministic, "write zero timings for byte-identical outputs");
    cmd->add_option("--seed", f.seed, "random seed");
}

json merge_flags(const Flags& f)
{
    json doc = json::object();
    if (f.config) {
        std::ifstream in(*f.config);
        if (!in) throw InputError("cannot read config " + *f.config);
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            throw InputError("config " + *f.config + ": " + e.what());
        }
    }
    json& problem = doc["problem"];
    if (problem.is_null()) problem = json::object();
    if (f.problem) {
        if (problem.value("kind", "") != *f.problem) problem = json::object();
        problem["kind"] = *f.problem;
    }
    const auto set = [](json& j, const char* key, const auto& value) {
        if (value) j[key] = *value;
    };
    set(problem, "b", f.b);
    set(problem, "dim", f.dim);
    set(problem, "eigen_min", f.eigen_min);
    set(problem, "eigen_max", f.eigen_max);
    set(problem, "a_scale", f.a_scale);
    set(problem, "m", f.m);
    set(problem, "c", f.c);
    set(problem, "b_scale", f.b_scale);
    if (f.gamma || f.tau || f.r || f.s || f.eta) {
        if (problem.value("kind", "") != "constants") problem = json{{"kind", "constants"}};
        set(problem, "gamma", f.gamma);
        set(problem, "tau", f.tau);
        set(problem, "r", f.r);
        set(problem, "s", f.s);
        set(problem, "eta", f.eta);
    }
    if (f.start) {
        const std::string& s = *f.start;
        if (s.rfind("random", 0) == 0) {
            const auto colon = s.find(':');
            problem["start"] = {{"kind", "random"},
                                {"scale", colon == std::string::npos ? 1.0 : std::stod(s.substr(colon + 1))}};
        } else if (s == "zero" || s == "ones") {
            problem["start"] = s;
        } else {
            problem["start"] = std::stod(s);
        }
    }
    if (problem.empty()) doc.erase("problem");

    if (f.lambda) {
        if (*f.lambda == "auto") {
            doc["lambda"] = "auto";
        } else {
            doc["lambda"] = std::stod(*f.lambda);
        }
    }
    if (f.algorithms) {
        json algs = json::array();
        std::stringstream ss(*f.algorithms);
        std::string name;
        while (std::getline(ss, name, ',')) algs.push_back(name);
        doc["algorithms"] = algs;
    }
    set(doc["sequences"], "xi", f.xi);
    set(doc["sequences"], "mu", f.mu);
    if (doc["sequences"].is_null()) doc.erase("sequences");
    set(doc["stopping"], "tol", f.tol);
    set(doc["stopping"], "inner_tol", f.inner_tol);
    set(doc["stopping"], "max_steps", f.max_steps);
    if (doc["stopping"].is_null()) doc.erase("stopping");
    set(doc["output"], "dir", f.out);
    if (f.deterministic) doc["output"]["deterministic"] = true;
    if (doc["output"].is_null()) doc.erase("output");
    set(doc, "seed", f.seed);
    set(doc["compare"], "margin", f.margin);
    set(doc["compare"], "window", f.window);
    if (doc["compare"].is_null()) doc.erase("compare");
    set(doc["sweep"], "grid", f.grid);
    if (doc["sweep"].is_null()) doc.erase("sweep");
    set(doc["audit"], "gap_tol", f.gap_tol);
    set(doc["audit"], "spread", f.spread);
    if (doc["audit"].is_null()) doc.erase("audit");
    return doc;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Solvers and convergence audits for variational inclusions 0 in A(u) + M(u)", "hmvi"};
    app.require_subcommand(1);

    Flags flags;
    auto* solve = app.add_subcommand("solve", "run algorithms and write trace CSVs plus summary.json");
    auto* compare = app.add_subcommand("compare", "compare convergence rates of baseline,candidate");
    auto* sweep = app.add_subcommand("sweep", "tabulate kappa over a lambda grid");
    auto* audit = app.add_subcommand("audit", "pairwise equivalence-of-convergence audit");
    for (auto* cmd : {solve, compare, sweep, audit}) add_common(cmd, flags);
    compare->add_option("--margin", flags.margin, "verdict decision margin (default 0.05)");
    compare->add_option("--window", flags.window, "trailing fit window fraction (default 0.25)");
    sweep->add_option("--grid", flags.grid, "lin:LO:HI:N or log:LO:HI:N");
    audit->add_option("--gap-tol", flags.gap_tol, "gap decay tolerance (default 1e-8)");
    audit->add_option("--spread", flags.spread, "perturb each algorithm's start by N(0, spread^2)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        const RunConfig config = parse_config(merge_flags(flags));
        if (solve->parsed()) return cmd_solve(config, out, err);
        if (compare->parsed()) return cmd_compare(config, out, err);
        if (sweep->parsed()) return cmd_sweep(config, out, err);
        return cmd_audit(config, out, err);
    } catch (const ConstantsError& e) {
        err << "error: " << e.what() << '\n';
        return exit_infeasible;
    } catch (const ResolventDivergence& e) {
        err << "error: " << e.what() << '\n';
        return exit_numerical;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::invalid_argument& e) {
        err << "error: malformed number (" << e.what() << ")\n";
        return exit_usage;
    } catch (const json::exception& e) {
        err << "error: config: " << e.what() << '\n';
        return exit_usage;
    }
}

} // namespace hmvi::cli
