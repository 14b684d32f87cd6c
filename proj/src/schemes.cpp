#include "hmvi/schemes.hpp"

#include "hmvi/analysis.hpp"
#include "hmvi/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace hmvi {

namespace {

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(std::string_view text, std::string_view context)
{
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        throw InputError("invalid number '" + std::string(text) + "' in " + std::string(context));
    }
    return v;
}

void require_unit_interval(double v, const char* what)
{
    if (!(v >= 0.0 && v <= 1.0)) throw InputError(std::string(what) + " values must lie in [0, 1]");
}

// Tail behaviour used for symbolic series tests.
enum class Tail
{
    zero,
    harmonic,
    positive,
};

Tail tail_of(const StepSequence& s)
{
    switch (s.family()) {
    case StepSequence::Family::harmonic: return Tail::harmonic;
    case StepSequence::Family::one_minus_harmonic: return Tail::positive;
    case StepSequence::Family::constant:
    case StepSequence::Family::table: return s.properties().tends_to_zero ? Tail::zero : Tail::positive;
    }
    return Tail::zero;
}

} // namespace

// ---------------------------------------------------------------------------
// StepSequence

StepSequence::StepSequence(Family family, std::vector<double> params)
    : family_(family)
    , params_(std::move(params))
{
    switch (family_) {
    case Family::constant: {
        const double v = params_.at(0);
        require_unit_interval(v, "constant step");
        properties_.sums_to_infinity = v > 0.0;
        properties_.tends_to_zero = v == 0.0;
        if (v > 0.0) properties_.bounded_below_by = v;
        break;
    }
    case Family::harmonic:
        if (!(params_.at(0) >= 1.0)) throw InputError("harmonic step needs offset >= 1");
        properties_.sums_to_infinity = true;
        properties_.tends_to_zero = true;
        break;
    case Family::one_minus_harmonic: {
        const double offset = params_.at(0);
        if (!(offset >= 1.0)) throw InputError("one-minus-harmonic step needs offset >= 1");
        properties_.sums_to_infinity = true;
        properties_.tends_to_zero = false;
        if (offset > 1.0) properties_.bounded_below_by = 1.0 - 1.0 / offset;
        break;
    }
    case Family::table: {
        if (params_.empty()) throw InputError("table step needs at least one value");
        for (double v : params_) require_unit_interval(v, "table step");
        const double last = params_.back();
        properties_.sums_to_infinity = last > 0.0;
        properties_.tends_to_zero = last == 0.0;
        const double lo = *std::min_element(params_.begin(), params_.end());
        if (lo > 0.0) properties_.bounded_below_by = lo;
        break;
    }
    }
}

StepSequence StepSequence::constant(double value)
{
    return {Family::constant, {value}};
}

StepSequence StepSequence::harmonic(double offset)
{
    return {Family::harmonic, {offset}};
}

StepSequence StepSequence::one_minus_harmonic(double offset)
{
    return {Family::one_minus_harmonic, {offset}};
}

StepSequence StepSequence::table(std::vector<double> values)
{
    return {Family::table, std::move(values)};
}

double StepSequence::operator()(std::size_t n) const
{
    switch (family_) {
    case Family::constant: return params_[0];
    case Family::harmonic: return 1.0 / (static_cast<double>(n) + params_[0]);
    case Family::one_minus_harmonic: return 1.0 - 1.0 / (static_cast<double>(n) + params_[0]);
    case Family::table: return params_[std::min(n, params_.size() - 1)];
    }
    return 0.0;
}

std::string StepSequence::describe() const
{
    switch (family_) {
    case Family::constant: return "const:" + format_double(params_[0]);
    case Family::harmonic: return "harmonic:" + format_double(params_[0]);
    case Family::one_minus_harmonic: return "one-minus-harmonic:" + format_double(params_[0]);
    case Family::table: {
        std::string out = "table:";
        for (std::size_t i = 0; i < params_.size(); ++i) {
            if (i) out += ',';
            out += format_double(params_[i]);
        }
        return out;
    }
    }
    return {};
}

StepSequence make_step_sequence(StepSequence::Family family, const std::vector<double>& params)
{
    using F = StepSequence::Family;
    switch (family) {
    case F::constant:
        if (params.size() != 1) throw InputError("constant step takes one parameter");
        return StepSequence::constant(params[0]);
    case F::harmonic:
        if (params.size() > 1) throw InputError("harmonic step takes at most one parameter");
        return StepSequence::harmonic(params.empty() ? 1.0 : params[0]);
    case F::one_minus_harmonic:
        if (params.size() > 1) throw InputError("one-minus-harmonic step takes at most one parameter");
        return StepSequence::one_minus_harmonic(params.empty() ? 1.0 : params[0]);
    case F::table: return StepSequence::table(params);
    }
    throw InputError("unknown step family");
}

StepSequence parse_step_sequence(std::string_view text)
{
    const auto colon = text.find(':');
    const std::string_view name = text.substr(0, colon);
    std::vector<double> params;
    if (colon != std::string_view::npos) {
        std::string_view rest = text.substr(colon + 1);
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            params.push_back(parse_double(rest.substr(0, comma), text));
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
    }
    using F = StepSequence::Family;
    if (name == "const" || name == "constant") return make_step_sequence(F::constant, params);
    if (name == "harmonic") return make_step_sequence(F::harmonic, params);
    if (name == "one-minus-harmonic") return make_step_sequence(F::one_minus_harmonic, params);
    if (name == "table") return make_step_sequence(F::table, params);
    throw InputError("unknown step sequence '" + std::string(text) + "'");
}

bool product_sums_to_infinity(const StepSequence& xi, const StepSequence& mu)
{
    const Tail a = tail_of(xi);
    const Tail b = tail_of(mu);
    if (a == Tail::zero || b == Tail::zero) return false;
    // 1/n * 1/n is summable; anything with a positive tail keeps the other's
    // divergence.
    return !(a == Tail::harmonic && b == Tail::harmonic);
}

bool same_terms(const StepSequence& a, const StepSequence& b, std::size_t horizon)
{
    for (std::size_t n = 0; n < horizon; ++n) {
        if (a(n) != b(n)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// ProblemInstance

ProblemInstance::ProblemInstance(SingleValuedOperator H, SingleValuedOperator A, MultiValuedOperator M,
                                 OperatorConstants constants, double lambda, std::optional<Vector> known_solution,
                                 ResolventOptions resolvent, std::string notes)
    : A_(std::move(A))
    , constants_(constants)
    , known_solution_(std::move(known_solution))
    , resolvent_options_(resolvent)
    , notes_(std::move(notes))
{
    constants_.check();
    require_same_dim(H.dim(), A_.dim(), "problem (H, A)");
    engine_ = std::make_shared<const ResolventEngine>(std::move(H), std::move(M), lambda, resolvent);
    if (known_solution_) {
        require_same_dim(known_solution_->dim(), dim(), "problem known solution");
        const double gap = (f_map(*this, known_solution_->values()) - known_solution_->values()).norm();
        if (!(gap <= 1e-8 * std::max(1.0, norm(*known_solution_)))) {
            throw InputError("known solution is not a fixed point of the resolvent map (gap " + format_double(gap) +
                             ")");
        }
    }
}

ProblemInstance ProblemInstance::with_lambda(double lambda) const
{
    return ProblemInstance(H(), A_, M(), constants_, lambda, known_solution_, resolvent_options_, notes_);
}

double ProblemInstance::kappa() const
{
    return contraction_factor(constants_, lambda());
}

Eigen::VectorXd f_map(const ProblemInstance& p, const Eigen::VectorXd& x)
{
    const Eigen::VectorXd arg = p.H().apply(x) - p.lambda() * p.A().apply(x);
    return p.resolvent().resolve(arg);
}

Vector f_map(const ProblemInstance& p, const Vector& x)
{
    return Vector(f_map(p, x.values()));
}

// ---------------------------------------------------------------------------
// Runs

std::string_view to_string(Algorithm a)
{
    switch (a) {
    case Algorithm::fh: return "fh";
    case Algorithm::zgy: return "zgy";
    case Algorithm::mann: return "mann";
    case Algorithm::new_scheme: return "new";
    }
    return "unknown";
}

Algorithm parse_algorithm(std::string_view name)
{
    if (name == "fh") return Algorithm::fh;
    if (name == "zgy") return Algorithm::zgy;
    if (name == "mann") return Algorithm::mann;
    if (name == "new") return Algorithm::new_scheme;
    throw InputError("unknown algorithm '" + std::string(name) + "' (expected fh, zgy, mann or new)");
}

namespace {

constexpr double divergence_norm = 1e150;

void check_inner_tolerance(const ProblemInstance& p, const StoppingRule& stop)
{
    if (!(stop.tolerance >= 0.0)) throw InputError("stopping tolerance must be nonnegative");
    if (stop.max_steps == 0 && !stop.stop_early) throw InputError("fixed-horizon run needs max_steps > 0");
    // Inexact resolvents must sit two orders below the outer tolerance.
    const auto& engine = p.resolvent();
    if (!engine.is_exact() && engine.inner_tolerance() > stop.tolerance / 100.0 * (1.0 + 1e-12)) {
        throw InputError("inner resolvent tolerance " + format_double(engine.inner_tolerance()) +
                         " exceeds stopping tolerance / 100");
    }
}

bool finite_and_bounded(const Eigen::VectorXd& v)
{
    return v.allFinite() && v.norm() < divergence_norm;
}

// Shared driver: `step(n, x_n, F(x_n))` returns x_{n+1}.
template <class Step>
IterationTrace drive(Algorithm algorithm, const ProblemInstance& p, const Vector& x0, const StoppingRule& stop,
                     Step&& step)
{
    check_inner_tolerance(p, stop);
    require_same_dim(x0.dim(), p.dim(), "starting point");

    IterationTrace trace;
    trace.algorithm = algorithm;
    const double kappa = p.kappa();
    if (!(kappa < 1.0)) {
        trace.hypothesis_violated = true;
        trace.hypothesis_notes.push_back("contraction factor " + format_double(kappa) + " >= 1");
    }
    const auto& solution = p.known_solution();
    if (solution) trace.errors.emplace();

    const auto start = std::chrono::steady_clock::now();
    Eigen::VectorXd x = x0.values();
    for (std::size_t n = 0;; ++n) {
        const Eigen::VectorXd fx = f_map(p, x);
        const bool fx_ok = finite_and_bounded(fx);
        if (!fx_ok) trace.diverged = true;
        if (!fx_ok && n > 0) break;

        trace.iterates.emplace_back(x);
        if (solution) trace.errors->push_back((x - solution->values()).norm());
        trace.residuals.push_back(fx_ok ? (fx - x).norm() : std::numeric_limits<double>::infinity());
        trace.wall_times.push_back(std::chrono::steady_clock::now() - start);
        if (!fx_ok) break;

        if (stop.stop_early && trace.residuals.back() <= stop.tolerance) break;
        if (n >= stop.max_steps) break;

        Eigen::VectorXd next = step(n, x, fx);
        if (!finite_and_bounded(next)) {
            trace.diverged = true;
            break;
        }
        x = std::move(next);
    }
    trace.steps_used = trace.iterates.size() - 1;
    trace.converged = !trace.diverged && trace.residuals.back() <= stop.tolerance;
    trace.wall_time = trace.wall_times.back();
    return trace;
}

void note_divergent_series(IterationTrace& trace, const StepSequence& seq, const char* name)
{
    if (!seq.properties().sums_to_infinity) {
        trace.hypothesis_violated = true;
        trace.hypothesis_notes.push_back(std::string("sum of ") + name + "_n is finite");
    }
}

} // namespace

IterationTrace run_fh(const ProblemInstance& p, const Vector& u0, const StoppingRule& stop)
{
    return drive(Algorithm::fh, p, u0, stop,
                 [](std::size_t, const Eigen::VectorXd&, const Eigen::VectorXd& fx) { return fx; });
}

IterationTrace run_zgy(const ProblemInstance& p, const Vector& q0, const StepSequence& xi, const StepSequence& mu,
                       const StoppingRule& stop)
{
    auto trace = drive(Algorithm::zgy, p, q0, stop,
                       [&](std::size_t n, const Eigen::VectorXd& q, const Eigen::VectorXd& fq) -> Eigen::VectorXd {
                           const double m = mu(n);
                           const double x = xi(n);
                           const Eigen::VectorXd r = (1.0 - m) * q + m * fq;
                           return (1.0 - x) * q + x * f_map(p, r);
                       });
    note_divergent_series(trace, xi, "xi");
    trace.xi = xi;
    trace.mu = mu;
    return trace;
}

IterationTrace run_mann(const ProblemInstance& p, const Vector& v0, const StepSequence& xi, const StoppingRule& stop)
{
    auto trace = drive(Algorithm::mann, p, v0, stop,
                       [&](std::size_t n, const Eigen::VectorXd& v, const Eigen::VectorXd& fv) -> Eigen::VectorXd {
                           const double x = xi(n);
                           return (1.0 - x) * v + x * fv;
                       });
    note_divergent_series(trace, xi, "xi");
    trace.xi = xi;
    return trace;
}

IterationTrace run_new(const ProblemInstance& p, const Vector& s0, const StepSequence& mu, const StoppingRule& stop)
{
    auto trace = drive(Algorithm::new_scheme, p, s0, stop,
                       [&](std::size_t n, const Eigen::VectorXd& s, const Eigen::VectorXd& fs) -> Eigen::VectorXd {
                           const double m = mu(n);
                           const Eigen::VectorXd t = (1.0 - m) * s + m * fs;
                           return f_map(p, t);
                       });
    note_divergent_series(trace, mu, "mu");
    trace.mu = mu;
    return trace;
}

IterationTrace run_algorithm(Algorithm algorithm, const ProblemInstance& p, const Vector& x0, const StepSequence& xi,
                             const StepSequence& mu, const StoppingRule& stop)
{
    switch (algorithm) {
    case Algorithm::fh: return run_fh(p, x0, stop);
    case Algorithm::zgy: return run_zgy(p, x0, xi, mu, stop);
    case Algorithm::mann: return run_mann(p, x0, xi, stop);
    case Algorithm::new_scheme: return run_new(p, x0, mu, stop);
    }
    throw InputError("unknown algorithm");
}

} // namespace hmvi
