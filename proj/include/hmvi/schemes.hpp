#pragma once

#include "hmvi/resolvent.hpp"

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hmvi {

/// Series properties of a step sequence, derived from its family rather than
/// from finitely many terms.
struct StepProperties
{
    bool sums_to_infinity = false;
    bool tends_to_zero = false;
    /// Largest mu with mu <= value(n) for all n, when positive.
    std::optional<double> bounded_below_by;
};

/// Relaxation parameters xi_n, mu_n in [0, 1].
class StepSequence
{
public:
    enum class Family
    {
        constant,
        harmonic,           ///< 1 / (n + offset), offset >= 1
        one_minus_harmonic, ///< 1 - 1 / (n + offset), offset >= 1
        table,              ///< explicit values; the last one repeats forever
    };

    static StepSequence constant(double value);
    static StepSequence harmonic(double offset = 1.0);
    static StepSequence one_minus_harmonic(double offset = 1.0);
    static StepSequence table(std::vector<double> values);

    double operator()(std::size_t n) const;

    Family family() const { return family_; }
    const StepProperties& properties() const { return properties_; }
    /// Round-trippable text form, e.g. "const:0.9" or "harmonic:1".
    std::string describe() const;

private:
    StepSequence(Family family, std::vector<double> params);

    Family family_;
    std::vector<double> params_;
    StepProperties properties_;
};

StepSequence make_step_sequence(StepSequence::Family family, const std::vector<double>& params);

/// Parses "const:V", "harmonic[:OFFSET]", "one-minus-harmonic[:OFFSET]" or
/// "table:V1,V2,...".
StepSequence parse_step_sequence(std::string_view text);

/// Whether sum xi_n mu_n diverges, decided per family pair.
bool product_sums_to_infinity(const StepSequence& xi, const StepSequence& mu);

/// Iterates agree when the terms agree for every n < horizon.
bool same_terms(const StepSequence& a, const StepSequence& b, std::size_t horizon);

/// The inclusion 0 in A(u) + M(u) together with the resolvent data
/// (H, lambda) and declared constants.
class ProblemInstance
{
public:
    /// Throws ConstantsError on inconsistent constants and InputError when a
    /// supplied known solution is not a fixed point of the resolvent map.
    ProblemInstance(SingleValuedOperator H, SingleValuedOperator A, MultiValuedOperator M,
                    OperatorConstants constants, double lambda, std::optional<Vector> known_solution = {},
                    ResolventOptions resolvent = {}, std::string notes = {});

    /// Same problem with a different lambda.
    ProblemInstance with_lambda(double lambda) const;

    Index dim() const { return A_.dim(); }
    double lambda() const { return engine_->lambda(); }
    const SingleValuedOperator& H() const { return engine_->H(); }
    const SingleValuedOperator& A() const { return A_; }
    const MultiValuedOperator& M() const { return engine_->M(); }
    const OperatorConstants& constants() const { return constants_; }
    const std::optional<Vector>& known_solution() const { return known_solution_; }
    const ResolventEngine& resolvent() const { return *engine_; }
    const ResolventOptions& resolvent_options() const { return resolvent_options_; }
    const std::string& notes() const { return notes_; }

    /// Contraction factor of the resolvent map at this lambda.
    double kappa() const;
    bool contraction_holds() const { return kappa() < 1.0; }

private:
    SingleValuedOperator A_;
    OperatorConstants constants_;
    std::optional<Vector> known_solution_;
    ResolventOptions resolvent_options_;
    std::string notes_;
    std::shared_ptr<const ResolventEngine> engine_;
};

/// F(x) = R[Hx - lambda Ax].
Vector f_map(const ProblemInstance& p, const Vector& x);
Eigen::VectorXd f_map(const ProblemInstance& p, const Eigen::VectorXd& x);

struct StoppingRule
{
    double tolerance = 1e-10;
    std::size_t max_steps = 100000;
    /// When false the run always performs max_steps steps; `converged` then
    /// only reports the final residual against the tolerance.
    bool stop_early = true;
};

enum class Algorithm
{
    fh,
    zgy,
    mann,
    new_scheme,
};

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view name);

struct IterationTrace
{
    Algorithm algorithm = Algorithm::fh;
    std::vector<Vector> iterates;
    /// ||x_n - x*||, present when the problem has a known solution.
    std::optional<std::vector<double>> errors;
    /// ||F(x_n) - x_n||
    std::vector<double> residuals;
    /// Cumulative wall time at each recorded step.
    std::vector<std::chrono::nanoseconds> wall_times;
    std::size_t steps_used = 0;
    bool converged = false;
    /// An iterate became non-finite; the trace ends at the last finite one.
    bool diverged = false;
    bool hypothesis_violated = false;
    std::vector<std::string> hypothesis_notes;
    std::optional<StepSequence> xi;
    std::optional<StepSequence> mu;
    std::chrono::nanoseconds wall_time{0};
};

IterationTrace run_fh(const ProblemInstance& p, const Vector& u0, const StoppingRule& stop = {});
IterationTrace run_zgy(const ProblemInstance& p, const Vector& q0, const StepSequence& xi, const StepSequence& mu,
                       const StoppingRule& stop = {});
IterationTrace run_mann(const ProblemInstance& p, const Vector& v0, const StepSequence& xi,
                        const StoppingRule& stop = {});
IterationTrace run_new(const ProblemInstance& p, const Vector& s0, const StepSequence& mu,
                       const StoppingRule& stop = {});

/// Dispatches on `algorithm`; ignores the sequences an algorithm does not use.
IterationTrace run_algorithm(Algorithm algorithm, const ProblemInstance& p, const Vector& x0,
                             const StepSequence& xi, const StepSequence& mu, const StoppingRule& stop = {});

} // namespace hmvi
