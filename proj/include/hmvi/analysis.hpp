#pragma once

#include "hmvi/schemes.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace hmvi {

/// kappa = sqrt(tau^2 - 2 lambda r + lambda^2 s^2) / (gamma + lambda eta).
/// kappa < 1 makes the resolvent map F a contraction.
double contraction_factor(const OperatorConstants& c, double lambda);

struct Precondition
{
    std::string name;
    bool holds = false;
    double lhs = 0.0;
    double rhs = 0.0;
};

enum class FeasibilityRegime
{
    closed_form,  ///< s > eta: the lambda interval has a closed form
    outside_formula, ///< s <= eta: only a direct scan of kappa applies
};

struct FeasibilityResult
{
    bool feasible = false;
    FeasibilityRegime regime = FeasibilityRegime::closed_form;
    /// Open interval (lo, hi) of lambda with kappa < 1; lo is clipped at 0.
    std::optional<std::pair<double, double>> interval;
    double center = 0.0;
    double radius = 0.0;
    bool clipped_at_zero = false;
    std::vector<Precondition> preconditions;
    std::string diagnostic;
};

/// Closed-form set of lambda for which kappa < 1, when s > eta and
/// (r + gamma eta)^2 > (s^2 - eta^2)(tau^2 - gamma^2).
FeasibilityResult feasible_lambda(const OperatorConstants& c);

struct KappaPoint
{
    double lambda;
    double kappa;
};

struct KappaScan
{
    std::vector<KappaPoint> points;
    KappaPoint best;
    /// Grid points with kappa < 1, as [first, last] runs.
    std::vector<std::pair<double, double>> sub_one_runs;
};

/// kappa on a log grid over [lo, hi]; hypothesis-free check that also covers
/// the s <= eta regime.
KappaScan scan_contraction(const OperatorConstants& c, double lo = 1e-6, double hi = 1e6, std::size_t points = 1201);

/// kappa^n e0
double envelope_fh(double kappa, double e0, std::size_t n);

/// kappa^n e0 prod_{i=1..n} [1 - mu_{i-1} (1 - kappa)]
double envelope_new(double kappa, const StepSequence& mu, double e0, std::size_t n);

/// Default absolute slack for inequality audits on traces.
double audit_slack(const ProblemInstance& p);

struct EnvelopeCheck
{
    std::string algorithm;
    std::size_t n = 0;
    double bound = 0.0;
    double measured = 0.0;
    bool pass = false;
};

/// e_n against the theoretical envelope of the trace's algorithm. Only FH and
/// the new scheme have one; other algorithms yield no checks.
std::vector<EnvelopeCheck> check_envelope(const IterationTrace& trace, double kappa, double slack);

/// Envelope value at step n for the trace's algorithm, when it has one.
std::optional<double> envelope_for(const IterationTrace& trace, double kappa, std::size_t n);

struct StepAudit
{
    std::size_t checked = 0;
    std::size_t violations = 0;
    double max_excess = 0.0;
};

/// e_{n+1} <= kappa [1 - mu_n (1 - kappa)] e_n + slack, with mu = 0 for FH.
StepAudit audit_step_contraction(const IterationTrace& trace, double kappa, double slack);

enum class Verdict
{
    a_faster,
    same_rate,
    undecided,
};

std::string_view to_string(Verdict v);

struct RateOptions
{
    /// Fitted per-step ratio must fall below 1 - margin for a-faster and
    /// inside [1 - margin, 1 + margin] for same-rate.
    double margin = 0.05;
    /// Fraction of the uncensored steps, counted from the end, used for the fit.
    double window_fraction = 0.25;
};

struct RateReport
{
    Algorithm algorithm_a = Algorithm::fh;
    Algorithm algorithm_b = Algorithm::fh;
    /// pi_n = e_a(n) / e_b(n) over the common length; censored entries hold NaN.
    std::vector<double> pi;
    std::vector<bool> censored;
    Verdict verdict = Verdict::undecided;
    /// exp of the least-squares slope of log pi_n over the trailing window.
    std::optional<double> fitted_ratio;
    bool trailing_decreasing = false;
    bool equal_starts = false;
    double kappa = 0.0;
    double lambda = 0.0;
    /// 1 - mu (1 - kappa) when a is the new scheme with mu_n >= mu and b is FH.
    std::optional<double> theoretical_ratio;
    std::vector<EnvelopeCheck> envelope_checks;
};

/// Compares the error decay of two traces of the same problem; throws
/// CannotCompare without a known solution.
RateReport rate_compare(const ProblemInstance& p, const IterationTrace& a, const IterationTrace& b,
                        const RateOptions& options = {});

struct RecursionCheck
{
    std::size_t checked = 0;
    std::size_t violations = 0;
    double max_excess = -std::numeric_limits<double>::infinity();
};

struct AuditReport
{
    Algorithm algorithm_q = Algorithm::zgy;
    Algorithm algorithm_s = Algorithm::new_scheme;
    std::vector<double> gaps;
    double final_gap = 0.0;
    bool gap_decayed = false;
    double gap_tolerance = 0.0;
    /// The pair fits the two-step / new-scheme template with a shared mu.
    bool recursion_applicable = false;
    /// g_{n+1} <= [1 - xi mu (1 - kappa)] g_n + rho_n with rho_n from ||s_n - x*||.
    RecursionCheck s_side;
    /// g_{n+1} <= [1 - mu (1 - kappa)] g_n + rho_n with rho_n from ||q_n - x*||.
    RecursionCheck q_side;
    bool sum_mu_diverges = false;
    bool sum_xi_mu_diverges = false;
    std::vector<std::string> warnings;

    bool passed() const
    {
        return gap_decayed && s_side.violations == 0 && q_side.violations == 0;
    }
};

/// Gap recursions between a two-step trace q (parameters xi, mu) and a
/// new-scheme trace s (parameter mu). Error terms come from the traces'
/// recorded errors; without them only the gap decay is reported.
AuditReport equivalence_audit(const IterationTrace& q, const IterationTrace& s, const StepSequence& xi,
                              const StepSequence& mu, double kappa, double slack, double gap_tolerance = 1e-8);

/// Audits any two traces. FH, Mann and the new scheme are special cases of
/// the two-step scheme (FH = ZGY(1, 0), Mann = ZGY(xi, 0), new = ZGY(1, mu)),
/// so the recursions are checked whenever one side can be read as ZGY(xi, mu)
/// and the other as new(mu) with the same mu; otherwise only gaps are audited.
AuditReport audit_pair(const IterationTrace& a, const IterationTrace& b, double kappa, double slack,
                       double gap_tolerance = 1e-8);

struct SharpnessReport
{
    FeasibilityResult feasibility;
    double midpoint_kappa = 0.0;
    double lo_kappa = 0.0;
    double hi_kappa = 0.0;
    std::optional<double> below_lo_kappa;
    double above_hi_kappa = 0.0;
    bool passed = false;
};

/// kappa at the interval midpoint, at both endpoints (1 up to 1e-9, or tau/gamma
/// at a clipped zero endpoint) and 1e-6 outside them.
SharpnessReport boundary_sharpness(const OperatorConstants& c);

} // namespace hmvi
