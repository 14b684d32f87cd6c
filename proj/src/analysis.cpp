#include "hmvi/analysis.hpp"

#include "hmvi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hmvi {

double contraction_factor(const OperatorConstants& c, double lambda)
{
    if (!(lambda > 0.0)) throw InputError("contraction_factor requires lambda > 0");
    const double radicand = c.tau * c.tau - 2.0 * lambda * c.r + lambda * lambda * c.s * c.s;
    if (radicand < 0.0) {
        // r <= s tau makes the radicand a sum of squares; only rounding may dip below zero.
        if (radicand < -1e-12 * (c.tau * c.tau + lambda * lambda * c.s * c.s)) {
            throw ConstantsError("contraction factor radicand is negative; constants are inconsistent");
        }
        return 0.0;
    }
    return std::sqrt(radicand) / (c.gamma + lambda * c.eta);
}

FeasibilityResult feasible_lambda(const OperatorConstants& c)
{
    FeasibilityResult out;
    const double a = c.s * c.s - c.eta * c.eta;
    const double b = c.r + c.gamma * c.eta;
    const double d = c.tau * c.tau - c.gamma * c.gamma;

    out.preconditions.push_back({"s > eta", c.s > c.eta, c.s, c.eta});
    out.preconditions.push_back({"(r + gamma eta)^2 > (s^2 - eta^2)(tau^2 - gamma^2)", b * b > a * d, b * b, a * d});

    if (!(c.s > c.eta)) {
        out.regime = FeasibilityRegime::outside_formula;
        out.diagnostic = "s <= eta: the closed-form lambda interval does not apply; scan kappa directly";
        return out;
    }
    if (!(b * b > a * d)) {
        out.diagnostic = "(r + gamma eta)^2 <= (s^2 - eta^2)(tau^2 - gamma^2): no lambda gives kappa < 1";
        return out;
    }
    out.center = b / a;
    out.radius = std::sqrt(b * b - a * d) / a;
    double lo = out.center - out.radius;
    const double hi = out.center + out.radius;
    if (lo <= 0.0) {
        lo = 0.0;
        out.clipped_at_zero = true;
    }
    if (!(hi > lo)) {
        out.diagnostic = "empty lambda interval after clipping at zero";
        return out;
    }
    out.feasible = true;
    out.interval = std::pair{lo, hi};
    return out;
}

KappaScan scan_contraction(const OperatorConstants& c, double lo, double hi, std::size_t points)
{
    if (!(lo > 0.0 && hi >= lo) || points == 0) throw InputError("scan_contraction: invalid grid");
    KappaScan scan;
    scan.points.reserve(points);
    const double step = points > 1 ? std::log(hi / lo) / static_cast<double>(points - 1) : 0.0;
    for (std::size_t i = 0; i < points; ++i) {
        const double lambda = lo * std::exp(step * static_cast<double>(i));
        scan.points.push_back({lambda, contraction_factor(c, lambda)});
    }
    scan.best = *std::min_element(scan.points.begin(), scan.points.end(),
                                  [](const KappaPoint& x, const KappaPoint& y) { return x.kappa < y.kappa; });
    bool open = false;
    for (const auto& pt : scan.points) {
        if (pt.kappa < 1.0) {
            if (!open) scan.sub_one_runs.push_back({pt.lambda, pt.lambda});
            scan.sub_one_runs.back().second = pt.lambda;
            open = true;
        } else {
            open = false;
        }
    }
    return scan;
}

double envelope_fh(double kappa, double e0, std::size_t n)
{
    return std::pow(kappa, static_cast<double>(n)) * e0;
}

double envelope_new(double kappa, const StepSequence& mu, double e0, std::size_t n)
{
    double product = 1.0;
    for (std::size_t i = 1; i <= n; ++i) product *= 1.0 - mu(i - 1) * (1.0 - kappa);
    return envelope_fh(kappa, e0, n) * product;
}

double audit_slack(const ProblemInstance& p)
{
    return 1e-8 + 10.0 * p.resolvent().inner_tolerance();
}

std::optional<double> envelope_for(const IterationTrace& trace, double kappa, std::size_t n)
{
    if (!trace.errors || trace.errors->empty()) return std::nullopt;
    const double e0 = trace.errors->front();
    switch (trace.algorithm) {
    case Algorithm::fh: return envelope_fh(kappa, e0, n);
    case Algorithm::new_scheme:
        if (!trace.mu) return std::nullopt;
        return envelope_new(kappa, *trace.mu, e0, n);
    case Algorithm::zgy:
    case Algorithm::mann: return std::nullopt;
    }
    return std::nullopt;
}

std::vector<EnvelopeCheck> check_envelope(const IterationTrace& trace, double kappa, double slack)
{
    std::vector<EnvelopeCheck> checks;
    if (!trace.errors) return checks;
    const auto& e = *trace.errors;
    for (std::size_t n = 0; n < e.size(); ++n) {
        const auto bound = envelope_for(trace, kappa, n);
        if (!bound) return checks;
        checks.push_back({std::string(to_string(trace.algorithm)), n, *bound, e[n], e[n] <= *bound + slack});
    }
    return checks;
}

namespace {

// Per-step error contraction factor of each scheme, from Lipschitz bounds on F.
double step_factor(const IterationTrace& trace, double kappa, std::size_t n)
{
    const double mu = trace.mu ? (*trace.mu)(n) : 0.0;
    const double xi = trace.xi ? (*trace.xi)(n) : 1.0;
    switch (trace.algorithm) {
    case Algorithm::fh: return kappa;
    case Algorithm::new_scheme: return kappa * (1.0 - mu * (1.0 - kappa));
    case Algorithm::mann: return 1.0 - xi * (1.0 - kappa);
    case Algorithm::zgy: return 1.0 - xi + xi * kappa * (1.0 - mu * (1.0 - kappa));
    }
    return 1.0;
}

} // namespace

StepAudit audit_step_contraction(const IterationTrace& trace, double kappa, double slack)
{
    StepAudit audit;
    if (!trace.errors) return audit;
    const auto& e = *trace.errors;
    audit.max_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n + 1 < e.size(); ++n) {
        const double excess = e[n + 1] - step_factor(trace, kappa, n) * e[n];
        audit.max_excess = std::max(audit.max_excess, excess);
        ++audit.checked;
        if (excess > slack) ++audit.violations;
    }
    return audit;
}

std::string_view to_string(Verdict v)
{
    switch (v) {
    case Verdict::a_faster: return "a-faster";
    case Verdict::same_rate: return "same-rate";
    case Verdict::undecided: return "undecided";
    }
    return "undecided";
}

RateReport rate_compare(const ProblemInstance& p, const IterationTrace& a, const IterationTrace& b,
                        const RateOptions& options)
{
    const auto& solution = p.known_solution();
    if (!solution || !a.errors || !b.errors) {
        throw CannotCompare("rate comparison needs a known solution and traces with recorded errors");
    }
    RateReport report;
    report.algorithm_a = a.algorithm;
    report.algorithm_b = b.algorithm;
    report.kappa = p.kappa();
    report.lambda = p.lambda();
    report.equal_starts = !a.iterates.empty() && !b.iterates.empty() && a.iterates.front() == b.iterates.front();

    const auto& ea = *a.errors;
    const auto& eb = *b.errors;
    const std::size_t len = std::min(ea.size(), eb.size());
    const double floor = 10.0 * std::numeric_limits<double>::epsilon() * (1.0 + norm(*solution));

    std::vector<std::size_t> kept;
    for (std::size_t n = 0; n < len; ++n) {
        const bool censored = !(eb[n] >= floor);
        report.censored.push_back(censored);
        report.pi.push_back(censored ? std::numeric_limits<double>::quiet_NaN() : ea[n] / eb[n]);
        if (!censored) kept.push_back(n);
    }

    if (a.algorithm == Algorithm::new_scheme && b.algorithm == Algorithm::fh && a.mu &&
        a.mu->properties().bounded_below_by) {
        report.theoretical_ratio = 1.0 - *a.mu->properties().bounded_below_by * (1.0 - report.kappa);
    }
    report.envelope_checks = check_envelope(a, report.kappa, audit_slack(p));
    auto checks_b = check_envelope(b, report.kappa, audit_slack(p));
    report.envelope_checks.insert(report.envelope_checks.end(), checks_b.begin(), checks_b.end());

    if (kept.size() < 2) return report;

    const std::size_t window = std::min(
        kept.size(), std::max<std::size_t>(
                         2, static_cast<std::size_t>(std::ceil(options.window_fraction * static_cast<double>(kept.size())))));
    const std::vector<std::size_t> tail(kept.end() - static_cast<std::ptrdiff_t>(window), kept.end());

    report.trailing_decreasing = true;
    for (std::size_t k = 1; k < tail.size(); ++k) {
        if (report.pi[tail[k]] > report.pi[tail[k - 1]]) report.trailing_decreasing = false;
    }

    const bool hit_zero = std::any_of(tail.begin(), tail.end(), [&](std::size_t n) { return report.pi[n] == 0.0; });
    if (hit_zero) {
        report.fitted_ratio = 0.0;
    } else {
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (std::size_t n : tail) {
            const double x = static_cast<double>(n);
            const double y = std::log(report.pi[n]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double m = static_cast<double>(tail.size());
        const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        report.fitted_ratio = std::exp(slope);
    }

    const double ratio = *report.fitted_ratio;
    const double last = report.pi[tail.back()];
    if (ratio < 1.0 - options.margin && report.trailing_decreasing && last < 1.0) {
        report.verdict = Verdict::a_faster;
    } else if (std::abs(ratio - 1.0) <= options.margin) {
        report.verdict = Verdict::same_rate;
    } else {
        report.verdict = Verdict::undecided;
    }
    return report;
}

namespace {

AuditReport audit_traces(const IterationTrace& q, const IterationTrace& s, const StepSequence* xi,
                         const StepSequence* mu, double kappa, double slack, double gap_tolerance)
{
    AuditReport report;
    report.algorithm_q = q.algorithm;
    report.algorithm_s = s.algorithm;
    report.gap_tolerance = gap_tolerance;

    const std::size_t len = std::min(q.iterates.size(), s.iterates.size());
    if (q.iterates.size() != s.iterates.size()) {
        report.warnings.push_back("trace lengths differ (" + std::to_string(q.iterates.size()) + " vs " +
                                  std::to_string(s.iterates.size()) + "); truncated to " + std::to_string(len));
    }
    for (std::size_t n = 0; n < len; ++n) report.gaps.push_back(distance(q.iterates[n], s.iterates[n]));
    report.final_gap = report.gaps.empty() ? 0.0 : report.gaps.back();
    report.gap_decayed = !report.gaps.empty() && report.final_gap <= gap_tolerance;

    if (mu) report.sum_mu_diverges = mu->properties().sums_to_infinity;
    if (xi && mu) report.sum_xi_mu_diverges = product_sums_to_infinity(*xi, *mu);

    report.recursion_applicable = xi && mu && q.errors && s.errors;
    if (!report.recursion_applicable) return report;

    const auto& eq = *q.errors;
    const auto& es = *s.errors;
    const auto& g = report.gaps;
    for (std::size_t n = 0; n + 1 < len; ++n) {
        const double x = (*xi)(n);
        const double m = (*mu)(n);
        const double shrink = 1.0 - m * (1.0 - kappa);
        const double carry = (1.0 - x) * (1.0 + kappa * shrink);

        const double s_bound = (1.0 - x * m * (1.0 - kappa)) * g[n] + carry * es[n];
        const double s_excess = g[n + 1] - s_bound;
        report.s_side.max_excess = std::max(report.s_side.max_excess, s_excess);
        ++report.s_side.checked;
        if (s_excess > slack) ++report.s_side.violations;

        const double q_bound = shrink * g[n] + carry * eq[n];
        const double q_excess = g[n + 1] - q_bound;
        report.q_side.max_excess = std::max(report.q_side.max_excess, q_excess);
        ++report.q_side.checked;
        if (q_excess > slack) ++report.q_side.violations;
    }
    return report;
}

struct TwoStepForm
{
    StepSequence xi;
    StepSequence mu;
};

std::optional<TwoStepForm> as_two_step(const IterationTrace& t)
{
    switch (t.algorithm) {
    case Algorithm::fh: return TwoStepForm{StepSequence::constant(1.0), StepSequence::constant(0.0)};
    case Algorithm::mann:
        if (t.xi) return TwoStepForm{*t.xi, StepSequence::constant(0.0)};
        break;
    case Algorithm::zgy:
        if (t.xi && t.mu) return TwoStepForm{*t.xi, *t.mu};
        break;
    case Algorithm::new_scheme:
        if (t.mu) return TwoStepForm{StepSequence::constant(1.0), *t.mu};
        break;
    }
    return std::nullopt;
}

std::optional<StepSequence> as_new_scheme(const IterationTrace& t, std::size_t horizon)
{
    const auto form = as_two_step(t);
    if (!form) return std::nullopt;
    if (!same_terms(form->xi, StepSequence::constant(1.0), horizon)) return std::nullopt;
    return form->mu;
}

} // namespace

AuditReport equivalence_audit(const IterationTrace& q, const IterationTrace& s, const StepSequence& xi,
                              const StepSequence& mu, double kappa, double slack, double gap_tolerance)
{
    return audit_traces(q, s, &xi, &mu, kappa, slack, gap_tolerance);
}

AuditReport audit_pair(const IterationTrace& a, const IterationTrace& b, double kappa, double slack,
                       double gap_tolerance)
{
    const std::size_t horizon = std::min(a.iterates.size(), b.iterates.size());
    for (const auto& [q, s] : {std::pair{&a, &b}, std::pair{&b, &a}}) {
        const auto two_step = as_two_step(*q);
        const auto new_mu = as_new_scheme(*s, horizon);
        if (two_step && new_mu && same_terms(two_step->mu, *new_mu, horizon)) {
            return audit_traces(*q, *s, &two_step->xi, &two_step->mu, kappa, slack, gap_tolerance);
        }
    }
    return audit_traces(a, b, nullptr, nullptr, kappa, slack, gap_tolerance);
}

SharpnessReport boundary_sharpness(const OperatorConstants& c)
{
    SharpnessReport report;
    report.feasibility = feasible_lambda(c);
    if (!report.feasibility.feasible) return report;

    const auto [lo, hi] = *report.feasibility.interval;
    constexpr double step = 1e-6;
    report.midpoint_kappa = contraction_factor(c, 0.5 * (lo + hi));
    report.hi_kappa = contraction_factor(c, hi);
    report.above_hi_kappa = contraction_factor(c, hi + step);
    if (report.feasibility.clipped_at_zero) {
        report.lo_kappa = c.tau / c.gamma;
    } else {
        report.lo_kappa = contraction_factor(c, lo);
        if (lo - step > 0.0) report.below_lo_kappa = contraction_factor(c, lo - step);
    }

    bool ok = report.midpoint_kappa < 1.0 && std::abs(report.hi_kappa - 1.0) <= 1e-9 && report.above_hi_kappa >= 1.0;
    if (!report.feasibility.clipped_at_zero) {
        ok = ok && std::abs(report.lo_kappa - 1.0) <= 1e-9;
        if (report.below_lo_kappa) ok = ok && *report.below_lo_kappa >= 1.0;
    }
    report.passed = ok;
    return report;
}

} // namespace hmvi
