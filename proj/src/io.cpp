#include "hmvi/io.hpp"

#include "hmvi/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hmvi {

namespace {

std::ofstream open_output(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    return out;
}

double parse_field(const std::string& text, const std::filesystem::path& path)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw InputError("malformed number '" + text + "' in " + path.string());
    }
    return v;
}

nlohmann::json number_or_null(double v)
{
    if (std::isfinite(v)) return v;
    return nullptr;
}

} // namespace

std::string format_number(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_trace_csv(const std::filesystem::path& path, const IterationTrace& trace, bool with_timing)
{
    auto out = open_output(path);
    out << "n,residual,error,wall_nanos\n";
    for (std::size_t n = 0; n < trace.residuals.size(); ++n) {
        out << n << ',' << format_number(trace.residuals[n]) << ',';
        if (trace.errors) out << format_number((*trace.errors)[n]);
        out << ',' << (with_timing ? trace.wall_times[n].count() : 0) << '\n';
    }
    if (!out) throw InputError("failed writing " + path.string());
}

std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "n,residual,error,wall_nanos") {
        throw InputError("missing trace CSV header in " + path.string());
    }
    std::vector<TraceRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (line.back() == ',') fields.emplace_back();
        if (fields.size() != 4) throw InputError("malformed trace row '" + line + "' in " + path.string());
        TraceRow row;
        row.n = static_cast<std::size_t>(parse_field(fields[0], path));
        row.residual = parse_field(fields[1], path);
        if (!fields[2].empty()) row.error = parse_field(fields[2], path);
        row.wall_nanos = static_cast<long long>(parse_field(fields[3], path));
        rows.push_back(row);
    }
    return rows;
}

nlohmann::json to_json(const OperatorConstants& c)
{
    return {{"gamma", c.gamma}, {"tau", c.tau}, {"r", c.r}, {"s", c.s}, {"eta", c.eta}};
}

nlohmann::json to_json(const FeasibilityResult& result)
{
    nlohmann::json j;
    j["feasible"] = result.feasible;
    j["regime"] = result.regime == FeasibilityRegime::closed_form ? "closed-form" : "outside-formula";
    if (result.interval) {
        j["interval"] = {result.interval->first, result.interval->second};
        j["clipped_at_zero"] = result.clipped_at_zero;
    } else {
        j["interval"] = nullptr;
    }
    j["preconditions"] = nlohmann::json::array();
    for (const auto& p : result.preconditions) {
        j["preconditions"].push_back({{"name", p.name}, {"holds", p.holds}, {"lhs", p.lhs}, {"rhs", p.rhs}});
    }
    if (!result.diagnostic.empty()) j["diagnostic"] = result.diagnostic;
    return j;
}

nlohmann::json to_json(const RateReport& report)
{
    nlohmann::json j;
    j["a"] = std::string(to_string(report.algorithm_a));
    j["b"] = std::string(to_string(report.algorithm_b));
    j["pi"] = nlohmann::json::array();
    for (double p : report.pi) j["pi"].push_back(number_or_null(p));
    j["censored"] = report.censored;
    j["verdict"] = std::string(to_string(report.verdict));
    j["fitted_ratio"] = report.fitted_ratio ? number_or_null(*report.fitted_ratio) : nlohmann::json(nullptr);
    j["trailing_decreasing"] = report.trailing_decreasing;
    j["equal_starts"] = report.equal_starts;
    j["kappa"] = report.kappa;
    j["lambda"] = report.lambda;
    j["theoretical_ratio"] =
        report.theoretical_ratio ? nlohmann::json(*report.theoretical_ratio) : nlohmann::json(nullptr);
    j["envelope_checks"] = nlohmann::json::array();
    for (const auto& c : report.envelope_checks) {
        j["envelope_checks"].push_back(
            {{"algorithm", c.algorithm}, {"n", c.n}, {"bound", c.bound}, {"measured", c.measured}, {"pass", c.pass}});
    }
    return j;
}

nlohmann::json to_json(const AuditReport& report)
{
    const auto recursion = [](const RecursionCheck& r) {
        return nlohmann::json{{"checked", r.checked},
                              {"violations", r.violations},
                              {"max_excess", r.checked ? number_or_null(r.max_excess) : nlohmann::json(nullptr)}};
    };
    nlohmann::json j;
    j["q"] = std::string(to_string(report.algorithm_q));
    j["s"] = std::string(to_string(report.algorithm_s));
    j["steps"] = report.gaps.empty() ? 0 : report.gaps.size() - 1;
    j["initial_gap"] = report.gaps.empty() ? 0.0 : report.gaps.front();
    j["final_gap"] = report.final_gap;
    j["gap_tolerance"] = report.gap_tolerance;
    j["gap_decayed"] = report.gap_decayed;
    j["recursion_applicable"] = report.recursion_applicable;
    if (report.recursion_applicable) {
        j["s_side_recursion"] = recursion(report.s_side);
        j["q_side_recursion"] = recursion(report.q_side);
        j["sum_mu_diverges"] = report.sum_mu_diverges;
        j["sum_xi_mu_diverges"] = report.sum_xi_mu_diverges;
    }
    j["warnings"] = report.warnings;
    j["passed"] = report.passed();
    return j;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc)
{
    auto out = open_output(path);
    out << doc.dump(2) << '\n';
    if (!out) throw InputError("failed writing " + path.string());
}

} // namespace hmvi
