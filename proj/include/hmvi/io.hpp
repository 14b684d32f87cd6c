#pragma once

#include "hmvi/analysis.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <vector>

namespace hmvi {

/// One row of a trace CSV: n, residual, error (empty without x*), wall_nanos.
struct TraceRow
{
    std::size_t n = 0;
    double residual = 0.0;
    std::optional<double> error;
    long long wall_nanos = 0;
};

/// Writes the trace CSV (header row, LF endings, doubles at round-trip
/// precision). With `with_timing` false the wall_nanos column is all zeros.
void write_trace_csv(const std::filesystem::path& path, const IterationTrace& trace, bool with_timing);
std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path);

/// Shortest text that parses back to the same double.
std::string format_number(double v);

nlohmann::json to_json(const RateReport& report);
nlohmann::json to_json(const AuditReport& report);
nlohmann::json to_json(const FeasibilityResult& result);
nlohmann::json to_json(const OperatorConstants& c);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

} // namespace hmvi
