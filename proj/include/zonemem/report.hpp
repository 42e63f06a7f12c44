#pragma once

#include <zonemem/strategy.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace zonemem {

inline constexpr int kReportSchema = 1;

enum class LoopClosureOutcome { no_opportunity, accepted, missed };

std::string_view to_string(LoopClosureOutcome outcome);
LoopClosureOutcome loop_closure_outcome_from_string(std::string_view name);

struct ScheduleEntry {
    double t_start = 0.0;
    std::size_t k_max = 1;

    friend bool operator==(const ScheduleEntry&, const ScheduleEntry&) = default;
};

/// Parameters of the run, echoed into the report.
struct ConfigEcho {
    std::string map_hash;
    std::string trajectory_hash;
    std::string route_hash;  // empty when no route was supplied
    StrategyKind strategy = StrategyKind::semantic;
    std::vector<ScheduleEntry> budget_schedule;
    double r_load = 0.0;
    double r_unload = 0.0;
    double lc_radius = 0.0;
    std::size_t lc_min_resident = 1;
    bool prefetch = false;
    double route_step = 0.0;

    friend bool operator==(const ConfigEcho&, const ConfigEcho&) = default;
};

struct TimeseriesRow {
    double t = 0.0;
    std::size_t resident_count = 0;
    std::uint64_t resident_bytes = 0;
    std::size_t k_max = 0;
    std::uint64_t cum_transactions = 0;
    LoopClosureOutcome lc_outcome = LoopClosureOutcome::no_opportunity;

    friend bool operator==(const TimeseriesRow&, const TimeseriesRow&) = default;
};

struct Summary {
    std::uint64_t total_transactions = 0;
    std::uint64_t batch_loads = 0;
    std::uint64_t batch_unloads = 0;
    std::uint64_t kf_loads = 0;    // keyframes loaded, all load kinds
    std::uint64_t kf_unloads = 0;  // keyframes unloaded, all unload kinds
    std::uint64_t peak_resident_count = 0;
    std::uint64_t peak_resident_bytes = 0;
    std::uint64_t budget_violations = 0;
    std::uint64_t over_budget_zone_events = 0;
    std::uint64_t lc_opportunities = 0;
    std::uint64_t lc_accepted = 0;
    double lc_hit_ratio = 0.0;

    friend bool operator==(const Summary&, const Summary&) = default;
};

struct ReplayReport {
    int schema = kReportSchema;
    ConfigEcho config;
    Summary summary;
    std::vector<TimeseriesRow> timeseries;  // one row per tick
    EventList events;

    friend bool operator==(const ReplayReport&, const ReplayReport&) = default;
};

/// Folds events and time series into a summary. Throws ValidationError when
/// they disagree: residency or transaction totals that do not match the
/// event fold, non-increasing time, or events outside the tick range.
ReplayReport summarize(ConfigEcho config, EventList events, std::vector<TimeseriesRow> timeseries);

struct ComparisonRow {
    std::string metric;
    double a = 0.0;
    double b = 0.0;
    std::optional<double> change_pct;  // (b - a) / a * 100, absent when a == 0

    friend bool operator==(const ComparisonRow&, const ComparisonRow&) = default;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;

    /// `metric,a,b,change_pct` with "n/a" for undefined changes.
    std::string to_csv() const;
};

/// Throws ValidationError when the reports come from different maps or
/// trajectories.
ComparisonTable compare(const ReplayReport& a, const ReplayReport& b);

std::string to_json(const ReplayReport& report);
/// Throws FormatError naming the offending field.
ReplayReport parse_report_json(const std::string& text, const std::string& source = "report");

std::string to_timeseries_csv(const ReplayReport& report);
std::vector<TimeseriesRow> parse_timeseries_csv(const std::string& text,
                                                const std::string& source = "timeseries");

enum class ReportFormat { json, csv_timeseries };

/// Throws Error when the path cannot be written.
void emit(const ReplayReport& report, ReportFormat format, const std::filesystem::path& path);
ReplayReport read_report(const std::filesystem::path& path);

/// Shortest round-trip decimal form of a double.
std::string format_number(double v);

}  // namespace zonemem
