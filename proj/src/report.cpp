#include <zonemem/error.hpp>
#include <zonemem/report.hpp>

#include "csv.hpp"

#include <json.hpp>

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace zonemem {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kTimeseriesHeader =
    "t,resident_count,resident_bytes,k_max,cum_transactions,lc_outcome";

std::string format_fixed2(double v) {
    std::array<char, 64> buf{};
    const double cleaned = v == 0.0 ? 0.0 : v;  // no "-0.00"
    const auto [ptr, ec] =
        std::to_chars(buf.data(), buf.data() + buf.size(), cleaned, std::chars_format::fixed, 2);
    std::string out(buf.data(), ptr);
    return out == "-0.00" ? "0.00" : out;
}

// Strict accessors that name the offending field.
class Reader {
public:
    Reader(const nlohmann::json& node, std::string path) : node_(node), path_(std::move(path)) {}

    const nlohmann::json& field(const std::string& name) const {
        if (!node_.is_object() || !node_.contains(name)) {
            throw FormatError(path_ + "." + name + ": missing");
        }
        return node_[name];
    }
    std::uint64_t uint(const std::string& name) const {
        const auto& v = field(name);
        if (!v.is_number_unsigned()) throw FormatError(path_ + "." + name + ": expected non-negative integer");
        return v.get<std::uint64_t>();
    }
    double number(const std::string& name) const {
        const auto& v = field(name);
        if (!v.is_number()) throw FormatError(path_ + "." + name + ": expected number");
        return v.get<double>();
    }
    std::string string(const std::string& name) const {
        const auto& v = field(name);
        if (!v.is_string()) throw FormatError(path_ + "." + name + ": expected string");
        return v.get<std::string>();
    }
    bool boolean(const std::string& name) const {
        const auto& v = field(name);
        if (!v.is_boolean()) throw FormatError(path_ + "." + name + ": expected boolean");
        return v.get<bool>();
    }
    const nlohmann::json& array(const std::string& name) const {
        const auto& v = field(name);
        if (!v.is_array()) throw FormatError(path_ + "." + name + ": expected array");
        return v;
    }
    Reader child(const std::string& name) const {
        const auto& v = field(name);
        if (!v.is_object()) throw FormatError(path_ + "." + name + ": expected object");
        return Reader(v, path_ + "." + name);
    }

private:
    const nlohmann::json& node_;
    std::string path_;
};

template <class F>
auto rethrow_as_format(const std::string& where, F&& f) {
    try {
        return f();
    } catch (const ValidationError& e) {
        throw FormatError(where + ": " + e.what());
    }
}

ordered_json summary_json(const Summary& s) {
    ordered_json j;
    j["total_transactions"] = s.total_transactions;
    j["batch_loads"] = s.batch_loads;
    j["batch_unloads"] = s.batch_unloads;
    j["kf_loads"] = s.kf_loads;
    j["kf_unloads"] = s.kf_unloads;
    j["peak_resident_count"] = s.peak_resident_count;
    j["peak_resident_bytes"] = s.peak_resident_bytes;
    j["budget_violations"] = s.budget_violations;
    j["over_budget_zone_events"] = s.over_budget_zone_events;
    j["lc_opportunities"] = s.lc_opportunities;
    j["lc_accepted"] = s.lc_accepted;
    j["lc_hit_ratio"] = s.lc_hit_ratio;
    return j;
}

std::vector<std::pair<std::string, double>> summary_metrics(const Summary& s) {
    auto d = [](std::uint64_t v) { return static_cast<double>(v); };
    return {
        {"total_transactions", d(s.total_transactions)},
        {"batch_loads", d(s.batch_loads)},
        {"batch_unloads", d(s.batch_unloads)},
        {"kf_loads", d(s.kf_loads)},
        {"kf_unloads", d(s.kf_unloads)},
        {"peak_resident_count", d(s.peak_resident_count)},
        {"peak_resident_bytes", d(s.peak_resident_bytes)},
        {"budget_violations", d(s.budget_violations)},
        {"over_budget_zone_events", d(s.over_budget_zone_events)},
        {"lc_opportunities", d(s.lc_opportunities)},
        {"lc_accepted", d(s.lc_accepted)},
        {"lc_hit_ratio", s.lc_hit_ratio},
    };
}

}  // namespace

std::string_view to_string(LoopClosureOutcome outcome) {
    switch (outcome) {
        case LoopClosureOutcome::no_opportunity: return "no_opportunity";
        case LoopClosureOutcome::accepted: return "accepted";
        case LoopClosureOutcome::missed: return "missed";
    }
    return "unknown";
}

LoopClosureOutcome loop_closure_outcome_from_string(std::string_view name) {
    if (name == "no_opportunity") return LoopClosureOutcome::no_opportunity;
    if (name == "accepted") return LoopClosureOutcome::accepted;
    if (name == "missed") return LoopClosureOutcome::missed;
    throw ValidationError("unknown loop-closure outcome \"" + std::string(name) + "\"");
}

std::string format_number(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

ReplayReport summarize(ConfigEcho config, EventList events, std::vector<TimeseriesRow> timeseries) {
    for (std::size_t i = 1; i < timeseries.size(); ++i) {
        if (!(timeseries[i].t > timeseries[i - 1].t)) {
            throw ValidationError("time series row " + std::to_string(i) + ": t is not increasing");
        }
    }
    Summary s;
    std::size_t e = 0;
    std::uint64_t resident = 0;
    Tick last_tick = 0;
    auto apply = [&](const StrategyEvent& ev) {
        if (is_transaction(ev.kind)) ++s.total_transactions;
        if (ev.kind == EventKind::zone_load || ev.kind == EventKind::prefetch) ++s.batch_loads;
        if (ev.kind == EventKind::zone_unload) ++s.batch_unloads;
        if (is_load(ev.kind)) {
            s.kf_loads += ev.count;
            resident += ev.count;
        }
        if (is_unload(ev.kind)) {
            s.kf_unloads += ev.count;
            if (ev.count > resident) {
                throw ValidationError("event at tick " + std::to_string(ev.tick) +
                                      " unloads more keyframes than are resident");
            }
            resident -= ev.count;
        }
        if (ev.kind == EventKind::budget_violation) ++s.budget_violations;
        if (ev.kind == EventKind::over_budget_zone) ++s.over_budget_zone_events;
    };
    for (std::size_t i = 0; i < timeseries.size(); ++i) {
        const auto tick = static_cast<Tick>(i);
        for (; e < events.size() && events[e].tick <= tick; ++e) {
            if (events[e].tick < last_tick) {
                throw ValidationError("event " + std::to_string(e) + " is out of tick order");
            }
            last_tick = events[e].tick;
            apply(events[e]);
        }
        const TimeseriesRow& row = timeseries[i];
        if (row.resident_count != resident) {
            throw ValidationError("tick " + std::to_string(i) + ": resident_count " +
                                  std::to_string(row.resident_count) + " but events imply " +
                                  std::to_string(resident));
        }
        if (row.cum_transactions != s.total_transactions) {
            throw ValidationError("tick " + std::to_string(i) + ": cum_transactions " +
                                  std::to_string(row.cum_transactions) + " but events imply " +
                                  std::to_string(s.total_transactions));
        }
        s.peak_resident_count = std::max<std::uint64_t>(s.peak_resident_count, row.resident_count);
        s.peak_resident_bytes = std::max(s.peak_resident_bytes, row.resident_bytes);
        if (row.lc_outcome != LoopClosureOutcome::no_opportunity) ++s.lc_opportunities;
        if (row.lc_outcome == LoopClosureOutcome::accepted) ++s.lc_accepted;
    }
    if (e != events.size()) {
        throw ValidationError("event " + std::to_string(e) + " lies beyond the last tick");
    }
    s.lc_hit_ratio = s.lc_opportunities == 0 ? 0.0
                                             : static_cast<double>(s.lc_accepted) /
                                                   static_cast<double>(s.lc_opportunities);
    ReplayReport report;
    report.config = std::move(config);
    report.summary = s;
    report.timeseries = std::move(timeseries);
    report.events = std::move(events);
    return report;
}

std::string ComparisonTable::to_csv() const {
    std::string out = "metric,a,b,change_pct\n";
    for (const ComparisonRow& r : rows) {
        out += r.metric + "," + format_number(r.a) + "," + format_number(r.b) + "," +
               (r.change_pct ? format_fixed2(*r.change_pct) : std::string("n/a")) + "\n";
    }
    return out;
}

ComparisonTable compare(const ReplayReport& a, const ReplayReport& b) {
    if (a.config.map_hash != b.config.map_hash) {
        throw ValidationError("map hash mismatch: " + a.config.map_hash + " vs " + b.config.map_hash);
    }
    if (a.config.trajectory_hash != b.config.trajectory_hash) {
        throw ValidationError("trajectory hash mismatch: " + a.config.trajectory_hash + " vs " +
                              b.config.trajectory_hash);
    }
    ComparisonTable table;
    const auto ma = summary_metrics(a.summary);
    const auto mb = summary_metrics(b.summary);
    for (std::size_t i = 0; i < ma.size(); ++i) {
        ComparisonRow row{ma[i].first, ma[i].second, mb[i].second, std::nullopt};
        if (row.a != 0.0) row.change_pct = (row.b - row.a) / row.a * 100.0;
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string to_json(const ReplayReport& report) {
    ordered_json config;
    config["map_hash"] = report.config.map_hash;
    config["trajectory_hash"] = report.config.trajectory_hash;
    config["route_hash"] = report.config.route_hash;
    config["strategy"] = std::string(to_string(report.config.strategy));
    ordered_json schedule = ordered_json::array();
    for (const ScheduleEntry& s : report.config.budget_schedule) {
        ordered_json seg;
        seg["t_start"] = s.t_start;
        seg["k_max"] = s.k_max;
        schedule.push_back(std::move(seg));
    }
    config["budget_schedule"] = std::move(schedule);
    config["r_load"] = report.config.r_load;
    config["r_unload"] = report.config.r_unload;
    config["lc_radius"] = report.config.lc_radius;
    config["lc_min_resident"] = report.config.lc_min_resident;
    config["prefetch"] = report.config.prefetch;
    config["route_step"] = report.config.route_step;

    ordered_json rows = ordered_json::array();
    for (const TimeseriesRow& r : report.timeseries) {
        ordered_json row;
        row["t"] = r.t;
        row["resident_count"] = r.resident_count;
        row["resident_bytes"] = r.resident_bytes;
        row["k_max"] = r.k_max;
        row["cum_transactions"] = r.cum_transactions;
        row["lc_outcome"] = std::string(to_string(r.lc_outcome));
        rows.push_back(std::move(row));
    }
    ordered_json events = ordered_json::array();
    for (const StrategyEvent& e : report.events) {
        ordered_json ev;
        ev["tick"] = e.tick;
        ev["kind"] = std::string(to_string(e.kind));
        ev["subject"] = e.subject;
        ev["count"] = e.count;
        events.push_back(std::move(ev));
    }

    ordered_json doc;
    doc["schema"] = report.schema;
    doc["config"] = std::move(config);
    doc["summary"] = summary_json(report.summary);
    doc["timeseries"] = std::move(rows);
    doc["events"] = std::move(events);
    return doc.dump(2) + "\n";
}

ReplayReport parse_report_json(const std::string& text, const std::string& source) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(source + ": invalid JSON: " + e.what());
    }
    const Reader root(doc, source);
    if (root.uint("schema") != kReportSchema) {
        throw FormatError(source + ".schema: unsupported version " +
                          std::to_string(root.uint("schema")));
    }
    ConfigEcho config;
    const Reader c = root.child("config");
    config.map_hash = c.string("map_hash");
    config.trajectory_hash = c.string("trajectory_hash");
    config.route_hash = c.string("route_hash");
    config.strategy = rethrow_as_format(source + ".config.strategy",
                                        [&] { return strategy_kind_from_string(c.string("strategy")); });
    const auto& schedule = c.array("budget_schedule");
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const Reader seg(schedule[i], source + ".config.budget_schedule[" + std::to_string(i) + "]");
        config.budget_schedule.push_back({seg.number("t_start"), seg.uint("k_max")});
    }
    config.r_load = c.number("r_load");
    config.r_unload = c.number("r_unload");
    config.lc_radius = c.number("lc_radius");
    config.lc_min_resident = c.uint("lc_min_resident");
    config.prefetch = c.boolean("prefetch");
    config.route_step = c.number("route_step");

    std::vector<TimeseriesRow> rows;
    const auto& ts = root.array("timeseries");
    rows.reserve(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const std::string where = source + ".timeseries[" + std::to_string(i) + "]";
        const Reader r(ts[i], where);
        rows.push_back({r.number("t"), r.uint("resident_count"), r.uint("resident_bytes"),
                        r.uint("k_max"), r.uint("cum_transactions"),
                        rethrow_as_format(where + ".lc_outcome", [&] {
                            return loop_closure_outcome_from_string(r.string("lc_outcome"));
                        })});
    }
    EventList events;
    const auto& evs = root.array("events");
    events.reserve(evs.size());
    for (std::size_t i = 0; i < evs.size(); ++i) {
        const std::string where = source + ".events[" + std::to_string(i) + "]";
        const Reader r(evs[i], where);
        const auto& tick = r.field("tick");
        if (!tick.is_number_integer()) throw FormatError(where + ".tick: expected integer");
        events.push_back({tick.get<Tick>(),
                          rethrow_as_format(where + ".kind",
                                            [&] { return event_kind_from_string(r.string("kind")); }),
                          static_cast<std::uint32_t>(r.uint("subject")), r.uint("count")});
    }

    ReplayReport report = rethrow_as_format(
        source, [&] { return summarize(std::move(config), std::move(events), std::move(rows)); });
    const Reader s = root.child("summary");
    Summary stored;
    stored.total_transactions = s.uint("total_transactions");
    stored.batch_loads = s.uint("batch_loads");
    stored.batch_unloads = s.uint("batch_unloads");
    stored.kf_loads = s.uint("kf_loads");
    stored.kf_unloads = s.uint("kf_unloads");
    stored.peak_resident_count = s.uint("peak_resident_count");
    stored.peak_resident_bytes = s.uint("peak_resident_bytes");
    stored.budget_violations = s.uint("budget_violations");
    stored.over_budget_zone_events = s.uint("over_budget_zone_events");
    stored.lc_opportunities = s.uint("lc_opportunities");
    stored.lc_accepted = s.uint("lc_accepted");
    stored.lc_hit_ratio = s.number("lc_hit_ratio");
    if (!(stored == report.summary)) {
        throw FormatError(source + ".summary: does not match the time series and events");
    }
    return report;
}

std::string to_timeseries_csv(const ReplayReport& report) {
    std::string out(kTimeseriesHeader);
    out += '\n';
    for (const TimeseriesRow& r : report.timeseries) {
        out += format_number(r.t) + "," + std::to_string(r.resident_count) + "," +
               std::to_string(r.resident_bytes) + "," + std::to_string(r.k_max) + "," +
               std::to_string(r.cum_transactions) + "," + std::string(to_string(r.lc_outcome)) + "\n";
    }
    return out;
}

std::vector<TimeseriesRow> parse_timeseries_csv(const std::string& text, const std::string& source) {
    std::vector<TimeseriesRow> out;
    for (const csv::Row& row : csv::read(text, kTimeseriesHeader, source)) {
        const std::string where = source + ":" + std::to_string(row.line);
        const auto& f = row.fields;
        out.push_back({csv::to_double(f[0], where), csv::to_uint(f[1], where),
                       csv::to_uint(f[2], where), csv::to_uint(f[3], where),
                       csv::to_uint(f[4], where),
                       rethrow_as_format(where, [&] { return loop_closure_outcome_from_string(f[5]); })});
    }
    return out;
}

void emit(const ReplayReport& report, ReportFormat format, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(path.string() + ": cannot open for writing");
    out << (format == ReportFormat::json ? to_json(report) : to_timeseries_csv(report));
    if (!out) throw Error(path.string() + ": write failed");
}

ReplayReport read_report(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path.string() + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_report_json(buf.str(), path.string());
}

}  // namespace zonemem
