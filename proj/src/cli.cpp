#include <zonemem/cli.hpp>
#include <zonemem/error.hpp>
#include <zonemem/replay.hpp>

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace zonemem::cli {

namespace {

// Raised for flag combinations CLI11 cannot express on its own.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::optional<std::pair<double, double>> parse_room_size(const std::string& text) {
    const auto x = text.find('x');
    if (x == std::string::npos) return std::nullopt;
    double w = 0.0;
    double h = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [pw, ew] = std::from_chars(begin, begin + x, w);
    auto [ph, eh] = std::from_chars(begin + x + 1, end, h);
    if (ew != std::errc{} || pw != begin + x || eh != std::errc{} || ph != end) return std::nullopt;
    if (!(w > 0.0) || !(h > 0.0)) return std::nullopt;
    return std::pair{w, h};
}

const CLI::Validator kRoomSize(
    [](std::string& s) -> std::string {
        return parse_room_size(s) ? std::string{} : "expected WxH with positive sizes, got '" + s + "'";
    },
    "WxH");

const CLI::Validator kPositiveReal(
    [](std::string& s) -> std::string {
        double v = 0.0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size() || !(v > 0.0) || !std::isfinite(v)) {
            return "expected a positive number, got '" + s + "'";
        }
        return {};
    },
    "POSITIVE");

struct GenWorldOptions {
    std::size_t rooms = 6;
    std::string room_size = "8x6";
    double corridor_w = 3.0;
    double kf_spacing = 0.5;
    std::uint64_t payload_bytes = 2097152;
    std::uint64_t seed = 42;
    std::string out = "world";
};

struct GenRouteOptions {
    std::string map = "world";
    std::vector<std::uint32_t> visit;
    std::string trajectory = "trajectory.csv";
    std::string route = "route.csv";
};

struct ReplayOptions {
    std::string map = "world";
    std::string trajectory;
    std::string route;
    std::string strategy = "semantic";
    std::size_t budget = 0;
    std::string schedule;
    std::string prefetch = "off";
    double lc_radius = 2.0;
    std::size_t lc_min = 1;
    double r_load = 5.0;
    double r_unload = 10.0;
    double route_step = kDefaultRouteStep;
    std::string report;
    std::string timeseries;
};

struct CompareOptions {
    std::string a = "geometric_report.json";
    std::string b = "semantic_report.json";
    std::string out;
};

int gen_world(const GenWorldOptions& o, std::ostream& out) {
    const auto size = parse_room_size(o.room_size);
    WorldSpec spec;
    spec.rooms = o.rooms;
    spec.room_w = size->first;
    spec.room_h = size->second;
    spec.corridor_w = o.corridor_w;
    spec.kf_spacing = o.kf_spacing;
    spec.payload_bytes = o.payload_bytes;
    spec.seed = o.seed;
    const Map map = generate_world(spec);
    write_map(map, o.out);
    out << "wrote " << o.out << ": " << map.zones().size() << " zones, " << map.keyframes().size()
        << " keyframes, largest zone " << map.index().largest_zone() << ", map " << map_hash(map) << "\n";
    return kExitOk;
}

int gen_route(const GenRouteOptions& o, std::ostream& out) {
    const Map map = read_map(o.map);
    std::vector<ZoneId> order;
    for (std::uint32_t z : o.visit) order.push_back(ZoneId{z});
    if (order.empty()) order = default_patrol_order(map);
    const PatrolRoute patrol = generate_patrol_route(map, order);
    write_text(o.trajectory, serialize_trajectory_csv(patrol.trajectory));
    write_text(o.route, serialize_route_csv(patrol.waypoints));
    out << "wrote " << o.trajectory << " (" << patrol.trajectory.size() << " samples) and " << o.route
        << " (" << patrol.waypoints.size() << " waypoints)\n";
    return kExitOk;
}

int replay(const ReplayOptions& o, std::ostream& out) {
    ReplayConfig config;
    config.strategy = strategy_kind_from_string(o.strategy);
    config.prefetch = o.prefetch == "on";
    if (config.prefetch && config.strategy != StrategyKind::semantic) {
        throw UsageError("--prefetch on is only available with --strategy semantic");
    }
    if (config.prefetch && !o.trajectory.empty() && o.route.empty()) {
        throw UsageError("--prefetch on needs --route when --trajectory is given");
    }
    config.geometric = {o.r_load, o.r_unload};
    if (!(config.geometric.r_load <= config.geometric.r_unload)) {
        throw UsageError("--r-load must not exceed --r-unload");
    }
    config.loop_closure = {o.lc_radius, o.lc_min};
    config.route_step = o.route_step;

    auto map = std::make_shared<const Map>(read_map(o.map));
    std::optional<Trajectory> trajectory;
    if (o.trajectory.empty()) {
        const std::vector<ZoneId> order = default_patrol_order(*map);
        PatrolRoute patrol = generate_patrol_route(*map, order);
        trajectory.emplace(std::move(patrol.trajectory));
        if (o.route.empty()) config.route = std::move(patrol.waypoints);
    } else {
        trajectory.emplace(read_trajectory(o.trajectory));
    }
    if (!o.route.empty()) config.route = read_route(o.route);

    if (!o.schedule.empty()) {
        config.schedule = read_schedule(o.schedule);
    } else {
        config.schedule = BudgetSchedule::constant(o.budget > 0 ? o.budget : default_budget(*map));
    }

    const ReplayReport report = run(map, *trajectory, config);
    const std::string name(to_string(config.strategy));
    const std::string report_path = o.report.empty() ? name + "_report.json" : o.report;
    const std::string series_path = o.timeseries.empty() ? name + "_timeseries.csv" : o.timeseries;
    emit(report, ReportFormat::json, report_path);
    emit(report, ReportFormat::csv_timeseries, series_path);

    const Summary& s = report.summary;
    out << name << ": " << s.total_transactions << " transactions, peak " << s.peak_resident_count
        << " keyframes, " << s.budget_violations << " budget violations, lc hit ratio "
        << format_number(s.lc_hit_ratio) << "\n";
    return kExitOk;
}

int compare_reports(const CompareOptions& o, std::ostream& out) {
    const ReplayReport a = read_report(o.a);
    const ReplayReport b = read_report(o.b);
    const std::string table = compare(a, b).to_csv();
    if (!o.out.empty()) write_text(o.out, table);
    out << table;
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Zone-based keyframe working-set experiments", "zonemem"};
    app.require_subcommand(1);

    GenWorldOptions gw;
    auto* gen_world_cmd = app.add_subcommand("gen-world", "Generate a synthetic corridor-and-rooms map");
    gen_world_cmd->add_option("--rooms", gw.rooms, "Number of rooms")->check(CLI::PositiveNumber)->capture_default_str();
    gen_world_cmd->add_option("--room-size", gw.room_size, "Room size in meters")->check(kRoomSize)->capture_default_str();
    gen_world_cmd->add_option("--corridor-width", gw.corridor_w, "Corridor width in meters")->check(kPositiveReal)->capture_default_str();
    gen_world_cmd->add_option("--kf-spacing", gw.kf_spacing, "Keyframe spacing in meters")->check(kPositiveReal)->capture_default_str();
    gen_world_cmd->add_option("--payload-bytes", gw.payload_bytes, "Declared bytes per keyframe")->check(CLI::PositiveNumber)->capture_default_str();
    gen_world_cmd->add_option("--seed", gw.seed, "Payload seed")->capture_default_str();
    gen_world_cmd->add_option("--out", gw.out, "Output map directory")->capture_default_str();

    GenRouteOptions gr;
    auto* gen_route_cmd = app.add_subcommand("gen-route", "Generate a patrol trajectory and its planned route");
    gen_route_cmd->add_option("--map", gr.map, "Map directory")->capture_default_str();
    gen_route_cmd->add_option("--visit", gr.visit, "Zone ids to visit in order (default: each room, then the first again)")->delimiter(',');
    gen_route_cmd->add_option("--trajectory", gr.trajectory, "Output trajectory CSV")->capture_default_str();
    gen_route_cmd->add_option("--route", gr.route, "Output route CSV")->capture_default_str();

    ReplayOptions rp;
    auto* replay_cmd = app.add_subcommand("replay", "Replay a trajectory through one strategy");
    replay_cmd->add_option("--map", rp.map, "Map directory")->capture_default_str();
    replay_cmd->add_option("--trajectory", rp.trajectory, "Trajectory CSV (default: the default patrol)");
    replay_cmd->add_option("--route", rp.route, "Planned route CSV");
    replay_cmd->add_option("--strategy", rp.strategy, "Working-set strategy")
        ->check(CLI::IsMember({"semantic", "geometric"}))->capture_default_str();
    auto* budget_opt = replay_cmd->add_option("--budget", rp.budget, "Constant k_max (default: 1.5x largest zone)")
        ->check(CLI::PositiveNumber);
    auto* schedule_opt = replay_cmd->add_option("--budget-schedule", rp.schedule, "Budget schedule CSV");
    budget_opt->excludes(schedule_opt);
    replay_cmd->add_option("--prefetch", rp.prefetch, "Route-aware prefetch")
        ->check(CLI::IsMember({"on", "off"}))->capture_default_str();
    replay_cmd->add_option("--lc-radius", rp.lc_radius, "Loop-closure radius in meters")->check(kPositiveReal)->capture_default_str();
    replay_cmd->add_option("--lc-min", rp.lc_min, "Resident neighbours needed for a loop closure")->check(CLI::PositiveNumber)->capture_default_str();
    replay_cmd->add_option("--r-load", rp.r_load, "Geometric load radius in meters")->check(kPositiveReal)->capture_default_str();
    replay_cmd->add_option("--r-unload", rp.r_unload, "Geometric unload radius in meters")->check(kPositiveReal)->capture_default_str();
    replay_cmd->add_option("--route-step", rp.route_step, "Route sampling step in meters")->check(kPositiveReal)->capture_default_str();
    replay_cmd->add_option("--report", rp.report, "Report JSON (default: <strategy>_report.json)");
    replay_cmd->add_option("--timeseries", rp.timeseries, "Time series CSV (default: <strategy>_timeseries.csv)");

    CompareOptions cp;
    auto* compare_cmd = app.add_subcommand("compare", "Compare two replay reports");
    compare_cmd->add_option("--a", cp.a, "Baseline report")->capture_default_str();
    compare_cmd->add_option("--b", cp.b, "Candidate report")->capture_default_str();
    compare_cmd->add_option("--out", cp.out, "Also write the table to this CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*gen_world_cmd) return gen_world(gw, out);
        if (*gen_route_cmd) return gen_route(gr, out);
        if (*replay_cmd) return replay(rp, out);
        if (*compare_cmd) return compare_reports(cp, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace zonemem::cli
