#include <zonemem/error.hpp>
#include <zonemem/replay.hpp>

#include "csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace zonemem {

namespace {

// How far ahead along the route the follower may look for the robot, meters.
constexpr double kFollowerWindow = 5.0;

}  // namespace

Trajectory::Trajectory(std::vector<TrajectorySample> samples) : samples_(std::move(samples)) {
    if (samples_.size() < 2) throw ValidationError("trajectory needs at least 2 samples");
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const auto& s = samples_[i];
        if (!std::isfinite(s.t) || !std::isfinite(s.pose.position.x) ||
            !std::isfinite(s.pose.position.y) || !std::isfinite(s.pose.heading)) {
            throw ValidationError("trajectory sample " + std::to_string(i) + " is not finite");
        }
        if (i > 0 && !(s.t > samples_[i - 1].t)) {
            throw ValidationError("trajectory sample " + std::to_string(i) +
                                  ": t must be strictly increasing");
        }
    }
}

BudgetSchedule::BudgetSchedule(std::vector<ScheduleEntry> segments) : segments_(std::move(segments)) {
    if (segments_.empty()) throw ValidationError("budget schedule is empty");
    if (segments_.front().t_start != 0.0) {
        throw ValidationError("budget schedule must start at t_start = 0");
    }
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        if (segments_[i].k_max == 0) {
            throw ValidationError("budget schedule segment " + std::to_string(i) + ": k_max must be >= 1");
        }
        if (!std::isfinite(segments_[i].t_start) ||
            (i > 0 && !(segments_[i].t_start > segments_[i - 1].t_start))) {
            throw ValidationError("budget schedule segment " + std::to_string(i) +
                                  ": t_start must be strictly increasing");
        }
    }
}

BudgetSchedule BudgetSchedule::constant(std::size_t k_max) { return BudgetSchedule({{0.0, k_max}}); }

std::size_t BudgetSchedule::k_max_at(double t) const {
    std::size_t k = segments_.front().k_max;
    for (const ScheduleEntry& s : segments_) {
        if (s.t_start > t) break;
        k = s.k_max;
    }
    return k;
}

void LoopClosureModel::validate() const {
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw ValidationError("loop-closure radius must be positive");
    }
    if (min_resident == 0) throw ValidationError("loop-closure min_resident must be >= 1");
}

LoopClosureOutcome loop_closure_check(Point2 position, const Map& map, const MapStore& store,
                                      const LoopClosureModel& model) {
    const std::vector<KeyframeId> nearby = map.within(position, model.radius);
    if (nearby.empty()) return LoopClosureOutcome::no_opportunity;
    std::size_t resident = 0;
    for (KeyframeId id : nearby) {
        if (store.is_resident(id)) ++resident;
    }
    return resident >= model.min_resident ? LoopClosureOutcome::accepted : LoopClosureOutcome::missed;
}

RouteFollower::RouteFollower(std::vector<Point2> route, const ZoneSet& zones, double step)
    : route_(std::move(route)), zones_(zones), step_(step) {
    if (route_.empty()) throw ValidationError("route needs at least one waypoint");
    if (!(step_ > 0.0)) throw ValidationError("route sampling step must be positive");
    for (std::size_t i = 0; i + 1 < route_.size(); ++i) {
        const Point2 seg[] = {route_[i], route_[i + 1]};
        segment_zones_.push_back(predict_route_zones(seg, zones_, step_));
    }
}

std::vector<ZoneId> RouteFollower::upcoming(Point2 position) {
    if (route_.size() == 1) return predict_route_zones(route_, zones_, step_);

    // Search a bounded arc-length window ahead of the current progress point
    // and keep the nearest match, earliest on ties.
    double best_d = std::numeric_limits<double>::infinity();
    std::size_t best_seg = cursor_;
    double best_f = progress_;
    double ahead = 0.0;
    for (std::size_t i = cursor_; i + 1 < route_.size(); ++i) {
        const Point2 a = route_[i];
        const Point2 b = route_[i + 1];
        const double len = distance(a, b);
        const double f0 = i == cursor_ ? progress_ : 0.0;
        double f = f0;
        if (len > 0.0) {
            const double raw = ((position.x - a.x) * (b.x - a.x) + (position.y - a.y) * (b.y - a.y)) /
                               (len * len);
            f = std::clamp(raw, f0, 1.0);
        }
        const double d = distance(position, Point2{a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)});
        if (d < best_d) {
            best_d = d;
            best_seg = i;
            best_f = f;
        }
        ahead += len * (1.0 - f0);
        if (ahead > kFollowerWindow) break;
    }
    cursor_ = best_seg;
    progress_ = best_f;

    const Point2 a = route_[cursor_];
    const Point2 b = route_[cursor_ + 1];
    const Point2 here[] = {Point2{a.x + progress_ * (b.x - a.x), a.y + progress_ * (b.y - a.y)}, b};
    std::vector<ZoneId> out = predict_route_zones(here, zones_, step_);
    for (std::size_t i = cursor_ + 1; i < segment_zones_.size(); ++i) {
        append_collapsed(out, segment_zones_[i]);
    }
    return out;
}

void ReplayConfig::validate() const {
    geometric.validate();
    loop_closure.validate();
    if (!(route_step > 0.0)) throw ValidationError("route step must be positive");
    if (prefetch && strategy != StrategyKind::semantic) {
        throw ValidationError("prefetch is only available for the semantic strategy");
    }
    if (prefetch && route.empty()) throw ValidationError("prefetch needs a planned route");
}

ReplayReport run(std::shared_ptr<const Map> map, const Trajectory& trajectory,
                 const ReplayConfig& config, const ReplayHooks& hooks) {
    if (!map) throw ValidationError("replay needs a map");
    config.validate();

    MapStore store(map);
    if (hooks.on_transaction) store.set_observer(hooks.on_transaction);

    std::unique_ptr<KeyframeManager> manager;
    SemanticZoneManager* semantic = nullptr;
    if (config.strategy == StrategyKind::semantic) {
        auto s = std::make_unique<SemanticZoneManager>(store);
        semantic = s.get();
        manager = std::move(s);
    } else {
        manager = std::make_unique<GeometricManager>(store, config.geometric);
    }

    std::optional<RouteFollower> follower;
    if (!config.route.empty()) follower.emplace(config.route, map->zones(), config.route_step);

    ConfigEcho echo;
    echo.map_hash = map_hash(*map);
    echo.trajectory_hash = sha256_hex(serialize_trajectory_csv(trajectory));
    echo.route_hash = config.route.empty() ? "" : sha256_hex(serialize_route_csv(config.route));
    echo.strategy = config.strategy;
    echo.budget_schedule = config.schedule.segments();
    echo.r_load = config.geometric.r_load;
    echo.r_unload = config.geometric.r_unload;
    echo.lc_radius = config.loop_closure.radius;
    echo.lc_min_resident = config.loop_closure.min_resident;
    echo.prefetch = config.prefetch;
    echo.route_step = config.route_step;

    EventList events;
    std::vector<TimeseriesRow> rows;
    rows.reserve(trajectory.size());
    auto append = [&events](EventList more) {
        events.insert(events.end(), more.begin(), more.end());
    };

    std::size_t previous_k = 0;
    const auto& samples = trajectory.samples();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto tick = static_cast<Tick>(i);
        const TrajectorySample& sample = samples[i];
        const Budget budget(config.schedule.k_max_at(sample.t));
        const std::vector<ZoneId> upcoming =
            follower ? follower->upcoming(sample.pose.position) : std::vector<ZoneId>{};

        if (i > 0 && budget.k_max() < previous_k) {
            append(manager->enforce_budget(budget, tick, upcoming));
        }
        previous_k = budget.k_max();
        append(manager->on_pose_update(sample.pose, budget, tick, upcoming));
        if (config.prefetch && semantic != nullptr) {
            append(semantic->prefetch(upcoming, budget, tick));
        }
        const LoopClosureOutcome lc =
            loop_closure_check(sample.pose.position, *map, store, config.loop_closure);
        rows.push_back({sample.t, store.resident_count(), store.resident_bytes(), budget.k_max(),
                        store.counters().transactions(), lc});
        if (hooks.on_tick) hooks.on_tick(tick, *manager, store);
    }
    return summarize(std::move(echo), std::move(events), std::move(rows));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(path.string() + ": cannot open for writing");
    out << text;
    if (!out) throw Error(path.string() + ": write failed");
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path.string() + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string serialize_trajectory_csv(const Trajectory& trajectory) {
    std::string out = "t,x,y,theta\n";
    for (const TrajectorySample& s : trajectory.samples()) {
        out += format_number(s.t) + "," + format_number(s.pose.position.x) + "," +
               format_number(s.pose.position.y) + "," + format_number(s.pose.heading) + "\n";
    }
    return out;
}

Trajectory parse_trajectory_csv(const std::string& text, const std::string& source) {
    std::vector<TrajectorySample> samples;
    for (const csv::Row& row : csv::read(text, "t,x,y,theta", source)) {
        const std::string where = source + ":" + std::to_string(row.line);
        const auto& f = row.fields;
        samples.push_back({csv::to_double(f[0], where),
                           Pose({csv::to_double(f[1], where), csv::to_double(f[2], where)},
                                csv::to_double(f[3], where))});
    }
    try {
        return Trajectory(std::move(samples));
    } catch (const ValidationError& e) {
        throw FormatError(source + ": " + e.what());
    }
}

Trajectory read_trajectory(const std::filesystem::path& path) {
    return parse_trajectory_csv(read_text(path), path.string());
}

std::string serialize_schedule_csv(const BudgetSchedule& schedule) {
    std::string out = "t_start,k_max\n";
    for (const ScheduleEntry& s : schedule.segments()) {
        out += format_number(s.t_start) + "," + std::to_string(s.k_max) + "\n";
    }
    return out;
}

BudgetSchedule parse_schedule_csv(const std::string& text, const std::string& source) {
    std::vector<ScheduleEntry> segments;
    for (const csv::Row& row : csv::read(text, "t_start,k_max", source)) {
        const std::string where = source + ":" + std::to_string(row.line);
        segments.push_back({csv::to_double(row.fields[0], where), csv::to_uint(row.fields[1], where)});
    }
    try {
        return BudgetSchedule(std::move(segments));
    } catch (const ValidationError& e) {
        throw FormatError(source + ": " + e.what());
    }
}

BudgetSchedule read_schedule(const std::filesystem::path& path) {
    return parse_schedule_csv(read_text(path), path.string());
}

std::string serialize_route_csv(std::span<const Point2> route) {
    std::string out = "x,y\n";
    for (const Point2& p : route) out += format_number(p.x) + "," + format_number(p.y) + "\n";
    return out;
}

std::vector<Point2> parse_route_csv(const std::string& text, const std::string& source) {
    std::vector<Point2> route;
    for (const csv::Row& row : csv::read(text, "x,y", source)) {
        const std::string where = source + ":" + std::to_string(row.line);
        route.push_back({csv::to_double(row.fields[0], where), csv::to_double(row.fields[1], where)});
    }
    if (route.empty()) throw FormatError(source + ": route has no waypoints");
    return route;
}

std::vector<Point2> read_route(const std::filesystem::path& path) {
    return parse_route_csv(read_text(path), path.string());
}

}  // namespace zonemem
