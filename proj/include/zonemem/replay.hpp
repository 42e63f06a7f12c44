#pragma once

#include <zonemem/map_store.hpp>
#include <zonemem/report.hpp>
#include <zonemem/strategy.hpp>
#include <zonemem/zone_model.hpp>

#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace zonemem {

struct TrajectorySample {
    double t = 0.0;  // seconds
    Pose pose;

    friend bool operator==(const TrajectorySample&, const TrajectorySample&) = default;
};

class Trajectory {
public:
    /// Throws ValidationError for fewer than 2 samples, non-increasing or
    /// non-finite time, or non-finite positions.
    explicit Trajectory(std::vector<TrajectorySample> samples);

    const std::vector<TrajectorySample>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    double duration() const { return samples_.back().t - samples_.front().t; }

    friend bool operator==(const Trajectory&, const Trajectory&) = default;

private:
    std::vector<TrajectorySample> samples_;
};

/// Piecewise-constant k_max over time.
class BudgetSchedule {
public:
    /// Throws ValidationError unless segments are non-empty, start at t=0,
    /// strictly increase in t_start and carry k_max >= 1.
    explicit BudgetSchedule(std::vector<ScheduleEntry> segments);
    static BudgetSchedule constant(std::size_t k_max);

    std::size_t k_max_at(double t) const;
    const std::vector<ScheduleEntry>& segments() const { return segments_; }

private:
    std::vector<ScheduleEntry> segments_;
};

struct LoopClosureModel {
    double radius = 2.0;           // opportunity radius d_lc, meters
    std::size_t min_resident = 1;  // resident neighbours needed to accept

    /// Throws ValidationError unless radius > 0 and min_resident >= 1.
    void validate() const;
};

/// An opportunity exists when any map keyframe lies within the radius; it is
/// accepted when at least min_resident of those keyframes are resident.
LoopClosureOutcome loop_closure_check(Point2 position, const Map& map, const MapStore& store,
                                      const LoopClosureModel& model);

/// Tracks progress along a planned route and reports the zones still ahead.
class RouteFollower {
public:
    /// Throws ValidationError for an empty route or non-positive step.
    RouteFollower(std::vector<Point2> route, const ZoneSet& zones, double step);

    /// Advances the (monotone) cursor to the segment nearest `position` and
    /// returns predict_route_zones over the remaining route starting at the
    /// projection of `position`.
    std::vector<ZoneId> upcoming(Point2 position);
    std::size_t cursor() const { return cursor_; }

private:
    std::vector<Point2> route_;
    const ZoneSet& zones_;
    double step_;
    std::size_t cursor_ = 0;
    double progress_ = 0.0;  // fraction along segment cursor_
    std::vector<std::vector<ZoneId>> segment_zones_;
};

struct ReplayConfig {
    StrategyKind strategy = StrategyKind::semantic;
    GeometricParams geometric;
    BudgetSchedule schedule = BudgetSchedule::constant(1);
    LoopClosureModel loop_closure;
    bool prefetch = false;        // semantic only
    std::vector<Point2> route;    // planned route; empty for none
    double route_step = kDefaultRouteStep;

    /// Throws ValidationError for inconsistent settings.
    void validate() const;
};

/// Optional instrumentation for tests and tooling.
struct ReplayHooks {
    MapStore::Observer on_transaction;
    std::function<void(Tick, const KeyframeManager&, const MapStore&)> on_tick;
};

/// Replays a trajectory through one strategy. Per tick: apply the scheduled
/// budget (evicting on a drop), update the strategy with the pose, prefetch
/// if enabled, then score loop closure and record metrics. Deterministic.
ReplayReport run(std::shared_ptr<const Map> map, const Trajectory& trajectory,
                 const ReplayConfig& config, const ReplayHooks& hooks = {});

// --- synthetic worlds ------------------------------------------------------

struct WorldSpec {
    std::size_t rooms = 6;
    double room_w = 8.0;
    double room_h = 6.0;
    double corridor_w = 3.0;
    double kf_spacing = 0.5;
    std::uint64_t payload_bytes = 2097152;
    std::uint64_t seed = 42;

    /// Throws ValidationError for non-positive dimensions or zero rooms.
    void validate() const;
};

/// Corridor zone 0 spanning y in [0, corridor_w] under a row of rooms
/// (zones 1..rooms). Each zone is swept by a lawnmower path whose lanes are
/// 2 * kf_spacing apart; keyframes sit every kf_spacing of arc length. The
/// seed only drives payload seeds.
Map generate_world(const WorldSpec& spec);

inline constexpr double kPatrolSpeed = 1.0;  // m/s
inline constexpr double kPatrolRate = 10.0;  // Hz

struct PatrolRoute {
    std::vector<Point2> waypoints;
    Trajectory trajectory;
};

/// Piecewise-linear patrol through the centroids of `visit_order`, routed
/// through the zone named "corridor" when there is one, sampled at 10 Hz
/// at 1 m/s. A zero-length route dwells at the centroid for one second.
/// Throws ValidationError for an empty order or unknown zones.
PatrolRoute generate_patrol_route(const Map& map, std::span<const ZoneId> visit_order);

/// Rooms in ascending id, then back to the first room.
std::vector<ZoneId> default_patrol_order(const Map& map);

/// 1.5x the largest zone roster, at least 1.
std::size_t default_budget(const Map& map);

// --- file formats ----------------------------------------------------------

std::string serialize_trajectory_csv(const Trajectory& trajectory);
Trajectory parse_trajectory_csv(const std::string& text, const std::string& source = "trajectory");
Trajectory read_trajectory(const std::filesystem::path& path);

std::string serialize_schedule_csv(const BudgetSchedule& schedule);
BudgetSchedule parse_schedule_csv(const std::string& text, const std::string& source = "schedule");
BudgetSchedule read_schedule(const std::filesystem::path& path);

std::string serialize_route_csv(std::span<const Point2> route);
std::vector<Point2> parse_route_csv(const std::string& text, const std::string& source = "route");
std::vector<Point2> read_route(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace zonemem
