#include <zonemem/error.hpp>
#include <zonemem/replay.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace zonemem {

namespace {

// Boustrophedon sweep of an axis-aligned rectangle with lanes parallel to x.
std::vector<Point2> lawnmower(Point2 lo, Point2 hi, double lane_gap) {
    const double w = hi.x - lo.x;
    const double h = hi.y - lo.y;
    const auto lanes = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(h / lane_gap + 1e-9)));
    const double lane_dy = h / static_cast<double>(lanes);
    const double inset = std::min(lane_gap / 2.0, w / 4.0);
    std::vector<Point2> path;
    for (std::size_t j = 0; j < lanes; ++j) {
        const double y = lo.y + (static_cast<double>(j) + 0.5) * lane_dy;
        const double left = lo.x + inset;
        const double right = hi.x - inset;
        if (j % 2 == 0) {
            path.push_back({left, y});
            path.push_back({right, y});
        } else {
            path.push_back({right, y});
            path.push_back({left, y});
        }
    }
    return path;
}

struct Polyline {
    std::vector<Point2> points;
    std::vector<double> cumulative;  // arc length at each point

    explicit Polyline(const std::vector<Point2>& pts) {
        for (const Point2& p : pts) {
            if (points.empty() || !(points.back() == p)) points.push_back(p);
        }
        cumulative.push_back(0.0);
        for (std::size_t i = 1; i < points.size(); ++i) {
            cumulative.push_back(cumulative.back() + distance(points[i - 1], points[i]));
        }
    }

    double length() const { return cumulative.back(); }

    // Position and travel direction at arc length s in [0, length()].
    Pose at(double s) const {
        if (points.size() == 1) return Pose(points.front(), 0.0);
        std::size_t seg = static_cast<std::size_t>(
            std::upper_bound(cumulative.begin(), cumulative.end(), s) - cumulative.begin());
        seg = std::clamp<std::size_t>(seg, 1, points.size() - 1) - 1;
        const Point2 a = points[seg];
        const Point2 b = points[seg + 1];
        const double len = cumulative[seg + 1] - cumulative[seg];
        const double f = std::clamp((s - cumulative[seg]) / len, 0.0, 1.0);
        return Pose({a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)}, std::atan2(b.y - a.y, b.x - a.x));
    }
};

}  // namespace

void WorldSpec::validate() const {
    if (rooms == 0) throw ValidationError("world needs at least one room");
    for (const auto& [name, v] : {std::pair{"room width", room_w}, std::pair{"room height", room_h},
                                  std::pair{"corridor width", corridor_w},
                                  std::pair{"keyframe spacing", kf_spacing}}) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string(name) + " must be positive");
    }
    if (payload_bytes == 0) throw ValidationError("payload bytes must be positive");
}

Map generate_world(const WorldSpec& spec) {
    spec.validate();
    const double width = static_cast<double>(spec.rooms) * spec.room_w;
    const double c = spec.corridor_w;

    std::vector<Zone> zones;
    zones.emplace_back(ZoneId{0}, "corridor",
                       std::vector<Point2>{{0.0, 0.0}, {width, 0.0}, {width, c}, {0.0, c}});
    for (std::size_t i = 0; i < spec.rooms; ++i) {
        const double x0 = static_cast<double>(i) * spec.room_w;
        const double x1 = static_cast<double>(i + 1) * spec.room_w;
        zones.emplace_back(ZoneId{static_cast<std::uint32_t>(i + 1)}, "room_" + std::to_string(i),
                           std::vector<Point2>{{x0, c}, {x1, c}, {x1, c + spec.room_h}, {x0, c + spec.room_h}});
    }

    std::mt19937_64 rng(spec.seed);
    std::vector<Keyframe> keyframes;
    const double lane_gap = 2.0 * spec.kf_spacing;
    for (const Zone& zone : zones) {
        const Polyline sweep(lawnmower(zone.min_corner(), zone.max_corner(), lane_gap));
        const auto count = static_cast<std::size_t>(std::floor(sweep.length() / spec.kf_spacing + 1e-9)) + 1;
        for (std::size_t k = 0; k < count; ++k) {
            Keyframe kf;
            kf.id = KeyframeId{static_cast<std::uint32_t>(keyframes.size())};
            kf.pose = sweep.at(std::min(static_cast<double>(k) * spec.kf_spacing, sweep.length()));
            kf.payload_bytes = spec.payload_bytes;
            kf.payload_seed = rng();
            keyframes.push_back(kf);
        }
    }
    return Map(ZoneSet(std::move(zones)), std::move(keyframes));
}

std::vector<ZoneId> default_patrol_order(const Map& map) {
    std::vector<ZoneId> order;
    for (const Zone& z : map.zones().zones()) {
        if (z.name().rfind("room", 0) == 0) order.push_back(z.id());
    }
    if (order.empty()) {
        for (const Zone& z : map.zones().zones()) order.push_back(z.id());
    }
    order.push_back(order.front());
    return order;
}

std::size_t default_budget(const Map& map) {
    const std::size_t largest = map.index().largest_zone();
    return std::max<std::size_t>(1, largest + largest / 2);
}

PatrolRoute generate_patrol_route(const Map& map, std::span<const ZoneId> visit_order) {
    if (visit_order.empty()) throw ValidationError("visit order is empty");
    const ZoneSet& zones = map.zones();
    for (ZoneId z : visit_order) zones.at(z);

    const std::optional<ZoneId> corridor = zones.find_by_name("corridor");
    // Where a zone's traffic joins the corridor: its centroid projected onto
    // the corridor's long axis.
    auto anchor = [&](ZoneId z) {
        const Zone& cz = zones.at(*corridor);
        const Point2 mid = cz.centroid();
        const Point2 p = zones.at(z).centroid();
        const Point2 lo = cz.min_corner();
        const Point2 hi = cz.max_corner();
        if (hi.x - lo.x >= hi.y - lo.y) return Point2{std::clamp(p.x, lo.x, hi.x), mid.y};
        return Point2{mid.x, std::clamp(p.y, lo.y, hi.y)};
    };

    std::vector<Point2> waypoints{zones.at(visit_order.front()).centroid()};
    for (std::size_t i = 1; i < visit_order.size(); ++i) {
        const ZoneId from = visit_order[i - 1];
        const ZoneId to = visit_order[i];
        if (from == to) continue;
        if (corridor) {
            if (from != *corridor) waypoints.push_back(anchor(from));
            if (to != *corridor) waypoints.push_back(anchor(to));
        }
        waypoints.push_back(zones.at(to).centroid());
    }
    const Polyline path(waypoints);
    waypoints = path.points;

    std::vector<TrajectorySample> samples;
    const double length = path.length();
    if (length == 0.0) {
        for (int k = 0; k <= static_cast<int>(kPatrolRate); ++k) {
            samples.push_back({k / kPatrolRate, path.at(0.0)});
        }
        return {waypoints, Trajectory(std::move(samples))};
    }
    const double duration = length / kPatrolSpeed;
    for (std::size_t k = 0;; ++k) {
        const double t = static_cast<double>(k) / kPatrolRate;
        if (t > duration + 1e-9) break;
        samples.push_back({t, path.at(std::min(t * kPatrolSpeed, length))});
    }
    if (samples.back().t < duration - 1e-9) samples.push_back({duration, path.at(length)});
    return {waypoints, Trajectory(std::move(samples))};
}

}  // namespace zonemem
