#include <zonemem/error.hpp>
#include <zonemem/replay.hpp>

#include "../support/fixtures.hpp"

#include <doctest.h>

#include <cmath>

using namespace zonemem;
using fixtures::strip_map;
using fixtures::strip_pose;

namespace {

Trajectory through(std::initializer_list<Pose> poses) {
    std::vector<TrajectorySample> samples;
    double t = 0.0;
    for (const Pose& p : poses) {
        samples.push_back({t, p});
        t += 0.1;
    }
    return Trajectory(std::move(samples));
}

ReplayConfig semantic(std::size_t k) {
    ReplayConfig c;
    c.schedule = BudgetSchedule::constant(k);
    return c;
}

// Path length of the lawnmower sweep used by generate_world, recomputed
// from the closed form rather than by walking the polyline.
std::size_t sweep_keyframes(double w, double h, double spacing) {
    const double gap = 2 * spacing;
    const double lanes = std::max(1.0, std::floor(h / gap + 1e-9));
    const double inset = std::min(gap / 2, w / 4);
    const double length = lanes * (w - 2 * inset) + (lanes - 1) * (h / lanes);
    return static_cast<std::size_t>(std::floor(length / spacing + 1e-9)) + 1;
}

}  // namespace

TEST_CASE("Trajectory validation") {
    CHECK_THROWS_AS(Trajectory({{0.0, Pose()}}), ValidationError);
    CHECK_THROWS_AS(Trajectory({{0.0, Pose()}, {0.0, Pose()}}), ValidationError);
    CHECK_THROWS_AS(Trajectory({{0.0, Pose()}, {1.0, Pose({NAN, 0}, 0)}}), ValidationError);
    CHECK(Trajectory({{0.0, Pose()}, {2.5, Pose()}}).duration() == 2.5);
}

TEST_CASE("BudgetSchedule") {
    const BudgetSchedule s({{0.0, 10}, {5.0, 4}, {7.5, 8}});
    CHECK(s.k_max_at(0.0) == 10);
    CHECK(s.k_max_at(4.999) == 10);
    CHECK(s.k_max_at(5.0) == 4);
    CHECK(s.k_max_at(100.0) == 8);
    CHECK_THROWS_AS(BudgetSchedule({}), ValidationError);
    CHECK_THROWS_AS(BudgetSchedule({{1.0, 3}}), ValidationError);
    CHECK_THROWS_AS(BudgetSchedule({{0.0, 3}, {0.0, 4}}), ValidationError);
    CHECK_THROWS_AS(BudgetSchedule({{0.0, 0}}), ValidationError);
}

TEST_CASE("loop_closure_check") {
    const auto map = strip_map({3, 0, 3});
    MapStore store(map);
    const LoopClosureModel model;
    CHECK(loop_closure_check({20, 20}, *map, store, model) == LoopClosureOutcome::no_opportunity);
    CHECK(loop_closure_check({1, 0.5}, *map, store, model) == LoopClosureOutcome::missed);
    store.load_zone(ZoneId{0});
    CHECK(loop_closure_check({1, 0.5}, *map, store, model) == LoopClosureOutcome::accepted);
    CHECK(loop_closure_check({1, 0.5}, *map, store, {2.0, 4}) == LoopClosureOutcome::missed);
    CHECK_THROWS_AS(LoopClosureModel({0.0, 1}).validate(), ValidationError);
    CHECK_THROWS_AS(LoopClosureModel({1.0, 0}).validate(), ValidationError);
}

TEST_CASE("run: trajectory confined to one zone") {
    const auto map = strip_map({4, 6});
    std::vector<TrajectorySample> samples;
    for (int i = 0; i < 50; ++i) samples.push_back({i * 0.1, Pose({2.5 + 0.01 * i, 0.5}, 0)});
    const auto r = run(map, Trajectory(samples), semantic(10));
    CHECK(r.summary.total_transactions == 1);
    CHECK(r.summary.lc_opportunities == 50);
    CHECK(r.summary.lc_accepted == 50);
    CHECK(r.timeseries.size() == 50);
}

TEST_CASE("run: budget drop evicts at the tick of the drop") {
    const auto map = strip_map({4, 4, 4});
    std::vector<TrajectorySample> samples;
    for (std::uint32_t z = 0; z < 3; ++z) {
        for (int k = 0; k < 20; ++k) samples.push_back({static_cast<double>(samples.size()), strip_pose(z)});
    }
    for (int k = 0; k < 80; ++k) samples.push_back({static_cast<double>(samples.size()), strip_pose(2)});
    ReplayConfig c;
    c.schedule = BudgetSchedule({{0.0, 12}, {50.0, 5}});
    const auto r = run(map, Trajectory(samples), c);
    CHECK(r.timeseries[49].resident_count == 12);
    CHECK(r.timeseries[50].resident_count == 4);
    bool evicted_at_50 = false;
    for (const StrategyEvent& e : r.events) {
        if (e.kind == EventKind::zone_unload) {
            CHECK(e.tick == 50);
            evicted_at_50 = true;
        }
    }
    CHECK(evicted_at_50);
    for (std::size_t i = 50; i < r.timeseries.size(); ++i) CHECK(r.timeseries[i].resident_count <= 5);
}

TEST_CASE("run: semantic beats geometric on transactions in a small corridor world") {
    WorldSpec spec;
    spec.rooms = 3;
    auto map = std::make_shared<const Map>(generate_world(spec));
    const auto order = default_patrol_order(*map);
    const auto patrol = generate_patrol_route(*map, order);
    ReplayConfig sem = semantic(default_budget(*map));
    ReplayConfig geo = sem;
    geo.strategy = StrategyKind::geometric;
    const auto a = run(map, patrol.trajectory, geo);
    const auto b = run(map, patrol.trajectory, sem);
    CHECK(b.summary.total_transactions < a.summary.total_transactions);
    CHECK(to_json(run(map, patrol.trajectory, sem)) == to_json(b));
}

TEST_CASE("run: hooks observe every tick and transaction") {
    const auto map = strip_map({2, 3});
    std::size_t ticks = 0;
    std::size_t transactions = 0;
    ReplayHooks hooks;
    hooks.on_transaction = [&](const TransactionEvent&, std::size_t) { ++transactions; };
    hooks.on_tick = [&](Tick t, const KeyframeManager& m, const MapStore& s) {
        CHECK(t == static_cast<Tick>(ticks));
        CHECK(m.resident_count() == s.resident_count());
        ++ticks;
    };
    const auto r = run(map, through({strip_pose(0), strip_pose(1), strip_pose(0)}), semantic(10), hooks);
    CHECK(ticks == 3);
    CHECK(transactions == r.summary.total_transactions);
}

TEST_CASE("run: config validation") {
    const auto map = strip_map({2});
    const auto traj = through({strip_pose(0), strip_pose(0)});
    ReplayConfig c = semantic(5);
    c.prefetch = true;
    CHECK_THROWS_AS(run(map, traj, c), ValidationError);
    c.route = {{0, 0.5}, {2, 0.5}};
    CHECK_NOTHROW(run(map, traj, c));
    c.strategy = StrategyKind::geometric;
    CHECK_THROWS_AS(run(map, traj, c), ValidationError);
    CHECK_THROWS_AS(run(nullptr, traj, semantic(5)), ValidationError);
}

TEST_CASE("prefetched zones are never loaded on entry") {
    WorldSpec spec;
    spec.rooms = 4;
    auto map = std::make_shared<const Map>(generate_world(spec));
    const auto patrol = generate_patrol_route(*map, default_patrol_order(*map));
    ReplayConfig c = semantic(4 * map->index().largest_zone());
    c.prefetch = true;
    c.route = patrol.waypoints;
    const auto r = run(map, patrol.trajectory, c);
    std::set<std::uint32_t> prefetched;
    std::size_t prefetch_events = 0;
    for (const StrategyEvent& e : r.events) {
        if (e.kind == EventKind::prefetch) {
            prefetched.insert(e.subject);
            ++prefetch_events;
        }
        if (e.kind == EventKind::zone_unload) prefetched.erase(e.subject);
        if (e.kind == EventKind::zone_load) CHECK_FALSE(prefetched.contains(e.subject));
    }
    CHECK(prefetch_events > 0);
}

TEST_CASE("RouteFollower reports the zones still ahead") {
    const auto map = strip_map({1, 1, 1, 1});
    const std::vector<Point2> route{{1, 0.5}, {7, 0.5}, {3, 0.5}};
    RouteFollower f(route, map->zones(), 0.25);
    CHECK(f.upcoming({1, 0.5}) == std::vector<ZoneId>{ZoneId{0}, ZoneId{1}, ZoneId{2}, ZoneId{3}, ZoneId{2},
                                                      ZoneId{1}});
    CHECK(f.upcoming({7, 0.5}) == std::vector<ZoneId>{ZoneId{3}, ZoneId{2}, ZoneId{1}});
    // On the way back the follower does not jump to the outbound leg.
    CHECK(f.upcoming({5, 0.5}) == std::vector<ZoneId>{ZoneId{2}, ZoneId{1}});
    CHECK(f.cursor() == 1);
}

TEST_CASE("generate_world") {
    SUBCASE("one small room") {
        WorldSpec spec;
        spec.rooms = 1;
        spec.room_w = 4;
        spec.room_h = 4;
        spec.kf_spacing = 1;
        const Map map = generate_world(spec);
        CHECK(map.zones().size() == 2);
        const std::size_t corridor = sweep_keyframes(4, 3, 1);
        const std::size_t room = sweep_keyframes(4, 4, 1);
        CHECK(corridor == 3);
        CHECK(room == 7);
        CHECK(map.index().count(ZoneId{0}) == corridor);
        CHECK(map.index().count(ZoneId{1}) == room);
        CHECK(map.keyframes().size() == corridor + room);
        CHECK(map.warnings().empty());
    }
    SUBCASE("canonical world") {
        const Map map = generate_world({});
        CHECK(map.zones().size() == 7);
        CHECK(map.zones().at(ZoneId{0}).name() == "corridor");
        CHECK(map.zones().at(ZoneId{6}).name() == "room_5");
        CHECK(map.index().count(ZoneId{0}) == sweep_keyframes(48, 3, 0.5));
        for (std::uint32_t z = 1; z <= 6; ++z) CHECK(map.index().count(ZoneId{z}) == sweep_keyframes(8, 6, 0.5));
        CHECK(map.keyframes().size() == 857);
        CHECK(default_budget(map) == 430);
    }
    SUBCASE("deterministic in the seed") {
        CHECK(map_hash(generate_world({})) == map_hash(generate_world({})));
        WorldSpec other;
        other.seed = 43;
        CHECK(map_hash(generate_world(other)) != map_hash(generate_world({})));
    }
    SUBCASE("invalid specs") {
        WorldSpec bad;
        bad.rooms = 0;
        CHECK_THROWS_AS(generate_world(bad), ValidationError);
        bad = {};
        bad.kf_spacing = -1;
        CHECK_THROWS_AS(generate_world(bad), ValidationError);
    }
}

TEST_CASE("generate_patrol_route") {
    const Map map = generate_world({});
    SUBCASE("duration matches path length at 1 m/s") {
        const auto order = default_patrol_order(map);
        CHECK(order.size() == 7);
        CHECK(order.front() == order.back());
        const auto p = generate_patrol_route(map, order);
        double length = 0;
        for (std::size_t i = 1; i < p.waypoints.size(); ++i) length += distance(p.waypoints[i - 1], p.waypoints[i]);
        CHECK(std::abs(p.trajectory.duration() - length / kPatrolSpeed) <= 1.0 / kPatrolRate);
        for (std::size_t i = 1; i < p.trajectory.size(); ++i) {
            const auto& s = p.trajectory.samples();
            CHECK(distance(s[i].pose.position, s[i - 1].pose.position) <= kPatrolSpeed / kPatrolRate + 1e-9);
        }
    }
    SUBCASE("single zone dwells at the centroid") {
        const std::vector<ZoneId> one{ZoneId{3}};
        const auto p = generate_patrol_route(map, one);
        CHECK(p.trajectory.size() == 11);
        for (const auto& s : p.trajectory.samples()) {
            CHECK(s.pose.position == map.zones().at(ZoneId{3}).centroid());
        }
    }
    SUBCASE("revisiting a room passes its keyframes twice") {
        const std::vector<ZoneId> order{ZoneId{1}, ZoneId{3}, ZoneId{1}};
        const auto p = generate_patrol_route(map, order);
        const auto zones = predict_route_zones(p.waypoints, map.zones());
        CHECK(zones == std::vector<ZoneId>{ZoneId{1}, ZoneId{0}, ZoneId{3}, ZoneId{0}, ZoneId{1}});
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(generate_patrol_route(map, {}), ValidationError);
        const std::vector<ZoneId> unknown{ZoneId{42}};
        CHECK_THROWS(generate_patrol_route(map, unknown));
    }
}

TEST_CASE("csv formats round trip") {
    const auto traj = through({Pose({0.1, 0.2}, 0.3), Pose({1.0 / 3.0, 2}, -1)});
    CHECK(parse_trajectory_csv(serialize_trajectory_csv(traj)) == traj);
    const BudgetSchedule s({{0.0, 10}, {2.5, 3}});
    CHECK(parse_schedule_csv(serialize_schedule_csv(s)).segments() == s.segments());
    const std::vector<Point2> route{{1, 2}, {3.25, -4}};
    CHECK(parse_route_csv(serialize_route_csv(route)) == route);

    CHECK_THROWS_AS(parse_trajectory_csv("t,x,y\n0,0,0\n"), FormatError);
    CHECK_THROWS_AS(parse_trajectory_csv("t,x,y,theta\n0,0,0,0\n"), FormatError);
    CHECK_THROWS_AS(parse_trajectory_csv("t,x,y,theta\n0,0,0,0\n1,a,0,0\n"), FormatError);
    CHECK_THROWS_AS(parse_schedule_csv("t_start,k_max\n0,-3\n"), FormatError);
    CHECK_THROWS_AS(parse_route_csv("x,y\n"), FormatError);
    CHECK_THROWS_WITH(read_trajectory("/nonexistent/traj.csv"), doctest::Contains("/nonexistent/traj.csv"));
}
