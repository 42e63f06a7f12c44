#include <zonemem/error.hpp>
#include <zonemem/strategy.hpp>

#include <algorithm>
#include <array>
#include <tuple>

namespace zonemem {

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 8> kEventNames{{
    {EventKind::zone_enter, "zone_enter"},
    {EventKind::zone_load, "zone_load"},
    {EventKind::zone_unload, "zone_unload"},
    {EventKind::kf_load, "kf_load"},
    {EventKind::kf_unload, "kf_unload"},
    {EventKind::prefetch, "prefetch"},
    {EventKind::over_budget_zone, "over_budget_zone"},
    {EventKind::budget_violation, "budget_violation"},
}};

}  // namespace

Budget::Budget(std::size_t k_max) : k_max_(k_max) {
    if (k_max == 0) throw ValidationError("budget k_max must be at least 1");
}

std::string_view to_string(EventKind kind) {
    for (const auto& [k, name] : kEventNames) {
        if (k == kind) return name;
    }
    return "unknown";
}

EventKind event_kind_from_string(std::string_view name) {
    for (const auto& [k, n] : kEventNames) {
        if (n == name) return k;
    }
    throw ValidationError("unknown event kind \"" + std::string(name) + "\"");
}

bool is_load(EventKind kind) {
    return kind == EventKind::zone_load || kind == EventKind::kf_load || kind == EventKind::prefetch;
}

bool is_unload(EventKind kind) {
    return kind == EventKind::zone_unload || kind == EventKind::kf_unload;
}

bool is_transaction(EventKind kind) { return is_load(kind) || is_unload(kind); }

std::string_view to_string(StrategyKind kind) {
    return kind == StrategyKind::semantic ? "semantic" : "geometric";
}

StrategyKind strategy_kind_from_string(std::string_view name) {
    if (name == "semantic") return StrategyKind::semantic;
    if (name == "geometric") return StrategyKind::geometric;
    throw ValidationError("unknown strategy \"" + std::string(name) + "\"");
}

bool WorkingSetState::is_active(ZoneId z) const {
    return std::any_of(active_zones.begin(), active_zones.end(),
                       [z](const ActiveZone& a) { return a.zone == z; });
}

std::vector<ZoneId> WorkingSetState::active_ids() const {
    std::vector<ZoneId> out;
    out.reserve(active_zones.size());
    for (const ActiveZone& a : active_zones) out.push_back(a.zone);
    return out;
}

std::size_t predict_resident(std::span<const ZoneId> active, ZoneId z_new, const ZoneIndex& index) {
    if (std::find(active.begin(), active.end(), z_new) != active.end()) {
        throw ValidationError("zone " + std::to_string(z_new.value) + " is already active");
    }
    std::size_t total = index.count(z_new);
    for (ZoneId z : active) total += index.count(z);
    return total;
}

ZoneId select_unload_zone(const WorkingSetState& state, std::span<const ZoneId> route_hint) {
    const ActiveZone* best = nullptr;
    auto key = [&](const ActiveZone& a) {
        const bool upcoming =
            std::find(route_hint.begin(), route_hint.end(), a.zone) != route_hint.end();
        return std::tuple(upcoming, a.last_access, a.zone);
    };
    for (const ActiveZone& a : state.active_zones) {
        if (state.pinned && a.zone == *state.pinned) continue;
        if (best == nullptr || key(a) < key(*best)) best = &a;
    }
    if (best == nullptr) throw ValidationError("no evictable zone: only the pinned zone is active");
    return best->zone;
}

SemanticZoneManager::SemanticZoneManager(MapStore& store) : store_(store) {}

void SemanticZoneManager::touch(ZoneId zone, Tick tick) {
    for (ActiveZone& a : state_.active_zones) {
        if (a.zone == zone) a.last_access = tick;
    }
}

void SemanticZoneManager::evict(ZoneId zone, Tick tick, EventList& events) {
    store_.unload_zone(zone, tick);
    std::erase_if(state_.active_zones, [zone](const ActiveZone& a) { return a.zone == zone; });
    const auto& roster = store_.map().index().roster(zone);
    for (KeyframeId id : roster) state_.resident.erase(id);
    events.push_back({tick, EventKind::zone_unload, zone.value, roster.size()});
}

void SemanticZoneManager::load(ZoneId zone, Tick tick, EventKind kind, EventList& events) {
    store_.load_zone(zone, tick);
    state_.active_zones.push_back({zone, tick});
    const auto& roster = store_.map().index().roster(zone);
    state_.resident.insert(roster.begin(), roster.end());
    events.push_back({tick, kind, zone.value, roster.size()});
}

EventList SemanticZoneManager::activate_zone(ZoneId z_new, Budget budget, Tick tick,
                                             std::span<const ZoneId> route_hint) {
    const ZoneIndex& index = store_.map().index();
    const std::vector<ZoneId> active = state_.active_ids();
    std::size_t predicted = predict_resident(active, z_new, index);

    EventList events;
    while (predicted > budget.k_max()) {
        const bool evictable = std::any_of(
            state_.active_zones.begin(), state_.active_zones.end(),
            [&](const ActiveZone& a) { return !state_.pinned || a.zone != *state_.pinned; });
        if (!evictable) break;
        const ZoneId victim = select_unload_zone(state_, route_hint);
        predicted -= index.count(victim);
        evict(victim, tick, events);
    }
    load(z_new, tick, EventKind::zone_load, events);
    if (predicted > budget.k_max()) {
        events.push_back({tick, EventKind::over_budget_zone, z_new.value, state_.resident.size()});
    }
    return events;
}

EventList SemanticZoneManager::on_pose_update(const Pose& pose, Budget budget, Tick tick,
                                              std::span<const ZoneId> route_hint) {
    const auto z_new = store_.map().zones().locate(pose);
    if (!z_new || z_new == state_.current_zone) {
        if (state_.current_zone) touch(*state_.current_zone, tick);
        return {};
    }
    EventList events;
    state_.pinned = z_new;
    if (state_.is_active(*z_new)) {
        touch(*z_new, tick);
    } else {
        events = activate_zone(*z_new, budget, tick, route_hint);
    }
    state_.current_zone = z_new;
    events.push_back({tick, EventKind::zone_enter, z_new->value, 0});
    return events;
}

EventList SemanticZoneManager::enforce_budget(Budget budget, Tick tick,
                                              std::span<const ZoneId> route_hint) {
    EventList events;
    while (state_.resident.size() > budget.k_max()) {
        const bool evictable = std::any_of(
            state_.active_zones.begin(), state_.active_zones.end(),
            [&](const ActiveZone& a) { return !state_.pinned || a.zone != *state_.pinned; });
        if (!evictable) {
            events.push_back({tick, EventKind::over_budget_zone,
                              state_.pinned ? state_.pinned->value : 0, state_.resident.size()});
            break;
        }
        evict(select_unload_zone(state_, route_hint), tick, events);
    }
    return events;
}

EventList SemanticZoneManager::prefetch(std::span<const ZoneId> upcoming, Budget budget, Tick tick) {
    const auto next = std::find_if(upcoming.begin(), upcoming.end(),
                                   [&](ZoneId z) { return !state_.is_active(z); });
    if (next == upcoming.end()) return {};
    const std::vector<ZoneId> active = state_.active_ids();
    if (predict_resident(active, *next, store_.map().index()) > budget.k_max()) return {};
    EventList events;
    load(*next, tick, EventKind::prefetch, events);
    return events;
}

EventList SemanticZoneManager::prefetch(std::span<const Point2> route, Budget budget, Tick tick,
                                        double step) {
    const std::vector<ZoneId> upcoming = predict_route_zones(route, store_.map().zones(), step);
    return prefetch(upcoming, budget, tick);
}

}  // namespace zonemem
