#include <zonemem/error.hpp>
#include <zonemem/strategy.hpp>

#include <algorithm>
#include <utility>

namespace zonemem {

void GeometricParams::validate() const {
    if (!(r_load > 0.0)) throw ValidationError("r_load must be positive");
    if (!(r_unload >= r_load)) throw ValidationError("r_unload must be at least r_load");
}

GeometricManager::GeometricManager(MapStore& store, GeometricParams params)
    : store_(store), params_(params) {
    params_.validate();
}

void GeometricManager::unload(KeyframeId id, Tick tick, EventList& events) {
    store_.unload_keyframe(id, tick);
    last_access_.erase(id);
    events.push_back({tick, EventKind::kf_unload, id.value, 1});
}

EventList GeometricManager::on_pose_update(const Pose& pose, Budget budget, Tick tick,
                                           std::span<const ZoneId> /*route_hint*/) {
    const Map& map = store_.map();
    const Point2 here = pose.position;
    EventList events;

    std::vector<KeyframeId> far;
    for (const auto& [id, last] : last_access_) {
        if (distance(map.keyframe(id).pose.position, here) > params_.r_unload) far.push_back(id);
    }
    for (KeyframeId id : far) unload(id, tick, events);

    const std::vector<KeyframeId> near = map.within(here, params_.r_load);
    for (KeyframeId id : near) {
        if (auto it = last_access_.find(id); it != last_access_.end()) it->second = tick;
    }

    // Least-recently-used resident keyframe outside the load radius.
    auto victim = [&]() -> std::optional<KeyframeId> {
        std::optional<std::pair<Tick, KeyframeId>> best;
        for (const auto& [id, last] : last_access_) {
            if (std::binary_search(near.begin(), near.end(), id)) continue;
            if (!best || std::pair(last, id) < *best) best = std::pair(last, id);
        }
        if (!best) return std::nullopt;
        return best->second;
    };

    for (KeyframeId id : near) {
        if (last_access_.contains(id)) continue;
        while (last_access_.size() + 1 > budget.k_max()) {
            const auto v = victim();
            if (!v) break;
            unload(*v, tick, events);
        }
        if (last_access_.size() + 1 > budget.k_max()) {
            events.push_back({tick, EventKind::budget_violation, id.value, 1});
            continue;
        }
        store_.load_keyframe(id, tick);
        last_access_[id] = tick;
        events.push_back({tick, EventKind::kf_load, id.value, 1});
    }
    return events;
}

EventList GeometricManager::enforce_budget(Budget budget, Tick tick,
                                           std::span<const ZoneId> /*route_hint*/) {
    EventList events;
    while (last_access_.size() > budget.k_max()) {
        const auto oldest = std::min_element(
            last_access_.begin(), last_access_.end(), [](const auto& a, const auto& b) {
                return std::pair(a.second, a.first) < std::pair(b.second, b.first);
            });
        unload(oldest->first, tick, events);
    }
    return events;
}

}  // namespace zonemem
