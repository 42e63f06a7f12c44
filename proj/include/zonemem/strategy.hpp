#pragma once

#include <zonemem/ids.hpp>
#include <zonemem/map_store.hpp>
#include <zonemem/zone_model.hpp>

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

namespace zonemem {

/// MemoryThr expressed as a maximum resident keyframe count.
class Budget {
public:
    /// Throws ValidationError when k_max is zero.
    explicit Budget(std::size_t k_max);
    std::size_t k_max() const { return k_max_; }

    friend bool operator==(const Budget&, const Budget&) = default;

private:
    std::size_t k_max_;
};

enum class EventKind {
    zone_enter,
    zone_load,
    zone_unload,
    kf_load,
    kf_unload,
    prefetch,          // speculative zone load; also a transaction
    over_budget_zone,  // a single zone cannot fit in the budget
    budget_violation,  // geometric baseline skipped a required load
};

std::string_view to_string(EventKind kind);
/// Throws ValidationError for an unknown name.
EventKind event_kind_from_string(std::string_view name);

/// True for kinds that correspond to one store transaction.
bool is_transaction(EventKind kind);
bool is_load(EventKind kind);
bool is_unload(EventKind kind);

struct StrategyEvent {
    Tick tick = 0;
    EventKind kind = EventKind::zone_enter;
    std::uint32_t subject = 0;  // zone or keyframe id depending on kind
    std::size_t count = 0;      // keyframes affected

    friend bool operator==(const StrategyEvent&, const StrategyEvent&) = default;
};

using EventList = std::vector<StrategyEvent>;

enum class StrategyKind { semantic, geometric };

std::string_view to_string(StrategyKind kind);
StrategyKind strategy_kind_from_string(std::string_view name);

struct ActiveZone {
    ZoneId zone;
    Tick last_access = 0;

    friend bool operator==(const ActiveZone&, const ActiveZone&) = default;
};

/// Working set of the semantic manager.
struct WorkingSetState {
    std::vector<ActiveZone> active_zones;  // activation order
    std::set<KeyframeId> resident;
    std::optional<ZoneId> current_zone;
    std::optional<ZoneId> pinned;

    bool is_active(ZoneId z) const;
    std::vector<ZoneId> active_ids() const;
};

/// Resident count after activating z_new: sum of active roster sizes plus
/// |S_{z_new}|. Throws ValidationError for unknown zones or when z_new is
/// already active.
std::size_t predict_resident(std::span<const ZoneId> active, ZoneId z_new, const ZoneIndex& index);

/// Eviction victim: the non-pinned active zone with the oldest access.
/// Zones absent from route_hint are preferred over zones on it; ties on
/// access tick go to the lower zone id. Throws ValidationError when every
/// active zone is pinned.
ZoneId select_unload_zone(const WorkingSetState& state, std::span<const ZoneId> route_hint = {});

/// Common surface of the two keyframe management policies.
class KeyframeManager {
public:
    virtual ~KeyframeManager() = default;

    virtual StrategyKind kind() const = 0;
    virtual EventList on_pose_update(const Pose& pose, Budget budget, Tick tick,
                                     std::span<const ZoneId> route_hint = {}) = 0;
    /// Evicts until residency fits a (lowered) budget.
    virtual EventList enforce_budget(Budget budget, Tick tick,
                                     std::span<const ZoneId> route_hint = {}) = 0;
    virtual std::size_t resident_count() const = 0;
};

/// Zone-granular working-set manager: unloads whole zones until the
/// predicted resident count fits the budget, then loads the new zone in one
/// batch.
class SemanticZoneManager final : public KeyframeManager {
public:
    explicit SemanticZoneManager(MapStore& store);

    StrategyKind kind() const override { return StrategyKind::semantic; }

    EventList on_pose_update(const Pose& pose, Budget budget, Tick tick,
                             std::span<const ZoneId> route_hint = {}) override;
    EventList enforce_budget(Budget budget, Tick tick,
                             std::span<const ZoneId> route_hint = {}) override;
    std::size_t resident_count() const override { return state_.resident.size(); }

    /// Evict-then-load activation of a zone that is not active. Throws
    /// ValidationError for an unknown or already active zone.
    EventList activate_zone(ZoneId z_new, Budget budget, Tick tick,
                            std::span<const ZoneId> route_hint = {});

    /// Activates the first upcoming zone that is not active, provided it fits
    /// without evicting anything.
    EventList prefetch(std::span<const ZoneId> upcoming, Budget budget, Tick tick);
    EventList prefetch(std::span<const Point2> route, Budget budget, Tick tick,
                       double step = kDefaultRouteStep);

    const WorkingSetState& state() const { return state_; }

private:
    void evict(ZoneId zone, Tick tick, EventList& events);
    void load(ZoneId zone, Tick tick, EventKind kind, EventList& events);
    void touch(ZoneId zone, Tick tick);

    MapStore& store_;
    WorkingSetState state_;
};

struct GeometricParams {
    double r_load = 5.0;
    double r_unload = 10.0;

    /// Throws ValidationError unless r_unload >= r_load > 0.
    void validate() const;

    friend bool operator==(const GeometricParams&, const GeometricParams&) = default;
};

/// Per-keyframe baseline: loads keyframes inside r_load, drops those beyond
/// r_unload, and evicts least-recently-used keyframes when the budget is hit.
class GeometricManager final : public KeyframeManager {
public:
    GeometricManager(MapStore& store, GeometricParams params);

    StrategyKind kind() const override { return StrategyKind::geometric; }

    EventList on_pose_update(const Pose& pose, Budget budget, Tick tick,
                             std::span<const ZoneId> route_hint = {}) override;
    EventList enforce_budget(Budget budget, Tick tick,
                             std::span<const ZoneId> route_hint = {}) override;
    std::size_t resident_count() const override { return last_access_.size(); }

    /// Resident keyframes and the tick each was last within r_load.
    const std::map<KeyframeId, Tick>& resident() const { return last_access_; }
    const GeometricParams& params() const { return params_; }

private:
    void unload(KeyframeId id, Tick tick, EventList& events);

    MapStore& store_;
    GeometricParams params_;
    std::map<KeyframeId, Tick> last_access_;
};

}  // namespace zonemem
