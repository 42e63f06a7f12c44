#include <zonemem/map_store.hpp>

#include <zonemem/error.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace zonemem {

void SyntheticPayload::read(std::uint64_t offset, std::span<std::byte> out) const {
    if (offset > size_ || out.size() > size_ - offset) {
        throw ValidationError("payload read past end");
    }
    std::mt19937_64 engine(seed_);
    engine.discard(offset / 8);
    std::uint64_t word = engine();
    std::uint64_t pos = offset;
    for (std::byte& b : out) {
        if (pos != offset && pos % 8 == 0) word = engine();
        b = static_cast<std::byte>((word >> (8 * (pos % 8))) & 0xffu);
        ++pos;
    }
}

std::size_t ZoneIndex::count(ZoneId z) const {
    const auto it = zone_counts.find(z);
    if (it == zone_counts.end()) throw ValidationError("unknown zone id " + std::to_string(z.value));
    return it->second;
}

const std::vector<KeyframeId>& ZoneIndex::roster(ZoneId z) const {
    const auto it = zone_to_kfs.find(z);
    if (it == zone_to_kfs.end()) throw ValidationError("unknown zone id " + std::to_string(z.value));
    return it->second;
}

std::size_t ZoneIndex::largest_zone() const {
    std::size_t best = 0;
    for (const auto& [zone, n] : zone_counts) best = std::max(best, n);
    return best;
}

void ZoneIndex::check_consistency() const {
    if (zone_counts.size() != zone_to_kfs.size()) {
        throw ValidationError("zone_counts and zone rosters cover different zones");
    }
    std::size_t total = 0;
    for (const auto& [zone, roster] : zone_to_kfs) {
        const auto c = zone_counts.find(zone);
        if (c == zone_counts.end() || c->second != roster.size()) {
            throw ValidationError("zone_counts[" + std::to_string(zone.value) +
                                  "] disagrees with its roster");
        }
        if (!std::is_sorted(roster.begin(), roster.end())) {
            throw ValidationError("roster of zone " + std::to_string(zone.value) + " is not sorted");
        }
        for (KeyframeId kf : roster) {
            const auto it = kf_to_zone.find(kf);
            if (it == kf_to_zone.end() || it->second != zone) {
                throw ValidationError("keyframe " + std::to_string(kf.value) +
                                      " listed under zone " + std::to_string(zone.value) +
                                      " but mapped elsewhere");
            }
        }
        total += roster.size();
    }
    if (total != kf_to_zone.size()) {
        throw ValidationError("keyframe appears in more or fewer than one roster");
    }
}

std::string IndexWarning::message() const {
    std::ostringstream os;
    os << "keyframe " << keyframe << " lies outside every zone; assigned to nearest zone " << zone
       << " (distance " << distance << " m)";
    return os.str();
}

IndexBuild build_index(std::span<const Keyframe> keyframes, const ZoneSet& zones) {
    if (zones.empty()) throw ValidationError("cannot build an index without zones");
    IndexBuild out;
    for (const Zone& z : zones.zones()) {
        out.index.zone_to_kfs[z.id()];
        out.index.zone_counts[z.id()] = 0;
    }
    for (const Keyframe& kf : keyframes) {
        ZoneId zone;
        if (const auto located = zones.locate(kf.pose)) {
            zone = *located;
        } else {
            zone = zones.nearest(kf.pose.position);
            out.warnings.push_back(
                {kf.id, zone, zones.at(zone).boundary_distance(kf.pose.position)});
        }
        if (!out.index.kf_to_zone.emplace(kf.id, zone).second) {
            throw ValidationError("duplicate keyframe id " + std::to_string(kf.id.value));
        }
        out.index.zone_to_kfs[zone].push_back(kf.id);
        ++out.index.zone_counts[zone];
    }
    for (auto& [zone, roster] : out.index.zone_to_kfs) std::sort(roster.begin(), roster.end());
    return out;
}

Map::Map(ZoneSet zones, std::vector<Keyframe> keyframes)
    : zones_(std::move(zones)), keyframes_(std::move(keyframes)) {
    if (zones_.empty()) throw ValidationError("map has no zones");
    if (keyframes_.empty()) throw ValidationError("map has no keyframes");
    std::sort(keyframes_.begin(), keyframes_.end(),
              [](const Keyframe& a, const Keyframe& b) { return a.id < b.id; });
    for (const Keyframe& kf : keyframes_) {
        if (kf.payload_bytes == 0) {
            throw ValidationError("keyframe " + std::to_string(kf.id.value) +
                                  ": payload_bytes must be positive");
        }
        if (!std::isfinite(kf.pose.position.x) || !std::isfinite(kf.pose.position.y) ||
            !std::isfinite(kf.pose.heading)) {
            throw ValidationError("keyframe " + std::to_string(kf.id.value) + ": non-finite pose");
        }
    }
    IndexBuild built = build_index(keyframes_, zones_);
    index_ = std::move(built.index);
    warnings_ = std::move(built.warnings);
    for (std::size_t i = 0; i < keyframes_.size(); ++i) {
        Keyframe& kf = keyframes_[i];
        kf.zone = index_.kf_to_zone.at(kf.id);
        slots_.emplace(kf.id, i);
        grid_[{cell_of(kf.pose.position.x), cell_of(kf.pose.position.y)}].push_back(i);
    }
}

std::int64_t Map::cell_of(double v) const {
    return static_cast<std::int64_t>(std::floor(v / cell_size_));
}

const Keyframe& Map::keyframe(KeyframeId id) const { return keyframes_[slot(id)]; }

std::size_t Map::slot(KeyframeId id) const {
    const auto it = slots_.find(id);
    if (it == slots_.end()) throw ValidationError("unknown keyframe id " + std::to_string(id.value));
    return it->second;
}

std::vector<KeyframeId> Map::within(Point2 p, double radius) const {
    std::vector<KeyframeId> out;
    auto consider = [&](std::size_t s) {
        if (distance(keyframes_[s].pose.position, p) <= radius) out.push_back(keyframes_[s].id);
    };
    const std::int64_t x0 = cell_of(p.x - radius);
    const std::int64_t x1 = cell_of(p.x + radius);
    const std::int64_t y0 = cell_of(p.y - radius);
    const std::int64_t y1 = cell_of(p.y + radius);
    const auto span_cells = static_cast<double>(x1 - x0 + 1) * static_cast<double>(y1 - y0 + 1);
    if (span_cells > static_cast<double>(grid_.size())) {
        for (const auto& [cell, slots] : grid_) {
            for (std::size_t s : slots) consider(s);
        }
    } else {
        for (std::int64_t cx = x0; cx <= x1; ++cx) {
            for (std::int64_t cy = y0; cy <= y1; ++cy) {
                const auto it = grid_.find({cx, cy});
                if (it == grid_.end()) continue;
                for (std::size_t s : it->second) consider(s);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string_view to_string(TransactionKind kind) {
    switch (kind) {
        case TransactionKind::zone_load: return "zone_load";
        case TransactionKind::zone_unload: return "zone_unload";
        case TransactionKind::keyframe_load: return "kf_load";
        case TransactionKind::keyframe_unload: return "kf_unload";
    }
    return "unknown";
}

namespace {

void apply(TransactionCounters& c, const TransactionEvent& event) {
    switch (event.kind) {
        case TransactionKind::zone_load:
            ++c.loads_issued;
            ++c.batch_loads;
            c.keyframes_loaded += event.count;
            break;
        case TransactionKind::keyframe_load:
            ++c.loads_issued;
            c.keyframes_loaded += event.count;
            break;
        case TransactionKind::zone_unload:
            ++c.unloads_issued;
            ++c.batch_unloads;
            c.keyframes_unloaded += event.count;
            break;
        case TransactionKind::keyframe_unload:
            ++c.unloads_issued;
            c.keyframes_unloaded += event.count;
            break;
    }
}

}  // namespace

void TransactionLog::record(const TransactionEvent& event) {
    events_.push_back(event);
    apply(counters_, event);
}

TransactionCounters TransactionLog::fold(std::span<const TransactionEvent> events) {
    TransactionCounters c;
    for (const TransactionEvent& e : events) apply(c, e);
    return c;
}

MapStore::MapStore(std::shared_ptr<const Map> map) : map_(std::move(map)) {
    if (!map_) throw ValidationError("map store needs a map");
    residency_.assign(map_->keyframes().size(), Residency::absent);
}

void MapStore::commit(const TransactionEvent& event) {
    log_.record(event);
    if (observer_) observer_(event, resident_count_);
}

std::vector<Keyframe> MapStore::load_zone(ZoneId zone, Tick tick) {
    std::lock_guard lock(mutex_);
    const auto& roster = map_->index().roster(zone);
    if (resident_zones_.contains(zone)) {
        throw ContractError("zone " + std::to_string(zone.value) + " is already resident");
    }
    for (KeyframeId id : roster) {
        if (residency_[map_->slot(id)] != Residency::absent) {
            throw ContractError("zone " + std::to_string(zone.value) + " overlaps resident keyframe " +
                                std::to_string(id.value));
        }
    }
    std::vector<Keyframe> out;
    out.reserve(roster.size());
    for (KeyframeId id : roster) {
        const std::size_t s = map_->slot(id);
        residency_[s] = Residency::batch;
        resident_bytes_ += map_->keyframes()[s].payload_bytes;
        out.push_back(map_->keyframes()[s]);
    }
    resident_count_ += roster.size();
    resident_zones_.insert(zone);
    commit({tick, TransactionKind::zone_load, zone.value, roster.size()});
    return out;
}

Keyframe MapStore::load_keyframe(KeyframeId id, Tick tick) {
    std::lock_guard lock(mutex_);
    const std::size_t s = map_->slot(id);
    if (residency_[s] != Residency::absent) {
        throw ContractError("keyframe " + std::to_string(id.value) + " is already resident");
    }
    residency_[s] = Residency::single;
    ++resident_count_;
    resident_bytes_ += map_->keyframes()[s].payload_bytes;
    commit({tick, TransactionKind::keyframe_load, id.value, 1});
    return map_->keyframes()[s];
}

void MapStore::unload_zone(ZoneId zone, Tick tick) {
    std::lock_guard lock(mutex_);
    const auto& roster = map_->index().roster(zone);
    if (!resident_zones_.contains(zone)) {
        throw ContractError("zone " + std::to_string(zone.value) + " is not resident");
    }
    for (KeyframeId id : roster) {
        const std::size_t s = map_->slot(id);
        residency_[s] = Residency::absent;
        resident_bytes_ -= map_->keyframes()[s].payload_bytes;
    }
    resident_count_ -= roster.size();
    resident_zones_.erase(zone);
    commit({tick, TransactionKind::zone_unload, zone.value, roster.size()});
}

void MapStore::unload_keyframe(KeyframeId id, Tick tick) {
    std::lock_guard lock(mutex_);
    const std::size_t s = map_->slot(id);
    if (residency_[s] != Residency::single) {
        throw ContractError("keyframe " + std::to_string(id.value) +
                            " is not individually resident");
    }
    residency_[s] = Residency::absent;
    --resident_count_;
    resident_bytes_ -= map_->keyframes()[s].payload_bytes;
    commit({tick, TransactionKind::keyframe_unload, id.value, 1});
}

bool MapStore::is_resident(KeyframeId id) const {
    std::lock_guard lock(mutex_);
    return map_->contains(id) && residency_[map_->slot(id)] != Residency::absent;
}

bool MapStore::is_zone_resident(ZoneId zone) const {
    std::lock_guard lock(mutex_);
    return resident_zones_.contains(zone);
}

std::size_t MapStore::resident_count() const {
    std::lock_guard lock(mutex_);
    return resident_count_;
}

std::uint64_t MapStore::resident_bytes() const {
    std::lock_guard lock(mutex_);
    return resident_bytes_;
}

std::vector<KeyframeId> MapStore::resident() const {
    std::lock_guard lock(mutex_);
    std::vector<KeyframeId> out;
    out.reserve(resident_count_);
    for (std::size_t s = 0; s < residency_.size(); ++s) {
        if (residency_[s] != Residency::absent) out.push_back(map_->keyframes()[s].id);
    }
    return out;
}

TransactionCounters MapStore::counters() const {
    std::lock_guard lock(mutex_);
    return log_.counters();
}

std::vector<TransactionEvent> MapStore::events() const {
    std::lock_guard lock(mutex_);
    return log_.events();
}

void MapStore::set_observer(Observer observer) {
    std::lock_guard lock(mutex_);
    observer_ = std::move(observer);
}

}  // namespace zonemem
