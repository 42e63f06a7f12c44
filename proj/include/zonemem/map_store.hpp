#pragma once

#include <zonemem/ids.hpp>
#include <zonemem/zone_model.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace zonemem {

struct Keyframe {
    KeyframeId id;
    Pose pose;
    ZoneId zone;                     // filled in by build_index
    std::uint64_t payload_bytes = 1;  // declared memory footprint
    std::uint64_t payload_seed = 0;

    friend bool operator==(const Keyframe&, const Keyframe&) = default;
};

/// Deterministic synthetic payload for a keyframe. Only the declared size is
/// accounted; bytes are generated on demand from the seed.
class SyntheticPayload {
public:
    explicit SyntheticPayload(const Keyframe& kf) : seed_(kf.payload_seed), size_(kf.payload_bytes) {}

    std::uint64_t size() const { return size_; }
    /// Copies bytes [offset, offset + out.size()) of the payload into out.
    /// Throws ValidationError when the range runs past the end.
    void read(std::uint64_t offset, std::span<std::byte> out) const;

private:
    std::uint64_t seed_;
    std::uint64_t size_;
};

/// Bidirectional keyframe <-> zone metadata. Every zone of the map has a
/// roster entry, possibly empty.
struct ZoneIndex {
    std::map<KeyframeId, ZoneId> kf_to_zone;
    std::map<ZoneId, std::vector<KeyframeId>> zone_to_kfs;  // rosters sorted ascending
    std::map<ZoneId, std::size_t> zone_counts;

    bool has_zone(ZoneId z) const { return zone_to_kfs.contains(z); }
    /// |S_z|. Throws ValidationError for an unknown zone.
    std::size_t count(ZoneId z) const;
    const std::vector<KeyframeId>& roster(ZoneId z) const;
    std::size_t largest_zone() const;

    /// Throws ValidationError naming the first broken invariant.
    void check_consistency() const;

    friend bool operator==(const ZoneIndex&, const ZoneIndex&) = default;
};

/// A keyframe located in no zone and snapped to the nearest one.
struct IndexWarning {
    KeyframeId keyframe;
    ZoneId zone;
    double distance = 0.0;

    std::string message() const;
};

struct IndexBuild {
    ZoneIndex index;
    std::vector<IndexWarning> warnings;
};

/// Assigns every keyframe to locate(pose), falling back to the nearest zone.
/// Throws ValidationError when zones is empty or keyframe ids repeat.
IndexBuild build_index(std::span<const Keyframe> keyframes, const ZoneSet& zones);

/// Immutable map database: zones, keyframes sorted by id, and the zone index.
/// Safe to share between any number of readers.
class Map {
public:
    /// Builds the index and stamps each keyframe's zone. Throws
    /// ValidationError on empty inputs, duplicate ids or zero payloads.
    Map(ZoneSet zones, std::vector<Keyframe> keyframes);

    const ZoneSet& zones() const { return zones_; }
    const std::vector<Keyframe>& keyframes() const { return keyframes_; }
    const ZoneIndex& index() const { return index_; }
    const std::vector<IndexWarning>& warnings() const { return warnings_; }

    bool contains(KeyframeId id) const { return slots_.contains(id); }
    /// Throws ValidationError for an unknown id.
    const Keyframe& keyframe(KeyframeId id) const;
    /// Position of the keyframe in keyframes(); dense in [0, size).
    std::size_t slot(KeyframeId id) const;

    /// Ids of keyframes within `radius` of p, ascending.
    std::vector<KeyframeId> within(Point2 p, double radius) const;

    friend bool operator==(const Map& a, const Map& b) {
        return a.zones_ == b.zones_ && a.keyframes_ == b.keyframes_ && a.index_ == b.index_;
    }

private:
    std::int64_t cell_of(double v) const;

    ZoneSet zones_;
    std::vector<Keyframe> keyframes_;
    ZoneIndex index_;
    std::vector<IndexWarning> warnings_;
    std::unordered_map<KeyframeId, std::size_t> slots_;
    std::map<std::pair<std::int64_t, std::int64_t>, std::vector<std::size_t>> grid_;
    double cell_size_ = 2.0;
};

// Map directory layout.
inline constexpr const char* kZonesFile = "zones.json";
inline constexpr const char* kKeyframesFile = "keyframes.jsonl";
inline constexpr const char* kIndexFile = "index.json";

std::string serialize_keyframes(std::span<const Keyframe> keyframes);
std::string serialize_index(const ZoneIndex& index);

/// Writes the three map files into dir, creating it if needed.
void write_map(const Map& map, const std::filesystem::path& dir);
/// Reads and validates a map directory. Errors name the offending file and field.
Map read_map(const std::filesystem::path& dir);

/// Hex SHA-256 over the canonical serialization of the map.
std::string map_hash(const Map& map);
/// Hex SHA-256 of arbitrary bytes.
std::string sha256_hex(std::string_view bytes);

enum class TransactionKind { zone_load, zone_unload, keyframe_load, keyframe_unload };

std::string_view to_string(TransactionKind kind);

struct TransactionEvent {
    Tick tick = 0;
    TransactionKind kind = TransactionKind::zone_load;
    std::uint32_t subject = 0;  // zone id for batch kinds, keyframe id otherwise
    std::size_t count = 0;      // keyframes moved

    friend bool operator==(const TransactionEvent&, const TransactionEvent&) = default;
};

struct TransactionCounters {
    std::uint64_t loads_issued = 0;
    std::uint64_t unloads_issued = 0;
    std::uint64_t keyframes_loaded = 0;
    std::uint64_t keyframes_unloaded = 0;
    std::uint64_t batch_loads = 0;
    std::uint64_t batch_unloads = 0;

    std::uint64_t transactions() const { return loads_issued + unloads_issued; }

    friend bool operator==(const TransactionCounters&, const TransactionCounters&) = default;
};

/// Append-only record of store transactions.
class TransactionLog {
public:
    void record(const TransactionEvent& event);

    const TransactionCounters& counters() const { return counters_; }
    const std::vector<TransactionEvent>& events() const { return events_; }

    static TransactionCounters fold(std::span<const TransactionEvent> events);

private:
    TransactionCounters counters_;
    std::vector<TransactionEvent> events_;
};

/// A working-set session over a shared Map: tracks which keyframes are
/// resident and counts every load/unload as a database transaction. All
/// mutating calls are serialized internally.
class MapStore {
public:
    /// Called after every transaction with the resident count it produced.
    using Observer = std::function<void(const TransactionEvent&, std::size_t resident_count)>;

    explicit MapStore(std::shared_ptr<const Map> map);

    const Map& map() const { return *map_; }
    std::shared_ptr<const Map> shared_map() const { return map_; }

    /// One transaction for the whole roster. Throws ValidationError for an
    /// unknown zone, ContractError when any of it is already resident.
    std::vector<Keyframe> load_zone(ZoneId zone, Tick tick = 0);
    /// Throws ValidationError for an unknown id, ContractError when resident.
    Keyframe load_keyframe(KeyframeId id, Tick tick = 0);
    /// Throws ContractError unless the zone was loaded as a batch.
    void unload_zone(ZoneId zone, Tick tick = 0);
    /// Throws ContractError unless the keyframe was loaded individually.
    void unload_keyframe(KeyframeId id, Tick tick = 0);

    bool is_resident(KeyframeId id) const;
    bool is_zone_resident(ZoneId zone) const;
    std::size_t resident_count() const;
    std::uint64_t resident_bytes() const;
    std::vector<KeyframeId> resident() const;

    TransactionCounters counters() const;
    std::vector<TransactionEvent> events() const;

    void set_observer(Observer observer);

private:
    void commit(const TransactionEvent& event);

    std::shared_ptr<const Map> map_;
    mutable std::mutex mutex_;
    enum class Residency : std::uint8_t { absent, single, batch };

    std::vector<Residency> residency_;  // by slot
    std::set<ZoneId> resident_zones_;
    std::size_t resident_count_ = 0;
    std::uint64_t resident_bytes_ = 0;
    TransactionLog log_;
    Observer observer_;
};

}  // namespace zonemem
