#pragma once

// Small hand-built maps shared by the unit and acceptance suites.

#include <zonemem/map_store.hpp>
#include <zonemem/zone_model.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

using namespace zonemem;

inline Zone rect(std::uint32_t id, double x0, double y0, double x1, double y1, std::string name = {}) {
    if (name.empty()) name = "z" + std::to_string(id);
    return Zone(ZoneId{id}, std::move(name), {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

inline std::vector<Point2> unit_square() { return {{0, 0}, {1, 0}, {1, 1}, {0, 1}}; }

/// Zones 0..n-1 laid out as 2x1 m cells along x; zone i holds counts[i]
/// keyframes on its midline, strictly inside. Keyframe ids are dense.
inline std::shared_ptr<const Map> strip_map(const std::vector<std::size_t>& counts,
                                            std::uint64_t payload_bytes = 100) {
    std::vector<Zone> zones;
    std::vector<Keyframe> kfs;
    for (std::uint32_t i = 0; i < counts.size(); ++i) {
        const double x0 = 2.0 * i;
        zones.push_back(rect(i, x0, 0.0, x0 + 2.0, 1.0));
        for (std::size_t j = 0; j < counts[i]; ++j) {
            Keyframe kf;
            kf.id = KeyframeId{static_cast<std::uint32_t>(kfs.size())};
            kf.pose = Pose({x0 + 0.5 + static_cast<double>(j) / static_cast<double>(counts[i] + 1), 0.5}, 0.0);
            kf.payload_bytes = payload_bytes;
            kf.payload_seed = 1000 + kf.id.value;
            kfs.push_back(kf);
        }
    }
    return std::make_shared<const Map>(ZoneSet(std::move(zones)), std::move(kfs));
}

/// A pose in the middle of strip_map zone i.
inline Pose strip_pose(std::uint32_t zone) { return Pose({2.0 * zone + 1.0, 0.5}, 0.0); }

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("zonemem_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace fixtures
