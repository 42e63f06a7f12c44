#pragma once

#include <zonemem/ids.hpp>

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace zonemem {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

/// Wraps an angle into [-pi, pi). Values already in range are returned unchanged.
double normalize_heading(double radians);

struct Pose {
    Point2 position;
    double heading = 0.0;  // radians, [-pi, pi)

    Pose() = default;
    Pose(Point2 p, double theta) : position(p), heading(normalize_heading(theta)) {}

    friend bool operator==(const Pose&, const Pose&) = default;
};

double distance(Point2 a, Point2 b);
double distance_to_segment(Point2 p, Point2 a, Point2 b);

/// True iff p is inside the polygon or on its boundary.
bool point_in_polygon(Point2 p, std::span<const Point2> polygon);

/// Named simple polygon, stored counter-clockwise.
class Zone {
public:
    /// Validates the outline and reorients clockwise input. Throws
    /// ValidationError for fewer than 3 vertices, non-finite coordinates,
    /// zero area, repeated consecutive vertices, or self-intersection.
    Zone(ZoneId id, std::string name, std::vector<Point2> polygon);

    ZoneId id() const { return id_; }
    const std::string& name() const { return name_; }
    const std::vector<Point2>& polygon() const { return polygon_; }

    bool contains(Point2 p) const;
    double signed_area() const;
    Point2 centroid() const;
    /// Euclidean distance from p to the nearest point of the outline.
    double boundary_distance(Point2 p) const;

    Point2 min_corner() const { return min_; }
    Point2 max_corner() const { return max_; }

    friend bool operator==(const Zone& a, const Zone& b) {
        return a.id_ == b.id_ && a.name_ == b.name_ && a.polygon_ == b.polygon_;
    }

private:
    ZoneId id_;
    std::string name_;
    std::vector<Point2> polygon_;
    Point2 min_;
    Point2 max_;
};

/// Immutable collection of zones sorted by ascending id.
class ZoneSet {
public:
    ZoneSet() = default;
    /// Throws ValidationError on duplicate ids.
    explicit ZoneSet(std::vector<Zone> zones);

    const std::vector<Zone>& zones() const { return zones_; }
    std::size_t size() const { return zones_.size(); }
    bool empty() const { return zones_.empty(); }

    bool contains(ZoneId id) const;
    /// Throws ValidationError for an unknown id.
    const Zone& at(ZoneId id) const;
    std::optional<ZoneId> find_by_name(const std::string& name) const;

    /// Containing zone with the smallest id, or nullopt when no zone contains p.
    std::optional<ZoneId> locate(Point2 p) const;
    std::optional<ZoneId> locate(const Pose& pose) const { return locate(pose.position); }

    /// Zone whose outline is nearest to p; lowest id on ties.
    ZoneId nearest(Point2 p) const;

    friend bool operator==(const ZoneSet&, const ZoneSet&) = default;

private:
    std::vector<Zone> zones_;
};

inline constexpr double kDefaultRouteStep = 0.25;

/// Samples each route segment every `step` meters (both endpoints included),
/// locates every sample, drops samples outside all zones and collapses
/// consecutive repeats. Throws ValidationError for an empty route or step <= 0.
std::vector<ZoneId> predict_route_zones(std::span<const Point2> route, const ZoneSet& zones,
                                        double step = kDefaultRouteStep);

/// Appends `next` to `seq`, skipping a leading element equal to seq.back().
void append_collapsed(std::vector<ZoneId>& seq, std::span<const ZoneId> next);

/// Canonical `zones.json` text (trailing newline included).
std::string serialize_zones(const ZoneSet& zones);
/// Parses `zones.json` text; `source` names the file in error messages.
ZoneSet parse_zones(const std::string& text, const std::string& source = "zones.json");
ZoneSet read_zones(const std::filesystem::path& path);

}  // namespace zonemem
