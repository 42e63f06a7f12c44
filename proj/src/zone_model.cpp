#include <zonemem/zone_model.hpp>

#include <zonemem/error.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace zonemem {

namespace {

// Points closer than this to an edge count as on the boundary.
constexpr double kBoundaryEps = 1e-9;

double cross(Point2 o, Point2 a, Point2 b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

int orientation(Point2 o, Point2 a, Point2 b) {
    const double c = cross(o, a, b);
    return (c > 0.0) - (c < 0.0);
}

bool within_box(Point2 p, Point2 a, Point2 b) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
}

bool segments_intersect(Point2 p1, Point2 p2, Point2 q1, Point2 q2) {
    const int o1 = orientation(p1, p2, q1);
    const int o2 = orientation(p1, p2, q2);
    const int o3 = orientation(q1, q2, p1);
    const int o4 = orientation(q1, q2, p2);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && within_box(q1, p1, p2)) return true;
    if (o2 == 0 && within_box(q2, p1, p2)) return true;
    if (o3 == 0 && within_box(p1, q1, q2)) return true;
    if (o4 == 0 && within_box(p2, q1, q2)) return true;
    return false;
}

double polygon_signed_area(std::span<const Point2> poly) {
    double twice = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point2 a = poly[i];
        const Point2 b = poly[(i + 1) % poly.size()];
        twice += a.x * b.y - b.x * a.y;
    }
    return 0.5 * twice;
}

void validate_outline(const std::vector<Point2>& poly, const std::string& label) {
    if (poly.size() < 3) {
        throw ValidationError(label + ": polygon needs at least 3 vertices, got " +
                              std::to_string(poly.size()));
    }
    for (const Point2& p : poly) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw ValidationError(label + ": polygon has a non-finite vertex");
        }
    }
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (poly[i] == poly[(i + 1) % n]) {
            throw ValidationError(label + ": polygon repeats vertex " + std::to_string(i));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 a1 = poly[i];
        const Point2 a2 = poly[(i + 1) % n];
        // Adjacent edges share a vertex; they only conflict when they fold back.
        const Point2 a3 = poly[(i + 2) % n];
        if (orientation(a1, a2, a3) == 0) {
            const double dot = (a2.x - a1.x) * (a3.x - a2.x) + (a2.y - a1.y) * (a3.y - a2.y);
            if (dot < 0.0) {
                throw ValidationError(label + ": polygon is self-intersecting (edge " +
                                      std::to_string(i) + " folds back)");
            }
        }
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;
            if (segments_intersect(a1, a2, poly[j], poly[(j + 1) % n])) {
                throw ValidationError(label + ": polygon is self-intersecting (edges " +
                                      std::to_string(i) + " and " + std::to_string(j) + ")");
            }
        }
    }
    if (polygon_signed_area(poly) == 0.0) {
        throw ValidationError(label + ": polygon has zero area");
    }
}

}  // namespace

double normalize_heading(double radians) {
    constexpr double pi = std::numbers::pi;
    if (radians >= -pi && radians < pi) return radians;
    double wrapped = std::fmod(radians + pi, 2.0 * pi);
    if (wrapped < 0.0) wrapped += 2.0 * pi;
    wrapped -= pi;
    return wrapped >= pi ? -pi : wrapped;
}

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

double distance_to_segment(Point2 p, Point2 a, Point2 b) {
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    if (len2 == 0.0) return distance(p, a);
    const double t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
    return distance(p, Point2{a.x + t * dx, a.y + t * dy});
}

bool point_in_polygon(Point2 p, std::span<const Point2> polygon) {
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (distance_to_segment(p, polygon[i], polygon[(i + 1) % n]) <= kBoundaryEps) return true;
    }
    // Even-odd crossing count on a horizontal ray towards +x.
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2 a = polygon[i];
        const Point2 b = polygon[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x_at = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x_at) inside = !inside;
        }
    }
    return inside;
}

Zone::Zone(ZoneId id, std::string name, std::vector<Point2> polygon)
    : id_(id), name_(std::move(name)), polygon_(std::move(polygon)) {
    validate_outline(polygon_, "zone " + std::to_string(id_.value));
    if (polygon_signed_area(polygon_) < 0.0) std::reverse(polygon_.begin(), polygon_.end());
    min_ = max_ = polygon_.front();
    for (const Point2& p : polygon_) {
        min_ = {std::min(min_.x, p.x), std::min(min_.y, p.y)};
        max_ = {std::max(max_.x, p.x), std::max(max_.y, p.y)};
    }
}

bool Zone::contains(Point2 p) const {
    if (p.x < min_.x - kBoundaryEps || p.x > max_.x + kBoundaryEps || p.y < min_.y - kBoundaryEps ||
        p.y > max_.y + kBoundaryEps) {
        return false;
    }
    return point_in_polygon(p, polygon_);
}

double Zone::signed_area() const { return polygon_signed_area(polygon_); }

Point2 Zone::centroid() const {
    const std::size_t n = polygon_.size();
    double cx = 0.0;
    double cy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 a = polygon_[i];
        const Point2 b = polygon_[(i + 1) % n];
        const double w = a.x * b.y - b.x * a.y;
        cx += (a.x + b.x) * w;
        cy += (a.y + b.y) * w;
    }
    const double six_area = 6.0 * signed_area();
    return {cx / six_area, cy / six_area};
}

double Zone::boundary_distance(Point2 p) const {
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = polygon_.size();
    for (std::size_t i = 0; i < n; ++i) {
        best = std::min(best, distance_to_segment(p, polygon_[i], polygon_[(i + 1) % n]));
    }
    return best;
}

ZoneSet::ZoneSet(std::vector<Zone> zones) : zones_(std::move(zones)) {
    std::sort(zones_.begin(), zones_.end(),
              [](const Zone& a, const Zone& b) { return a.id() < b.id(); });
    for (std::size_t i = 1; i < zones_.size(); ++i) {
        if (zones_[i - 1].id() == zones_[i].id()) {
            throw ValidationError("duplicate zone id " + std::to_string(zones_[i].id().value));
        }
    }
}

bool ZoneSet::contains(ZoneId id) const {
    const auto it = std::lower_bound(zones_.begin(), zones_.end(), id,
                                     [](const Zone& z, ZoneId v) { return z.id() < v; });
    return it != zones_.end() && it->id() == id;
}

const Zone& ZoneSet::at(ZoneId id) const {
    const auto it = std::lower_bound(zones_.begin(), zones_.end(), id,
                                     [](const Zone& z, ZoneId v) { return z.id() < v; });
    if (it == zones_.end() || it->id() != id) {
        throw ValidationError("unknown zone id " + std::to_string(id.value));
    }
    return *it;
}

std::optional<ZoneId> ZoneSet::find_by_name(const std::string& name) const {
    for (const Zone& z : zones_) {
        if (z.name() == name) return z.id();
    }
    return std::nullopt;
}

std::optional<ZoneId> ZoneSet::locate(Point2 p) const {
    for (const Zone& z : zones_) {
        if (z.contains(p)) return z.id();
    }
    return std::nullopt;
}

ZoneId ZoneSet::nearest(Point2 p) const {
    if (zones_.empty()) throw ValidationError("nearest zone requested from an empty zone set");
    ZoneId best = zones_.front().id();
    double best_d = std::numeric_limits<double>::infinity();
    for (const Zone& z : zones_) {
        const double d = z.boundary_distance(p);
        if (d < best_d) {
            best_d = d;
            best = z.id();
        }
    }
    return best;
}

void append_collapsed(std::vector<ZoneId>& seq, std::span<const ZoneId> next) {
    for (ZoneId z : next) {
        if (seq.empty() || seq.back() != z) seq.push_back(z);
    }
}

std::vector<ZoneId> predict_route_zones(std::span<const Point2> route, const ZoneSet& zones,
                                        double step) {
    if (route.empty()) throw ValidationError("route needs at least one waypoint");
    if (!(step > 0.0)) throw ValidationError("route sampling step must be positive");

    std::vector<ZoneId> out;
    auto visit = [&](Point2 p) {
        if (const auto z = zones.locate(p)) {
            if (out.empty() || out.back() != *z) out.push_back(*z);
        }
    };
    if (route.size() == 1) {
        visit(route.front());
        return out;
    }
    for (std::size_t i = 0; i + 1 < route.size(); ++i) {
        const Point2 a = route[i];
        const Point2 b = route[i + 1];
        const double len = distance(a, b);
        visit(a);
        for (std::size_t k = 1; static_cast<double>(k) * step < len; ++k) {
            const double f = static_cast<double>(k) * step / len;
            visit(Point2{a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)});
        }
        visit(b);
    }
    return out;
}

std::string serialize_zones(const ZoneSet& zones) {
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const Zone& z : zones.zones()) {
        nlohmann::ordered_json poly = nlohmann::ordered_json::array();
        for (const Point2& p : z.polygon()) poly.push_back({p.x, p.y});
        nlohmann::ordered_json entry;
        entry["id"] = z.id().value;
        entry["name"] = z.name();
        entry["polygon"] = std::move(poly);
        list.push_back(std::move(entry));
    }
    nlohmann::ordered_json doc;
    doc["zones"] = std::move(list);
    return doc.dump() + "\n";
}

ZoneSet parse_zones(const std::string& text, const std::string& source) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(source + ": invalid JSON: " + e.what());
    }
    if (!doc.is_object() || !doc.contains("zones") || !doc["zones"].is_array()) {
        throw FormatError(source + ": missing array field \"zones\"");
    }
    std::vector<Zone> zones;
    const auto& list = doc["zones"];
    for (std::size_t i = 0; i < list.size(); ++i) {
        const auto& entry = list[i];
        const std::string where = source + ": zones[" + std::to_string(i) + "]";
        if (!entry.is_object()) throw FormatError(where + ": expected object");
        if (!entry.contains("id") || !entry["id"].is_number_unsigned() ||
            entry["id"].get<std::uint64_t>() > UINT32_MAX) {
            throw FormatError(where + ".id: expected non-negative integer");
        }
        if (!entry.contains("name") || !entry["name"].is_string()) {
            throw FormatError(where + ".name: expected string");
        }
        if (!entry.contains("polygon") || !entry["polygon"].is_array()) {
            throw FormatError(where + ".polygon: expected array of [x,y] pairs");
        }
        std::vector<Point2> poly;
        for (const auto& v : entry["polygon"]) {
            if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
                throw FormatError(where + ".polygon: expected array of [x,y] pairs");
            }
            poly.push_back({v[0].get<double>(), v[1].get<double>()});
        }
        try {
            zones.emplace_back(ZoneId{entry["id"].get<std::uint32_t>()},
                               entry["name"].get<std::string>(), std::move(poly));
        } catch (const ValidationError& e) {
            throw FormatError(where + ".polygon: " + e.what());
        }
    }
    try {
        return ZoneSet(std::move(zones));
    } catch (const ValidationError& e) {
        throw FormatError(source + ": " + e.what());
    }
}

ZoneSet read_zones(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path.string() + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_zones(buf.str(), path.string());
}

}  // namespace zonemem
