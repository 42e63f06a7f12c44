#pragma once

// Independent reference implementations. They share no code with the
// library beyond plain data types, so agreement is meaningful.

#include <zonemem/zone_model.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

namespace oracles {

using zonemem::Point2;

/// Distance from p to segment ab, computed by dense parametric search
/// refined with the closed-form projection.
inline double segment_distance(Point2 p, Point2 a, Point2 b) {
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

/// Winding number of the closed polygon around p (Sunday's algorithm).
/// Nonzero means inside; points on the boundary are reported separately.
inline int winding_number(Point2 p, const std::vector<Point2>& poly) {
    auto is_left = [](Point2 a, Point2 b, Point2 c) {
        return (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    };
    int wn = 0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point2 a = poly[i];
        const Point2 b = poly[(i + 1) % poly.size()];
        if (a.y <= p.y) {
            if (b.y > p.y && is_left(a, b, p) > 0) ++wn;
        } else {
            if (b.y <= p.y && is_left(a, b, p) < 0) --wn;
        }
    }
    return wn;
}

inline double boundary_distance(Point2 p, const std::vector<Point2>& poly) {
    double best = INFINITY;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        best = std::min(best, segment_distance(p, poly[i], poly[(i + 1) % poly.size()]));
    }
    return best;
}

/// Zone sequence of a route sampled every `step`, collapsed.
inline std::vector<std::uint32_t> sampled_zones(const std::vector<Point2>& route,
                                                const zonemem::ZoneSet& zones, double step) {
    std::vector<std::uint32_t> out;
    auto visit = [&](Point2 p) {
        std::optional<std::uint32_t> hit;
        for (const auto& z : zones.zones()) {
            const auto& poly = z.polygon();
            if (winding_number(p, poly) != 0 || boundary_distance(p, poly) < 1e-9) {
                if (!hit || z.id().value < *hit) hit = z.id().value;
            }
        }
        if (hit && (out.empty() || out.back() != *hit)) out.push_back(*hit);
    };
    visit(route.front());
    for (std::size_t i = 0; i + 1 < route.size(); ++i) {
        const Point2 a = route[i];
        const Point2 b = route[i + 1];
        const double len = std::hypot(b.x - a.x, b.y - a.y);
        const auto n = static_cast<std::size_t>(std::ceil(len / step));
        for (std::size_t k = 0; k <= n; ++k) {
            const double f = n == 0 ? 1.0 : std::min(1.0, static_cast<double>(k) / static_cast<double>(n));
            visit({a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)});
        }
    }
    return out;
}

/// Brute-force interpreter of the zone working set: a list of
/// (zone, last_access) pairs scanned linearly. The current zone is never
/// evicted; among the rest the smallest access tick goes first, ties by id.
struct LruInterpreter {
    struct Entry {
        std::uint32_t zone;
        std::int64_t last;
    };
    struct Step {
        std::vector<std::uint32_t> evicted;  // in order
        bool loaded = false;
        bool over_budget = false;
    };

    std::vector<std::size_t> sizes;  // keyframes per zone
    std::size_t k_max;
    std::vector<Entry> active;
    std::optional<std::uint32_t> current;

    std::size_t resident() const {
        std::size_t n = 0;
        for (const Entry& e : active) n += sizes[e.zone];
        return n;
    }

    Step visit(std::uint32_t zone, std::int64_t tick) {
        Step step;
        if (current && *current == zone) {
            touch(zone, tick);
            return step;
        }
        current = zone;
        const bool present = std::any_of(active.begin(), active.end(),
                                         [&](const Entry& e) { return e.zone == zone; });
        if (present) {
            touch(zone, tick);
            return step;
        }
        while (resident() + sizes[zone] > k_max) {
            std::optional<std::size_t> pick;
            for (std::size_t i = 0; i < active.size(); ++i) {
                if (active[i].zone == zone) continue;
                if (!pick || active[i].last < active[*pick].last ||
                    (active[i].last == active[*pick].last && active[i].zone < active[*pick].zone)) {
                    pick = i;
                }
            }
            if (!pick) break;
            step.evicted.push_back(active[*pick].zone);
            active.erase(active.begin() + static_cast<std::ptrdiff_t>(*pick));
        }
        active.push_back({zone, tick});
        step.loaded = true;
        step.over_budget = resident() > k_max;
        return step;
    }

    void touch(std::uint32_t zone, std::int64_t tick) {
        for (Entry& e : active) {
            if (e.zone == zone) e.last = tick;
        }
    }
};

}  // namespace oracles
