#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>

namespace zonemem {

/// Integer identifier tagged by what it names, so zone and keyframe ids
/// cannot be mixed up.
template <class Tag>
struct Id {
    std::uint32_t value = 0;

    constexpr Id() = default;
    constexpr explicit Id(std::uint32_t v) : value(v) {}

    friend constexpr auto operator<=>(Id, Id) = default;

    friend std::ostream& operator<<(std::ostream& os, Id id) { return os << id.value; }
};

using ZoneId = Id<struct ZoneTag>;
using KeyframeId = Id<struct KeyframeTag>;

/// Integer simulation step. Recency is measured in ticks, never wall-clock.
using Tick = std::int64_t;

}  // namespace zonemem

template <class Tag>
struct std::hash<zonemem::Id<Tag>> {
    std::size_t operator()(zonemem::Id<Tag> id) const noexcept {
        return std::hash<std::uint32_t>{}(id.value);
    }
};
