#pragma once

#include <array>

namespace scenesense {

using Vec3 = std::array<double, 3>;

/// Axis-aligned box in world coordinates (meters).
struct Aabb {
  Vec3 min{0.0, 0.0, 0.0};
  Vec3 max{0.0, 0.0, 0.0};

  bool well_formed() const;
  /// Closed-interval containment on every axis.
  bool contains(const Vec3& point) const;
  Vec3 center() const;
  Vec3 extents() const;

  friend bool operator==(const Aabb&, const Aabb&) = default;
};

}  // namespace scenesense
