#include "scenesense/geometry.hpp"

namespace scenesense {

bool Aabb::well_formed() const {
  for (int i = 0; i < 3; ++i) {
    if (!(min[i] <= max[i])) return false;
  }
  return true;
}

bool Aabb::contains(const Vec3& point) const {
  for (int i = 0; i < 3; ++i) {
    if (point[i] < min[i] || point[i] > max[i]) return false;
  }
  return true;
}

Vec3 Aabb::center() const {
  return {0.5 * (min[0] + max[0]), 0.5 * (min[1] + max[1]), 0.5 * (min[2] + max[2])};
}

Vec3 Aabb::extents() const {
  return {max[0] - min[0], max[1] - min[1], max[2] - min[2]};
}

}  // namespace scenesense
