#include "occmap/traversal.hpp"

namespace occmap {

namespace detail {

void validate_ray(const Ray& ray, double omega) {
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw DomainError("traverse: voxel size must be positive");
  }
  if (!ray.origin.allFinite() || !ray.endpoint.allFinite()) {
    throw DomainError("traverse: non-finite ray");
  }
  if ((ray.endpoint - ray.origin).norm() == 0.0) {
    throw DomainError("traverse: zero-length ray");
  }
}

}  // namespace detail

std::vector<TraversalSegment> traverse(const Ray& ray, double omega) {
  std::vector<TraversalSegment> out;
  walk_ray(ray, omega, [&out](const TraversalSegment& seg) { out.push_back(seg); });
  return out;
}

double chord_partition_residual(const Ray& ray, double omega) {
  double total = 0.0;
  walk_ray(ray, omega, [&total](const TraversalSegment& seg) { total += seg.lambda; });
  return std::abs(total - (ray.endpoint - ray.origin).norm());
}

}  // namespace occmap
