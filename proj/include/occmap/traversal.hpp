#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "occmap/errors.hpp"
#include "occmap/grid.hpp"

namespace occmap {

/// Slack used by every geometric guard (metres).
inline constexpr double kGeometryEpsilon = 1e-9;

/// One sensor measurement. A hit ends at an impact; a miss ends at the
/// (possibly truncated) maximum range and carries no impact.
struct Ray {
  Point3 origin = Point3::Zero();
  Point3 endpoint = Point3::Zero();
  bool is_hit = true;
};

/// Portion of a ray inside one voxel.
///
/// `lambda` is the chord from where the ray enters the cell (or the ray
/// origin, for the sensor's own cell) to where it leaves the cell or ends.
/// For the impact cell, `lambda_prime` is the extra length the ray would
/// have covered inside the cell had it not been stopped.
struct TraversalSegment {
  VoxelKey key;
  double lambda = 0.0;
  std::optional<double> lambda_prime;
  bool terminal_hit = false;
};

namespace detail {

void validate_ray(const Ray& ray, double omega);

}  // namespace detail

/// Walks the voxels pierced by `ray` in order and calls `visit` with one
/// TraversalSegment per cell. Exact edge/corner crossings step every tied
/// axis at once, so diagonal neighbours with a zero chord are never
/// reported. The impact cell of a hit is the cell that contains the
/// endpoint under the half-open convention; it may have lambda == 0 when
/// the impact lies on its entry face.
template <class Visitor>
void walk_ray(const Ray& ray, double omega, Visitor&& visit) {
  detail::validate_ray(ray, omega);

  const Point3 delta = ray.endpoint - ray.origin;
  const double length = delta.norm();
  const Point3 dir = delta / length;

  VoxelKey key = key_from_point(ray.origin, omega);
  const VoxelKey end_key = key_from_point(ray.endpoint, omega);

  constexpr double kInf = std::numeric_limits<double>::infinity();
  int step[3];
  double t_max[3];
  auto boundary = [&](int axis) {
    const int idx = key[axis] + (step[axis] > 0 ? 1 : 0);
    return (idx * omega - ray.origin[axis]) / dir[axis];
  };
  for (int a = 0; a < 3; ++a) {
    step[a] = dir[a] > 0.0 ? 1 : (dir[a] < 0.0 ? -1 : 0);
    t_max[a] = step[a] == 0 ? kInf : boundary(a);
  }

  auto next_key = [&](double t_out) {
    VoxelKey next = key;
    for (int a = 0; a < 3; ++a) {
      if (step[a] != 0 && t_max[a] <= t_out + kGeometryEpsilon) next[a] += step[a];
    }
    return next;
  };
  auto advance = [&](double t_out) {
    for (int a = 0; a < 3; ++a) {
      if (step[a] != 0 && t_max[a] <= t_out + kGeometryEpsilon) {
        key[a] += step[a];
        t_max[a] = boundary(a);
      }
    }
  };
  auto emit_final = [&](double t_in, double t_out) {
    TraversalSegment seg{key, std::max(0.0, length - t_in), std::nullopt, ray.is_hit};
    if (ray.is_hit) seg.lambda_prime = std::max(0.0, t_out - length);
    visit(static_cast<const TraversalSegment&>(seg));
  };

  // Upper bound on visited cells: one per crossed boundary plus the start.
  const double budget = 3.0 * (length / omega + 2.0) + 8.0;
  double t_in = 0.0;
  for (double steps = 0; steps < budget; ++steps) {
    const double t_out = std::min({t_max[0], t_max[1], t_max[2]});

    if (t_out > length + kGeometryEpsilon) {
      emit_final(t_in, t_out);
      return;
    }

    if (t_out >= length - kGeometryEpsilon) {
      // Endpoint lies on this cell's exit boundary.
      const VoxelKey next = next_key(t_out);
      if (ray.is_hit && next == end_key && !(key == end_key)) {
        const double chord = std::min(t_out, length) - t_in;
        if (chord > 0.0) visit(TraversalSegment{key, chord, std::nullopt, false});
        advance(t_out);
        t_in = std::min(t_out, length);
        const double exit_t = std::min({t_max[0], t_max[1], t_max[2]});
        emit_final(t_in, exit_t);
        return;
      }
      if (ray.is_hit) {
        emit_final(t_in, t_out);
      } else {
        visit(TraversalSegment{key, length - t_in, std::nullopt, false});
      }
      return;
    }

    const double chord = t_out - t_in;
    if (chord > 0.0) visit(TraversalSegment{key, chord, std::nullopt, false});
    advance(t_out);
    t_in = t_out;
  }
  throw std::logic_error("walk_ray: traversal exceeded its step budget");
}

/// Ordered voxel segments along `ray`.
///
/// Throws DomainError for a zero-length or non-finite ray or omega <= 0.
std::vector<TraversalSegment> traverse(const Ray& ray, double omega);

/// |sum of lambda - ray length|; lambda_prime is not included.
double chord_partition_residual(const Ray& ray, double omega);

}  // namespace occmap
