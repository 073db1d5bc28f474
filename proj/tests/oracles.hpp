#pragma once

// Reference computations used by the tests. They share no code path with
// the library beyond key_from_point, which defines the cell partition.

#include <cmath>
#include <map>
#include <random>
#include <span>
#include <vector>

#include "occmap/grid.hpp"
#include "occmap/traversal.hpp"

namespace occmap::oracle {

/// Per-cell chord lengths from uniform sampling of the segment, with every
/// key change between neighbouring samples located by bisection (to about
/// 1e-14 of the ray parameter). A line meets a convex cell in one interval,
/// so two samples with the same key bracket no other cell.
inline std::map<VoxelKey, double> sampled_chords(const Ray& ray, double omega,
                                                 std::size_t samples = 100000) {
  const Point3 o = ray.origin;
  const Point3 delta = ray.endpoint - ray.origin;
  const double length = delta.norm();
  auto key_at = [&](double s) { return key_from_point(o + s * delta, omega); };

  std::vector<double> transitions;
  auto refine = [&](auto&& self, double a, const VoxelKey& ka, double b, const VoxelKey& kb) -> void {
    if (ka == kb) return;
    if (b - a < 1e-14) {
      transitions.push_back(0.5 * (a + b));
      return;
    }
    const double m = 0.5 * (a + b);
    const VoxelKey km = key_at(m);
    self(self, a, ka, m, km);
    self(self, m, km, b, kb);
  };

  VoxelKey prev = key_at(0.0);
  double prev_s = 0.0;
  for (std::size_t n = 1; n <= samples; ++n) {
    const double s = static_cast<double>(n) / static_cast<double>(samples);
    const VoxelKey k = key_at(s);
    refine(refine, prev_s, prev, s, k);
    prev = k;
    prev_s = s;
  }

  std::vector<double> cuts{0.0};
  cuts.insert(cuts.end(), transitions.begin(), transitions.end());
  cuts.push_back(1.0);
  std::map<VoxelKey, double> chords;
  for (std::size_t n = 0; n + 1 < cuts.size(); ++n) {
    const double span = cuts[n + 1] - cuts[n];
    if (span <= 0.0) continue;
    chords[key_at(0.5 * (cuts[n] + cuts[n + 1]))] += span * length;
  }
  return chords;
}

/// Recursive binary Bayes filter written with odds products, uniform map prior.
inline double iterate_bayes(double start, std::span<const double> observations) {
  double p = start;
  for (const double z : observations) {
    p = 1.0 / (1.0 + (1.0 - p) / p * ((1.0 - z) / z));
  }
  return p;
}

inline Point3 random_point(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

inline Point3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Point3 v;
  do {
    v = {n(rng), n(rng), n(rng)};
  } while (v.norm() < 1e-6);
  return v.normalized();
}

}  // namespace occmap::oracle
