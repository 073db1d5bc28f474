#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "occmap/density.hpp"
#include "occmap/grid.hpp"

namespace occmap {

struct SensorModelParams {
  double p_occ = 0.7;
  double p_free = 0.4;
  double p_min = 0.12;
  double p_max = 0.97;
  DensityParams density;

  /// Requires 0 < p_min < p_free < 0.5 < p_occ < p_max < 1 and valid density params.
  void validate() const;

  ClampBounds clamp() const { return {p_min, p_max}; }
};

/// Baseline: one fixed p_occ / p_free observation per cell per scan, hits
/// take priority. Method1: every segment contributes, scaled by its chord
/// and by w(d). Method2: as Method1 but hits are not scaled by w(d).
enum class UpdatePolicy { Baseline, Method1, Method2 };

enum class ObservationKind { Hit, Miss };

std::string_view to_string(UpdatePolicy policy);
/// Accepts "baseline", "m1", "m2" (also "method1", "method2").
std::optional<UpdatePolicy> parse_policy(std::string_view name);

/// Occupancy probability of a single measurement given a precomputed
/// distance weight w in [0, 1]. `lambda_prime` is ignored for misses.
///
/// Throws DomainError for negative chords, lambda > sqrt(3)*omega + eps,
/// or a hit with lambda + lambda_prime == 0.
double measurement_probability_weighted(UpdatePolicy policy, ObservationKind kind, double lambda,
                                        double lambda_prime, double w,
                                        const SensorModelParams& params);

/// As above, with w = weight(d).
double measurement_probability(UpdatePolicy policy, ObservationKind kind, double lambda,
                               double lambda_prime, double d, const SensorModelParams& params);

/// Per-cell observation counts gathered during one scan.
struct CellObservationTally {
  std::uint32_t hits = 0;
  std::uint32_t misses = 0;
};

/// Single observation a cell receives from one scan under the baseline:
/// a hit when any ray ended in it, else a miss; nothing for an empty tally.
std::optional<ObservationKind> baseline_scan_filter(const CellObservationTally& tally);

}  // namespace occmap
