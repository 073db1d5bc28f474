#include "occmap/sensor_model.hpp"

#include <cmath>
#include <numbers>

#include "occmap/errors.hpp"
#include "occmap/traversal.hpp"

namespace occmap {

void SensorModelParams::validate() const {
  if (!(0.0 < p_min && p_min < p_free && p_free < 0.5 && 0.5 < p_occ && p_occ < p_max &&
        p_max < 1.0)) {
    throw DomainError(
        "sensor model: probabilities must satisfy 0 < p_min < p_free < 0.5 < p_occ < p_max < 1");
  }
  density.validate();
}

std::string_view to_string(UpdatePolicy policy) {
  switch (policy) {
    case UpdatePolicy::Baseline:
      return "baseline";
    case UpdatePolicy::Method1:
      return "m1";
    case UpdatePolicy::Method2:
      return "m2";
  }
  return "unknown";
}

std::optional<UpdatePolicy> parse_policy(std::string_view name) {
  if (name == "baseline") return UpdatePolicy::Baseline;
  if (name == "m1" || name == "method1") return UpdatePolicy::Method1;
  if (name == "m2" || name == "method2") return UpdatePolicy::Method2;
  return std::nullopt;
}

double measurement_probability_weighted(UpdatePolicy policy, ObservationKind kind, double lambda,
                                        double lambda_prime, double w,
                                        const SensorModelParams& params) {
  const double max_chord = std::numbers::sqrt3 * params.density.omega;
  if (!(lambda >= 0.0)) throw DomainError("measurement_probability: negative chord");
  if (lambda > max_chord + kGeometryEpsilon) {
    throw DomainError("measurement_probability: chord exceeds the voxel diagonal");
  }
  if (!(w >= 0.0 && w <= 1.0)) throw DomainError("measurement_probability: weight outside [0, 1]");

  if (kind == ObservationKind::Miss) {
    if (policy == UpdatePolicy::Baseline) return params.p_free;
    const double ratio = std::min(1.0, lambda / max_chord);
    return 0.5 - (0.5 - params.p_free) * ratio * w;
  }

  if (!(lambda_prime >= 0.0)) throw DomainError("measurement_probability: negative residual chord");
  const double full = lambda + lambda_prime;
  if (!(full > 0.0)) throw DomainError("measurement_probability: hit with zero total chord");
  if (full > max_chord + kGeometryEpsilon) {
    throw DomainError("measurement_probability: hit chord exceeds the voxel diagonal");
  }
  if (policy == UpdatePolicy::Baseline) return params.p_occ;
  const double excursion = (params.p_occ - 0.5) * (lambda_prime / full);
  return policy == UpdatePolicy::Method1 ? 0.5 + excursion * w : 0.5 + excursion;
}

double measurement_probability(UpdatePolicy policy, ObservationKind kind, double lambda,
                               double lambda_prime, double d, const SensorModelParams& params) {
  return measurement_probability_weighted(policy, kind, lambda, lambda_prime,
                                          weight(d, params.density), params);
}

std::optional<ObservationKind> baseline_scan_filter(const CellObservationTally& tally) {
  if (tally.hits > 0) return ObservationKind::Hit;
  if (tally.misses > 0) return ObservationKind::Miss;
  return std::nullopt;
}

}  // namespace occmap
