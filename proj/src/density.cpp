#include "occmap/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "occmap/errors.hpp"
#include "occmap/traversal.hpp"

namespace occmap {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kSqrt3 = std::numbers::sqrt3;
constexpr double kPi = std::numbers::pi;

}  // namespace

SensorAngularSpec SensorAngularSpec::from_degrees(double vertical_deg, double horizontal_deg) {
  return {vertical_deg * kPi / 180.0, horizontal_deg * kPi / 180.0};
}

void SensorAngularSpec::validate() const {
  auto ok = [](double v) { return v > 0.0 && v < kPi / 2.0; };
  if (!ok(phi_s) || !ok(theta_s)) {
    throw DomainError("angular resolutions must lie in (0, pi/2) radians");
  }
}

void DensityParams::validate() const {
  spec.validate();
  if (!(omega > 0.0) || !std::isfinite(omega)) throw DomainError("density: omega must be positive");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("density: gamma must be positive");
}

double density_validity_threshold(const DensityParams& params) {
  return kSqrt3 * params.omega / 2.0 + kGeometryEpsilon;
}

double alpha(FaceCase face_case, double d, const DensityParams& params) {
  if (!(d > density_validity_threshold(params))) {
    throw DensityDomainError("alpha: distance " + std::to_string(d) +
                             " m is inside the near-field limit of the density model");
  }
  const double w = params.omega;
  double vertical_extent = w;
  double horizontal_extent = w;
  double offset = w;
  switch (face_case) {
    case FaceCase::One:
      break;
    case FaceCase::Two:
      vertical_extent = kSqrt2 * w;
      offset = kSqrt2 * w;
      break;
    case FaceCase::Three:
      vertical_extent = kSqrt3 * w;
      horizontal_extent = kSqrt2 * w;
      offset = kSqrt3 * w;
      break;
  }
  const double denom = 2.0 * d - offset;
  const double vertical = 2.0 / params.spec.phi_s * std::atan(vertical_extent / denom);
  const double horizontal = 2.0 / params.spec.theta_s * std::atan(horizontal_extent / denom);
  return vertical * horizontal;
}

EtaCounts eta(double d, const DensityParams& params) {
  if (!(d > 0.0) || !std::isfinite(d)) throw DomainError("eta: distance must be positive");
  const double w = params.omega;
  EtaCounts out;
  out.eta_total = 4.0 * kPi * d * d / (w * w);
  out.eta1 = 6.0;
  out.eta2 = std::max(0.0, 3.0 * (2.0 * kPi * d / w) - 12.0);
  out.eta3 = std::max(0.0, out.eta_total - out.eta1 - out.eta2);
  // Report the total as the sum of its parts so the partition is exact in
  // floating point; this moves it by at most one rounding step.
  if (out.eta3 > 0.0) out.eta_total = out.eta1 + out.eta2 + out.eta3;
  return out;
}

double rho(double d, const DensityParams& params) {
  const double a1 = alpha(FaceCase::One, d, params);
  const double a2 = alpha(FaceCase::Two, d, params);
  const double a3 = alpha(FaceCase::Three, d, params);
  const EtaCounts n = eta(d, params);
  return (n.eta1 * a1 + n.eta2 * a2 + n.eta3 * a3) / n.eta_total;
}

double weight(double d, const DensityParams& params) {
  if (!(d >= 0.0) || !std::isfinite(d)) throw DomainError("weight: distance must be non-negative");
  if (d <= density_validity_threshold(params)) return 1.0;
  return std::min(1.0, rho(d, params) / params.gamma);
}

WeightTable::WeightTable(const DensityParams& params, double max_distance)
    : params_(params), spacing_(params.omega / 4.0), max_distance_(max_distance) {
  params_.validate();
  if (!(max_distance > 0.0) || !std::isfinite(max_distance)) {
    throw DomainError("WeightTable: max distance must be positive");
  }
  const auto nodes = static_cast<std::size_t>(std::ceil(max_distance / spacing_)) + 1;
  values_.resize(nodes);
  for (std::size_t n = 0; n < nodes; ++n) values_[n] = weight(n * spacing_, params_);
  max_distance_ = (nodes - 1) * spacing_;
}

double WeightTable::operator()(double d) const {
  if (!(d >= 0.0) || d >= max_distance_) return weight(d, params_);
  const double pos = d / spacing_;
  const auto lo = static_cast<std::size_t>(pos);
  const double frac = pos - lo;
  return values_[lo] + frac * (values_[lo + 1] - values_[lo]);
}

}  // namespace occmap
