#include "occmap/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "occmap/errors.hpp"

namespace occmap {

namespace {

std::int32_t floor_index(double coordinate, double omega) {
  const double cell = std::floor(coordinate / omega);
  if (cell < static_cast<double>(std::numeric_limits<std::int32_t>::min()) ||
      cell > static_cast<double>(std::numeric_limits<std::int32_t>::max())) {
    throw DomainError("key_from_point: coordinate outside the addressable grid");
  }
  return static_cast<std::int32_t>(cell);
}

}  // namespace

VoxelKey key_from_point(const Point3& p, double omega) {
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw DomainError("key_from_point: voxel size must be positive");
  }
  if (!p.allFinite()) {
    throw DomainError("key_from_point: non-finite point");
  }
  return {floor_index(p.x(), omega), floor_index(p.y(), omega), floor_index(p.z(), omega)};
}

Point3 voxel_center(const VoxelKey& key, double omega) {
  return {(key.i + 0.5) * omega, (key.j + 0.5) * omega, (key.k + 0.5) * omega};
}

double log_odds(double probability) { return std::log(probability / (1.0 - probability)); }

double logistic(double log_odds_value) { return 1.0 / (1.0 + std::exp(-log_odds_value)); }

void GridConfig::validate() const {
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) {
    throw DomainError("grid: voxel size must be positive, got " + std::to_string(voxel_size));
  }
  if (!(prior > 0.0 && prior < 1.0)) {
    throw DomainError("grid: prior must lie in (0, 1), got " + std::to_string(prior));
  }
}

void ClampBounds::validate() const {
  if (!(p_min > 0.0 && p_min < p_max && p_max < 1.0)) {
    throw DomainError("clamp bounds must satisfy 0 < p_min < p_max < 1");
  }
}

OccupancyMap::OccupancyMap(GridConfig config, ClampBounds clamp)
    : config_(config), clamp_(clamp) {
  config_.validate();
  clamp_.validate();
  if (!(clamp_.p_min <= config_.prior && config_.prior <= clamp_.p_max)) {
    throw DomainError("grid: prior must lie inside the clamp bounds");
  }
  prior_log_odds_ = log_odds(config_.prior);
  min_log_odds_ = log_odds(clamp_.p_min);
  max_log_odds_ = log_odds(clamp_.p_max);
}

OccupancyMap::ApplyResult OccupancyMap::apply_log_odds(const VoxelKey& key, double delta) {
  if (!std::isfinite(delta)) {
    throw DomainError("apply_log_odds: non-finite log-odds increment");
  }
  auto [it, inserted] = cells_.try_emplace(key, CellState{prior_log_odds_});
  const double raw = it->second.log_odds + delta;
  const double clamped = std::clamp(raw, min_log_odds_, max_log_odds_);
  it->second.log_odds = clamped;
  return {clamped, clamped != raw};
}

double OccupancyMap::occupancy(const VoxelKey& key) const {
  const auto it = cells_.find(key);
  if (it == cells_.end()) return config_.prior;
  return probability_of(it->second.log_odds);
}

double OccupancyMap::probability_of(double l) const {
  // Report the bounds themselves at saturation instead of a rounded round-trip.
  if (l == max_log_odds_) return clamp_.p_max;
  if (l == min_log_odds_) return clamp_.p_min;
  if (l == prior_log_odds_) return config_.prior;
  return logistic(l);
}

const CellState* OccupancyMap::find(const VoxelKey& key) const {
  const auto it = cells_.find(key);
  return it == cells_.end() ? nullptr : &it->second;
}

std::vector<std::pair<VoxelKey, double>> OccupancyMap::occupied_cells(double threshold) const {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw DomainError("occupied_cells: threshold must lie in (0, 1)");
  }
  std::vector<std::pair<VoxelKey, double>> out;
  for (const auto& [key, state] : cells_) {
    const double p = probability_of(state.log_odds);
    if (p > threshold) out.emplace_back(key, p);
  }
  return out;
}

}  // namespace occmap
