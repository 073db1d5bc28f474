#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <absl/container/flat_hash_map.h>

namespace occmap {

using Point3 = Eigen::Vector3d;

/// Integer cell coordinate of a voxel with edge length omega.
/// Cell (i, j, k) covers [i*omega, (i+1)*omega) x ... (half-open).
struct VoxelKey {
  std::int32_t i = 0;
  std::int32_t j = 0;
  std::int32_t k = 0;

  friend bool operator==(const VoxelKey&, const VoxelKey&) = default;
  friend auto operator<=>(const VoxelKey&, const VoxelKey&) = default;

  VoxelKey operator+(const VoxelKey& o) const { return {i + o.i, j + o.j, k + o.k}; }
  std::int32_t operator[](int axis) const { return axis == 0 ? i : (axis == 1 ? j : k); }
  std::int32_t& operator[](int axis) { return axis == 0 ? i : (axis == 1 ? j : k); }

  template <typename H>
  friend H AbslHashValue(H h, const VoxelKey& key) {
    return H::combine(std::move(h), key.i, key.j, key.k);
  }
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& key) const noexcept {
    // Large odd multipliers spread neighbouring cells across buckets.
    std::uint64_t h = static_cast<std::uint32_t>(key.i) * 0x9E3779B185EBCA87ULL;
    h ^= static_cast<std::uint32_t>(key.j) * 0xC2B2AE3D27D4EB4FULL;
    h ^= static_cast<std::uint32_t>(key.k) * 0x165667B19E3779F9ULL;
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

/// Throws DomainError for omega <= 0 or a non-finite point.
VoxelKey key_from_point(const Point3& p, double omega);

Point3 voxel_center(const VoxelKey& key, double omega);

/// Natural-log odds ln(p / (1 - p)).
double log_odds(double probability);
/// Inverse of log_odds.
double logistic(double log_odds_value);

struct GridConfig {
  double voxel_size = 0.2;
  double prior = 0.5;

  /// Throws DomainError unless voxel_size > 0 and prior in (0, 1).
  void validate() const;
};

/// Occupancy probability bounds; stored cells never leave [p_min, p_max].
struct ClampBounds {
  double p_min = 0.12;
  double p_max = 0.97;

  void validate() const;
};

struct CellState {
  double log_odds = 0.0;
};

/// Sparse voxel map holding clamped log-odds occupancy state.
///
/// Reads may run concurrently when no writer is active; writes must be
/// serialized by the caller.
class OccupancyMap {
 public:
  using Storage = absl::flat_hash_map<VoxelKey, CellState>;

  explicit OccupancyMap(GridConfig config = {}, ClampBounds clamp = {});

  const GridConfig& config() const { return config_; }
  const ClampBounds& clamp() const { return clamp_; }
  double voxel_size() const { return config_.voxel_size; }
  double prior_log_odds() const { return prior_log_odds_; }
  double min_log_odds() const { return min_log_odds_; }
  double max_log_odds() const { return max_log_odds_; }

  struct ApplyResult {
    double log_odds;
    bool clamped;
  };

  /// Adds delta to the cell's log-odds (absent cells start at the prior)
  /// and clamps the result. Throws DomainError for non-finite delta.
  ApplyResult apply_log_odds(const VoxelKey& key, double delta);

  /// Posterior probability; unobserved keys report the prior.
  double occupancy(const VoxelKey& key) const;

  /// Stored log-odds, or nullptr if the cell has never been updated. The
  /// pointer is invalidated by the next update.
  const CellState* find(const VoxelKey& key) const;

  bool contains(const VoxelKey& key) const { return cells_.contains(key); }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }
  void clear() { cells_.clear(); }
  void reserve(std::size_t n) { cells_.reserve(n); }

  /// Observed cells with occupancy strictly above threshold, unordered.
  std::vector<std::pair<VoxelKey, double>> occupied_cells(double threshold) const;

  const Storage& cells() const { return cells_; }

  /// Probability for a stored log-odds value; exact at the clamp bounds.
  double probability_of(double log_odds_value) const;

 private:
  GridConfig config_;
  ClampBounds clamp_;
  double prior_log_odds_;
  double min_log_odds_;
  double max_log_odds_;
  Storage cells_;
};

}  // namespace occmap
