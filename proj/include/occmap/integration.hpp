#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "occmap/density.hpp"
#include "occmap/grid.hpp"
#include "occmap/sensor_model.hpp"

namespace occmap {

/// One sensor sweep in the world frame. `hit_flags` is either empty (all
/// points are impacts) or has one entry per point.
struct Scan {
  Point3 origin = Point3::Zero();
  std::vector<Point3> points;
  std::vector<bool> hit_flags;

  bool is_hit(std::size_t index) const { return hit_flags.empty() || hit_flags[index]; }
  /// Throws DomainError for non-finite coordinates or mismatched flags.
  void validate() const;
};

/// PerScan sums every observation a cell receives from one scan and clamps
/// once; PerMeasurement clamps after every single observation.
enum class ClampMode { PerScan, PerMeasurement };

std::string_view to_string(ClampMode mode);

struct InsertOptions {
  UpdatePolicy policy = UpdatePolicy::Method2;
  ClampMode clamp_mode = ClampMode::PerScan;
  /// When false, traversal observations are dropped and only impacts update the map.
  bool integrate_misses = true;
};

struct ScanInsertReport {
  std::size_t rays_processed = 0;
  std::size_t rays_skipped = 0;  // zero-length rays
  std::size_t cells_touched = 0;
  std::size_t hits = 0;
  std::size_t misses = 0;
  std::size_t clamped_cells = 0;

  ScanInsertReport& operator+=(const ScanInsertReport& other);
};

/// Static-state binary Bayes update written with explicit odds products:
/// [1 + (1-prior)/prior * (1-obs)/obs * map_prior/(1-map_prior)]^-1.
/// Throws DomainError unless all arguments lie in (0, 1).
double bayes_posterior(double prior, double observation, double map_prior = 0.5);

/// Inserts scans into one map. Holds per-scan scratch buffers so repeated
/// insertions do not reallocate; not thread-safe.
class ScanIntegrator {
 public:
  /// Throws DomainError if params are invalid. When `max_weight_distance`
  /// is positive, w(d) is served from a WeightTable up to that distance.
  explicit ScanIntegrator(SensorModelParams params, double max_weight_distance = 0.0);

  const SensorModelParams& params() const { return params_; }

  /// Builds an empty map whose voxel size and clamp bounds match the params.
  OccupancyMap make_map(double prior = 0.5) const;

  /// The map's voxel size and clamp bounds must match the params; the scan
  /// is validated before any mutation. An empty scan is a no-op.
  ScanInsertReport insert(OccupancyMap& map, const Scan& scan, const InsertOptions& options);

 private:
  double weight_at(double d) const;

  struct Accumulator {
    double log_odds = 0.0;
    CellObservationTally tally;
    bool clamped = false;  // per-measurement mode: state of the latest application
  };

  SensorModelParams params_;
  std::optional<WeightTable> table_;
  absl::flat_hash_map<VoxelKey, Accumulator> scratch_;
};

/// Convenience wrapper around a temporary ScanIntegrator.
ScanInsertReport insert_scan(OccupancyMap& map, const Scan& scan, const InsertOptions& options,
                             const SensorModelParams& params);

}  // namespace occmap
