#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <absl/container/flat_hash_map.h>

#include "occmap/density.hpp"
#include "occmap/grid.hpp"
#include "occmap/integration.hpp"
#include "occmap/sensor_model.hpp"

namespace occmap {

/// Rays from `center` to a sphere of `radius` on an (elevation, azimuth)
/// lattice. Elevations run from fov_min to fov_max inclusive in steps of
/// phi_s; azimuths cover [0, 2*pi) in steps of theta_s. All angles in radians.
struct SphereScanSpec {
  double radius = 100.0;
  double phi_s = 0.0;
  double theta_s = 0.0;
  double fov_min = -1.5707963267948966;
  double fov_max = 1.5707963267948966;
  Point3 center = Point3::Zero();

  void validate() const;
  std::size_t elevation_steps() const;
  std::size_t azimuth_steps() const;
};

Scan generate_sphere_scan(const SphereScanSpec& spec);

/// Number of rays passing through each voxel (presence, not chord length).
/// Dense storage over the bounding box of the scan when it fits in memory,
/// sparse otherwise.
class VoxelCounts {
 public:
  VoxelCounts(VoxelKey min_key, VoxelKey max_key);

  void increment(const VoxelKey& key);
  std::uint32_t count(const VoxelKey& key) const;

  /// Sum of all counters.
  std::uint64_t total() const { return total_; }
  /// Number of voxels with a non-zero count.
  std::size_t nonzero() const;

  VoxelKey min_key() const { return min_; }
  VoxelKey max_key() const { return max_; }

  /// Visits every voxel of the bounding box, including zero counts.
  void for_each_in_bounds(const std::function<void(const VoxelKey&, std::uint32_t)>& visit) const;
  /// Visits voxels with a non-zero count.
  void for_each_nonzero(const std::function<void(const VoxelKey&, std::uint32_t)>& visit) const;

 private:
  std::size_t dense_index(const VoxelKey& key) const;

  VoxelKey min_;
  VoxelKey max_;
  std::int64_t nx_ = 0, ny_ = 0, nz_ = 0;
  bool dense_ = true;
  std::vector<std::uint32_t> dense_counts_;
  absl::flat_hash_map<VoxelKey, std::uint32_t> sparse_counts_;
  std::uint64_t total_ = 0;
};

/// Brute-force ray counting: each ray increments every voxel it pierces once.
/// A cell the ray only touches (zero chord) is not counted.
VoxelCounts count_rays_per_voxel(const Scan& scan, double omega);

struct DensityBin {
  double d = 0.0;
  double empirical = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double alpha3 = 0.0;
  double rho = 0.0;
  std::size_t voxels = 0;
};

struct DensityCurve {
  std::vector<DensityBin> bins;
};

/// Counts rays of the sphere scan per voxel, bins voxels by the distance of
/// their centre from the sphere centre, and compares each bin's mean count
/// with the density model evaluated at the bin centre. Bins reaching past
/// the sphere, or too close for the model, are left out.
DensityCurve density_validation_curve(const SphereScanSpec& spec, double omega, double bin_width,
                                      double gamma = 32.0);

/// CSV with header "d,empirical,alpha1,alpha2,alpha3,rho".
void write_density_curve_csv(const DensityCurve& curve, std::ostream& out);
void write_density_curve_csv(const DensityCurve& curve, const std::filesystem::path& path);
/// Throws ParseError on malformed input or non-increasing distances.
DensityCurve read_density_curve_csv(std::istream& in);

/// Flat-ground scenario: a sensor driving along +x over a horizontal plane.
struct GroundPlaneConfig {
  SensorModelParams params;
  double sensor_height = 1.7;
  /// Height of the ground plane; kept off voxel faces so impacts do not
  /// land exactly on a cell boundary.
  double ground_z = 0.1;
  double fov_min_deg = -24.8;
  double fov_max_deg = 0.0;  // elevations >= 0 never reach the ground and are skipped
  std::size_t num_scans = 5;
  double scan_spacing = 1.0;
  double eval_radius = 30.0;
  double max_range = 80.0;
  ClampMode clamp_mode = ClampMode::PerScan;
  bool integrate_misses = true;
};

struct GroundPlaneMetrics {
  UpdatePolicy policy = UpdatePolicy::Baseline;
  std::size_t plane_voxels = 0;      // ground-layer voxels inside the evaluation disk
  std::size_t occupied_voxels = 0;   // ... classified occupied (> 0.5)
  std::size_t hole_voxels = 0;       // ... classified free (< 0.5)
  std::size_t hit_voxels = 0;        // ... containing at least one impact
  std::size_t hit_voxels_occupied = 0;
  double occupied_fraction = 0.0;    // occupied_voxels / plane_voxels
  double hit_occupied_fraction = 0.0;  // hit_voxels_occupied / hit_voxels
  ScanInsertReport report;
};

/// Scans shared by every policy in the ground-plane experiment.
std::vector<Scan> ground_plane_scans(const GroundPlaneConfig& config);

std::vector<GroundPlaneMetrics> ground_plane_experiment(const std::vector<UpdatePolicy>& policies,
                                                        const GroundPlaneConfig& config);

}  // namespace occmap
