#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "occmap/grid.hpp"
#include "occmap/integration.hpp"

namespace occmap {

/// Sensor pose in the world frame: p_world = rotation * p_sensor + translation.
struct PoseRecord {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

struct RawPoint {
  Point3 position = Point3::Zero();
  float reflectance = 0.0f;
};

struct RawScan {
  std::vector<RawPoint> points;
  /// Records dropped because a coordinate was NaN or infinite.
  std::size_t skipped_non_finite = 0;
};

/// Parses a headerless file of little-endian float32 (x, y, z, reflectance)
/// records. Throws FormatError (with the offset of the incomplete record)
/// when the size is not a multiple of 16 and IoError when unreadable.
RawScan read_velodyne_bin(const std::filesystem::path& path);

/// Parses one pose per non-empty line: 12 reals, row-major 3x4 [R|t].
/// Throws ParseError on a malformed line and ValidationError when the
/// rotation is not orthonormal with determinant +1 (tolerance 1e-6).
std::vector<PoseRecord> read_poses(const std::filesystem::path& path);

/// Throws ValidationError if the rotation is not a proper rotation.
void validate_pose(const PoseRecord& pose, double tolerance = 1e-6);

/// Transforms sensor-frame points into a world-frame scan. Points farther
/// than max_range are pulled back to max_range along their ray and flagged
/// as non-hits.
Scan to_world_scan(const RawScan& raw, const PoseRecord& pose, double max_range);

enum class ExportFormat { Ply, Csv };

std::optional<ExportFormat> parse_export_format(std::string_view name);

/// Writes every cell with occupancy above threshold, sorted by key.
/// Returns the number of cells written. Throws IoError if unwritable.
std::size_t export_map(const OccupancyMap& map, double threshold, ExportFormat format,
                       const std::filesystem::path& path);

/// Reads a CSV produced by export_map back into a map with the given
/// voxel size and clamp bounds. Throws ParseError on malformed rows.
OccupancyMap import_csv_map(const std::filesystem::path& path, GridConfig grid, ClampBounds clamp);

}  // namespace occmap
