#include "occmap/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include <absl/container/flat_hash_set.h>

#include "occmap/errors.hpp"
#include "occmap/traversal.hpp"

namespace occmap {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::int64_t kMaxDenseCells = std::int64_t{64} << 20;

Point3 unit_direction(double elevation, double azimuth) {
  const double ce = std::cos(elevation);
  return {ce * std::cos(azimuth), ce * std::sin(azimuth), std::sin(elevation)};
}

std::vector<double> elevation_lattice(double fov_min, double fov_max, double step) {
  const auto count = static_cast<std::size_t>(std::floor((fov_max - fov_min) / step + 1e-9)) + 1;
  std::vector<double> out(count);
  for (std::size_t n = 0; n < count; ++n) out[n] = fov_min + static_cast<double>(n) * step;
  return out;
}

std::size_t azimuth_count(double step) {
  return static_cast<std::size_t>(std::ceil(2.0 * kPi / step - 1e-9));
}

}  // namespace

void SphereScanSpec::validate() const {
  if (!(radius > 0.0)) throw DomainError("sphere scan: radius must be positive");
  if (!(phi_s > 0.0) || !(theta_s > 0.0)) throw DomainError("sphere scan: resolutions must be positive");
  if (!(fov_min <= fov_max)) throw DomainError("sphere scan: field of view must be ordered");
  if (!center.allFinite()) throw DomainError("sphere scan: non-finite centre");
}

std::size_t SphereScanSpec::elevation_steps() const {
  return elevation_lattice(fov_min, fov_max, phi_s).size();
}

std::size_t SphereScanSpec::azimuth_steps() const { return azimuth_count(theta_s); }

Scan generate_sphere_scan(const SphereScanSpec& spec) {
  spec.validate();
  const auto elevations = elevation_lattice(spec.fov_min, spec.fov_max, spec.phi_s);
  const std::size_t azimuths = azimuth_count(spec.theta_s);

  Scan scan;
  scan.origin = spec.center;
  scan.points.reserve(elevations.size() * azimuths);
  for (const double e : elevations) {
    for (std::size_t m = 0; m < azimuths; ++m) {
      const double a = static_cast<double>(m) * spec.theta_s;
      scan.points.push_back(spec.center + spec.radius * unit_direction(e, a));
    }
  }
  scan.hit_flags.assign(scan.points.size(), true);
  return scan;
}

VoxelCounts::VoxelCounts(VoxelKey min_key, VoxelKey max_key) : min_(min_key), max_(max_key) {
  nx_ = std::int64_t{max_.i} - min_.i + 1;
  ny_ = std::int64_t{max_.j} - min_.j + 1;
  nz_ = std::int64_t{max_.k} - min_.k + 1;
  if (nx_ <= 0 || ny_ <= 0 || nz_ <= 0) throw DomainError("VoxelCounts: empty bounding box");
  const double cells = static_cast<double>(nx_) * static_cast<double>(ny_) * static_cast<double>(nz_);
  dense_ = cells <= static_cast<double>(kMaxDenseCells);
  if (dense_) dense_counts_.assign(static_cast<std::size_t>(nx_ * ny_ * nz_), 0);
}

std::size_t VoxelCounts::dense_index(const VoxelKey& key) const {
  return static_cast<std::size_t>(((key.k - std::int64_t{min_.k}) * ny_ + (key.j - min_.j)) * nx_ +
                                  (key.i - min_.i));
}

void VoxelCounts::increment(const VoxelKey& key) {
  if (key.i < min_.i || key.j < min_.j || key.k < min_.k || key.i > max_.i || key.j > max_.j ||
      key.k > max_.k) {
    throw DomainError("VoxelCounts: key outside the bounding box");
  }
  if (dense_) {
    ++dense_counts_[dense_index(key)];
  } else {
    ++sparse_counts_[key];
  }
  ++total_;
}

std::uint32_t VoxelCounts::count(const VoxelKey& key) const {
  if (key.i < min_.i || key.j < min_.j || key.k < min_.k || key.i > max_.i || key.j > max_.j ||
      key.k > max_.k) {
    return 0;
  }
  if (dense_) return dense_counts_[dense_index(key)];
  const auto it = sparse_counts_.find(key);
  return it == sparse_counts_.end() ? 0 : it->second;
}

std::size_t VoxelCounts::nonzero() const {
  if (!dense_) return sparse_counts_.size();
  return static_cast<std::size_t>(
      std::count_if(dense_counts_.begin(), dense_counts_.end(), [](std::uint32_t c) { return c > 0; }));
}

void VoxelCounts::for_each_in_bounds(
    const std::function<void(const VoxelKey&, std::uint32_t)>& visit) const {
  for (std::int32_t k = min_.k; k <= max_.k; ++k) {
    for (std::int32_t j = min_.j; j <= max_.j; ++j) {
      for (std::int32_t i = min_.i; i <= max_.i; ++i) {
        const VoxelKey key{i, j, k};
        visit(key, count(key));
      }
    }
  }
}

void VoxelCounts::for_each_nonzero(
    const std::function<void(const VoxelKey&, std::uint32_t)>& visit) const {
  if (!dense_) {
    for (const auto& [key, c] : sparse_counts_) visit(key, c);
    return;
  }
  std::size_t idx = 0;
  for (std::int32_t k = min_.k; k <= max_.k; ++k) {
    for (std::int32_t j = min_.j; j <= max_.j; ++j) {
      for (std::int32_t i = min_.i; i <= max_.i; ++i, ++idx) {
        if (dense_counts_[idx] > 0) visit(VoxelKey{i, j, k}, dense_counts_[idx]);
      }
    }
  }
}

VoxelCounts count_rays_per_voxel(const Scan& scan, double omega) {
  scan.validate();
  VoxelKey lo = key_from_point(scan.origin, omega);
  VoxelKey hi = lo;
  for (const Point3& p : scan.points) {
    const VoxelKey key = key_from_point(p, omega);
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], key[a]);
      hi[a] = std::max(hi[a], key[a]);
    }
  }
  VoxelCounts counts(lo, hi);
  for (std::size_t n = 0; n < scan.points.size(); ++n) {
    const Ray ray{scan.origin, scan.points[n], scan.is_hit(n)};
    if ((ray.endpoint - ray.origin).norm() == 0.0) continue;
    walk_ray(ray, omega, [&counts](const TraversalSegment& seg) {
      if (seg.lambda > 0.0) counts.increment(seg.key);
    });
  }
  return counts;
}

DensityCurve density_validation_curve(const SphereScanSpec& spec, double omega, double bin_width,
                                      double gamma) {
  if (!(bin_width > 0.0)) throw DomainError("density curve: bin width must be positive");
  const Scan scan = generate_sphere_scan(spec);
  const VoxelCounts counts = count_rays_per_voxel(scan, omega);

  const auto num_bins = static_cast<std::size_t>(std::floor(spec.radius / bin_width));
  std::vector<double> sums(num_bins, 0.0);
  std::vector<std::size_t> voxels(num_bins, 0);
  counts.for_each_in_bounds([&](const VoxelKey& key, std::uint32_t c) {
    const double dist = (voxel_center(key, omega) - spec.center).norm();
    const auto bin = static_cast<std::size_t>(dist / bin_width);
    if (bin >= num_bins) return;
    sums[bin] += c;
    ++voxels[bin];
  });

  const DensityParams params{{spec.phi_s, spec.theta_s}, omega, gamma};
  const double near_limit = density_validity_threshold(params);
  DensityCurve curve;
  for (std::size_t b = 0; b < num_bins; ++b) {
    const double d = (static_cast<double>(b) + 0.5) * bin_width;
    if (voxels[b] == 0 || d <= near_limit) continue;
    DensityBin bin;
    bin.d = d;
    bin.voxels = voxels[b];
    bin.empirical = sums[b] / static_cast<double>(voxels[b]);
    bin.alpha1 = alpha(FaceCase::One, d, params);
    bin.alpha2 = alpha(FaceCase::Two, d, params);
    bin.alpha3 = alpha(FaceCase::Three, d, params);
    bin.rho = rho(d, params);
    curve.bins.push_back(bin);
  }
  return curve;
}

void write_density_curve_csv(const DensityCurve& curve, std::ostream& out) {
  out << "d,empirical,alpha1,alpha2,alpha3,rho\n";
  char line[256];
  for (const DensityBin& b : curve.bins) {
    std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", b.d, b.empirical, b.alpha1,
                  b.alpha2, b.alpha3, b.rho);
    out << line;
  }
}

void write_density_curve_csv(const DensityCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  write_density_curve_csv(curve, out);
  if (!out) throw IoError("write failed for " + path.string());
}

DensityCurve read_density_curve_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "d,empirical,alpha1,alpha2,alpha3,rho") {
    throw ParseError("density curve: unexpected header", 1);
  }
  DensityCurve curve;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    DensityBin b;
    double* fields[] = {&b.d, &b.empirical, &b.alpha1, &b.alpha2, &b.alpha3, &b.rho};
    for (std::size_t f = 0; f < 6; ++f) {
      std::string cell;
      if (!std::getline(row, cell, ',')) throw ParseError("density curve: missing field", line_no);
      try {
        std::size_t used = 0;
        *fields[f] = std::stod(cell, &used);
        if (used != cell.size()) throw ParseError("density curve: invalid number", line_no);
      } catch (const std::logic_error&) {
        throw ParseError("density curve: invalid number", line_no);
      }
    }
    std::string extra;
    if (std::getline(row, extra, ',')) throw ParseError("density curve: too many fields", line_no);
    if (!curve.bins.empty() && !(b.d > curve.bins.back().d)) {
      throw ParseError("density curve: distances must be strictly increasing", line_no);
    }
    if (b.empirical < 0.0) throw ParseError("density curve: negative count", line_no);
    curve.bins.push_back(b);
  }
  return curve;
}

std::vector<Scan> ground_plane_scans(const GroundPlaneConfig& config) {
  const auto& spec = config.params.density.spec;
  const auto elevations = elevation_lattice(config.fov_min_deg * kPi / 180.0,
                                            config.fov_max_deg * kPi / 180.0, spec.phi_s);
  const std::size_t azimuths = azimuth_count(spec.theta_s);

  std::vector<Scan> scans;
  scans.reserve(config.num_scans);
  for (std::size_t s = 0; s < config.num_scans; ++s) {
    const double x = (static_cast<double>(s) - 0.5 * static_cast<double>(config.num_scans - 1)) *
                     config.scan_spacing;
    Scan scan;
    scan.origin = Point3(x, 0.0, config.ground_z + config.sensor_height);
    scan.points.reserve(elevations.size() * azimuths);
    scan.hit_flags.reserve(elevations.size() * azimuths);
    for (const double e : elevations) {
      if (e >= 0.0) continue;  // only the downward-looking part of the field of view
      // Range at which this elevation meets the ground, if it points down.
      const double ground_range = e < 0.0 ? config.sensor_height / std::sin(-e) : HUGE_VAL;
      const bool hit = ground_range <= config.max_range;
      const double range = hit ? ground_range : config.max_range;
      for (std::size_t m = 0; m < azimuths; ++m) {
        const Point3 dir = unit_direction(e, static_cast<double>(m) * spec.theta_s);
        Point3 end = scan.origin + range * dir;
        if (hit) end.z() = config.ground_z;
        scan.points.push_back(end);
        scan.hit_flags.push_back(hit);
      }
    }
    scans.push_back(std::move(scan));
  }
  return scans;
}

std::vector<GroundPlaneMetrics> ground_plane_experiment(const std::vector<UpdatePolicy>& policies,
                                                        const GroundPlaneConfig& config) {
  config.params.validate();
  if (config.num_scans == 0) throw DomainError("ground plane: at least one scan is required");
  if (!(config.sensor_height > 0.0) || !(config.eval_radius > 0.0) || !(config.max_range > 0.0)) {
    throw DomainError("ground plane: height, radius and range must be positive");
  }

  const double omega = config.params.density.omega;
  const std::vector<Scan> scans = ground_plane_scans(config);
  const std::int32_t ground_layer = key_from_point(Point3(0.0, 0.0, config.ground_z), omega).k;

  absl::flat_hash_set<VoxelKey> hit_cells;
  for (const Scan& scan : scans) {
    for (std::size_t n = 0; n < scan.points.size(); ++n) {
      if (scan.is_hit(n)) hit_cells.insert(key_from_point(scan.points[n], omega));
    }
  }

  // Ground-layer voxels whose centre lies within the evaluation disk around
  // the trajectory midpoint.
  std::vector<VoxelKey> disk;
  const auto reach = static_cast<std::int32_t>(std::ceil(config.eval_radius / omega)) + 1;
  for (std::int32_t j = -reach; j <= reach; ++j) {
    for (std::int32_t i = -reach; i <= reach; ++i) {
      const VoxelKey key{i, j, ground_layer};
      const Point3 c = voxel_center(key, omega);
      if (std::hypot(c.x(), c.y()) <= config.eval_radius) disk.push_back(key);
    }
  }

  ScanIntegrator integrator(config.params, config.max_range + 2.0 * omega);
  const InsertOptions base{UpdatePolicy::Baseline, config.clamp_mode, config.integrate_misses};

  std::vector<GroundPlaneMetrics> results;
  for (const UpdatePolicy policy : policies) {
    OccupancyMap map = integrator.make_map();
    InsertOptions options = base;
    options.policy = policy;
    GroundPlaneMetrics m;
    m.policy = policy;
    for (const Scan& scan : scans) m.report += integrator.insert(map, scan, options);

    m.plane_voxels = disk.size();
    for (const VoxelKey& key : disk) {
      const double p = map.occupancy(key);
      if (p > 0.5) ++m.occupied_voxels;
      if (p < 0.5) ++m.hole_voxels;
      if (hit_cells.contains(key)) {
        ++m.hit_voxels;
        if (p > 0.5) ++m.hit_voxels_occupied;
      }
    }
    m.occupied_fraction = m.plane_voxels ? double(m.occupied_voxels) / double(m.plane_voxels) : 0.0;
    m.hit_occupied_fraction = m.hit_voxels ? double(m.hit_voxels_occupied) / double(m.hit_voxels) : 0.0;
    results.push_back(m);
  }
  return results;
}

}  // namespace occmap
