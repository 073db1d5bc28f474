#include "occmap/integration.hpp"

#include <cmath>
#include <string>

#include "occmap/errors.hpp"
#include "occmap/traversal.hpp"

namespace occmap {

void Scan::validate() const {
  if (!origin.allFinite()) throw DomainError("scan: non-finite origin");
  if (!hit_flags.empty() && hit_flags.size() != points.size()) {
    throw DomainError("scan: " + std::to_string(hit_flags.size()) + " hit flags for " +
                      std::to_string(points.size()) + " points");
  }
  for (std::size_t n = 0; n < points.size(); ++n) {
    if (!points[n].allFinite()) throw DomainError("scan: non-finite point at index " + std::to_string(n));
  }
}

std::string_view to_string(ClampMode mode) {
  return mode == ClampMode::PerScan ? "per-scan" : "per-measurement";
}

ScanInsertReport& ScanInsertReport::operator+=(const ScanInsertReport& other) {
  rays_processed += other.rays_processed;
  rays_skipped += other.rays_skipped;
  cells_touched += other.cells_touched;
  hits += other.hits;
  misses += other.misses;
  clamped_cells += other.clamped_cells;
  return *this;
}

double bayes_posterior(double prior, double observation, double map_prior) {
  auto in_open_unit = [](double p) { return p > 0.0 && p < 1.0; };
  if (!in_open_unit(prior) || !in_open_unit(observation) || !in_open_unit(map_prior)) {
    throw DomainError("bayes_posterior: probabilities must lie in (0, 1)");
  }
  const double odds_against = (1.0 - prior) / prior * ((1.0 - observation) / observation) *
                              (map_prior / (1.0 - map_prior));
  return 1.0 / (1.0 + odds_against);
}

ScanIntegrator::ScanIntegrator(SensorModelParams params, double max_weight_distance)
    : params_(params) {
  params_.validate();
  if (max_weight_distance > 0.0) table_.emplace(params_.density, max_weight_distance);
}

OccupancyMap ScanIntegrator::make_map(double prior) const {
  return OccupancyMap(GridConfig{params_.density.omega, prior}, params_.clamp());
}

double ScanIntegrator::weight_at(double d) const {
  return table_ ? (*table_)(d) : weight(d, params_.density);
}

ScanInsertReport ScanIntegrator::insert(OccupancyMap& map, const Scan& scan,
                                        const InsertOptions& options) {
  const double omega = params_.density.omega;
  if (map.voxel_size() != omega) {
    throw DomainError("insert_scan: map voxel size differs from the sensor-model voxel size");
  }
  if (map.clamp().p_min != params_.p_min || map.clamp().p_max != params_.p_max) {
    throw DomainError("insert_scan: map clamp bounds differ from the sensor-model bounds");
  }
  scan.validate();

  ScanInsertReport report;
  if (scan.points.empty()) return report;

  scratch_.clear();
  const double prior = map.prior_log_odds();
  const bool baseline = options.policy == UpdatePolicy::Baseline;
  const bool per_measurement = options.clamp_mode == ClampMode::PerMeasurement;
  std::size_t clamped_live = 0;

  auto observe = [&](const TraversalSegment& seg) {
    const bool hit = seg.terminal_hit;
    if (!hit && !options.integrate_misses) return;

    if (baseline) {
      auto& tally = scratch_[seg.key].tally;
      hit ? ++tally.hits : ++tally.misses;
      return;
    }

    const double lambda_prime = seg.lambda_prime.value_or(0.0);
    if (hit && !(seg.lambda + lambda_prime > 0.0)) return;
    const double d = (voxel_center(seg.key, omega) - scan.origin).norm();
    const double p = measurement_probability_weighted(
        options.policy, hit ? ObservationKind::Hit : ObservationKind::Miss, seg.lambda,
        lambda_prime, weight_at(d), params_);
    if (p == 0.5) return;

    hit ? ++report.hits : ++report.misses;
    const double delta = log_odds(p) - prior;
    auto& acc = scratch_[seg.key];
    if (per_measurement) {
      const bool now_clamped = map.apply_log_odds(seg.key, delta).clamped;
      if (now_clamped && !acc.clamped) ++clamped_live;
      if (!now_clamped && acc.clamped) --clamped_live;
      acc.clamped = now_clamped;
    } else {
      acc.log_odds += delta;
    }
  };

  for (std::size_t n = 0; n < scan.points.size(); ++n) {
    const Ray ray{scan.origin, scan.points[n], scan.is_hit(n)};
    if ((ray.endpoint - ray.origin).norm() == 0.0) {
      ++report.rays_skipped;
      continue;
    }
    ++report.rays_processed;
    walk_ray(ray, omega, observe);
  }

  if (per_measurement && !baseline) {
    report.cells_touched = scratch_.size();
    report.clamped_cells = clamped_live;
    return report;
  }

  const double hit_delta = log_odds(params_.p_occ) - prior;
  const double miss_delta = log_odds(params_.p_free) - prior;
  for (const auto& [key, acc] : scratch_) {
    double delta = acc.log_odds;
    if (baseline) {
      const auto kind = baseline_scan_filter(acc.tally);
      if (!kind) continue;
      if (*kind == ObservationKind::Hit) {
        delta = hit_delta;
        ++report.hits;
      } else {
        delta = miss_delta;
        ++report.misses;
      }
    }
    ++report.cells_touched;
    if (map.apply_log_odds(key, delta).clamped) ++report.clamped_cells;
  }
  return report;
}

ScanInsertReport insert_scan(OccupancyMap& map, const Scan& scan, const InsertOptions& options,
                             const SensorModelParams& params) {
  ScanIntegrator integrator(params);
  return integrator.insert(map, scan, options);
}

}  // namespace occmap
