#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "doctest.h"
#include "occmap/errors.hpp"
#include "occmap/integration.hpp"
#include "occmap/traversal.hpp"
#include "oracles.hpp"

using namespace occmap;

namespace {

const SensorModelParams kParams{};

Scan make_scan(Point3 origin, std::vector<Point3> points, std::vector<bool> flags = {}) {
  Scan s;
  s.origin = origin;
  s.points = std::move(points);
  s.hit_flags = std::move(flags);
  return s;
}

InsertOptions options(UpdatePolicy policy, ClampMode mode = ClampMode::PerScan) {
  InsertOptions o;
  o.policy = policy;
  o.clamp_mode = mode;
  return o;
}

// Observation list per cell, recomputed from the traversal and the sensor model.
std::map<VoxelKey, std::vector<double>> observation_lists(const Scan& scan, UpdatePolicy policy) {
  std::map<VoxelKey, std::vector<double>> out;
  const double omega = kParams.density.omega;
  for (std::size_t n = 0; n < scan.points.size(); ++n) {
    const Ray ray{scan.origin, scan.points[n], scan.is_hit(n)};
    for (const auto& seg : traverse(ray, omega)) {
      const double lp = seg.lambda_prime.value_or(0.0);
      if (seg.terminal_hit && seg.lambda + lp <= 0.0) continue;
      const double d = (voxel_center(seg.key, omega) - scan.origin).norm();
      const double p = measurement_probability(
          policy, seg.terminal_hit ? ObservationKind::Hit : ObservationKind::Miss, seg.lambda, lp,
          d, kParams);
      if (p != 0.5) out[seg.key].push_back(p);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("bayes_posterior") {
  CHECK(bayes_posterior(0.5, 0.7) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(bayes_posterior(0.7, 0.7) == doctest::Approx(0.8448275862068966).epsilon(1e-14));
  CHECK(bayes_posterior(0.7, 0.7) == doctest::Approx(49.0 / 58.0).epsilon(1e-14));
  for (double p : {0.01, 0.3, 0.5, 0.77, 0.99}) {
    CHECK(bayes_posterior(p, 0.5) == doctest::Approx(p).epsilon(1e-14));
  }
  CHECK(bayes_posterior(0.6, 0.4, 0.6) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK_THROWS_AS(bayes_posterior(0.0, 0.7), DomainError);
  CHECK_THROWS_AS(bayes_posterior(0.5, 1.0), DomainError);
  CHECK_THROWS_AS(bayes_posterior(0.5, 0.7, 1.0), DomainError);
}

TEST_CASE("one hit on the entry face reaches p_occ") {
  ScanIntegrator integrator(kParams);
  OccupancyMap map = integrator.make_map();
  const Scan scan = make_scan({0.05, 0.05, 0.05}, {{0.4, 0.05, 0.05}});
  const auto report = integrator.insert(map, scan, options(UpdatePolicy::Method2));
  CHECK(map.occupancy({2, 0, 0}) == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(map.occupancy({0, 0, 0}) < 0.5);
  // Axis-aligned chord of 0.2 through a cell whose diagonal is sqrt(3) * 0.2.
  CHECK(map.occupancy({1, 0, 0}) == doctest::Approx(0.5 - 0.1 / std::sqrt(3.0)).epsilon(1e-12));
  CHECK(report.rays_processed == 1);
  CHECK(report.hits == 1);
  CHECK(report.misses == 2);
  CHECK(report.cells_touched == 3);
}

TEST_CASE("two full-diagonal misses in one scan") {
  const Scan scan = make_scan({0, 0, 0}, {{0.2, 0.2, 0.2}, {0.2, 0.2, 0.2}}, {false, false});

  OccupancyMap m1(GridConfig{0.2, 0.5}, kParams.clamp());
  insert_scan(m1, scan, options(UpdatePolicy::Method1), kParams);
  CHECK(m1.find({0, 0, 0})->log_odds == doctest::Approx(2.0 * log_odds(0.4)).epsilon(1e-12));
  CHECK(m1.occupancy({0, 0, 0}) == doctest::Approx(0.3076923076923077).epsilon(1e-12));
  const double pair[] = {0.4, 0.4};
  CHECK(m1.occupancy({0, 0, 0}) == doctest::Approx(oracle::iterate_bayes(0.5, pair)).epsilon(1e-12));

  OccupancyMap base(GridConfig{0.2, 0.5}, kParams.clamp());
  const auto report = insert_scan(base, scan, options(UpdatePolicy::Baseline), kParams);
  CHECK(base.occupancy({0, 0, 0}) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(report.misses == 1);
  CHECK(report.hits == 0);
}

TEST_CASE("baseline hit dominance") {
  // One ray ends in cell 2, another passes through it.
  const Scan scan = make_scan({0.1, 0.1, 0.1}, {{0.5, 0.1, 0.1}, {0.9, 0.1, 0.1}}, {true, false});
  OccupancyMap map(GridConfig{0.2, 0.5}, kParams.clamp());
  insert_scan(map, scan, options(UpdatePolicy::Baseline), kParams);
  CHECK(map.occupancy({2, 0, 0}) == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(map.occupancy({3, 0, 0}) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(map.occupancy({4, 0, 0}) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(map.occupancy({1, 0, 0}) == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("more traversed cells are more free") {
  double prev = 0.5;
  bool reached_floor = false;
  for (int k = 1; k <= 12; ++k) {
    std::vector<Point3> pts(static_cast<std::size_t>(k), Point3(0.2, 0.2, 0.2));
    const Scan scan = make_scan({0, 0, 0}, pts, std::vector<bool>(pts.size(), false));
    for (auto policy : {UpdatePolicy::Method1, UpdatePolicy::Method2}) {
      OccupancyMap map(GridConfig{0.2, 0.5}, kParams.clamp());
      insert_scan(map, scan, options(policy), kParams);
      const double occ = map.occupancy({0, 0, 0});
      if (policy == UpdatePolicy::Method1) {
        if (prev > 0.12) {
          CHECK(occ < prev);
        } else {
          CHECK(occ == 0.12);
        }
        reached_floor = reached_floor || occ == 0.12;
        prev = occ;
      }
      CHECK(occ >= 0.12);
    }
    OccupancyMap base(GridConfig{0.2, 0.5}, kParams.clamp());
    insert_scan(base, scan, options(UpdatePolicy::Baseline), kParams);
    CHECK(base.occupancy({0, 0, 0}) == doctest::Approx(0.4).epsilon(1e-14));
  }
  CHECK(reached_floor);
}

TEST_CASE("final occupancy equals the folded Bayes oracle") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    const Point3 origin = oracle::random_point(rng, -1.0, 1.0);
    std::vector<Point3> pts;
    std::vector<bool> flags;
    for (int n = 0; n < 25; ++n) {
      pts.push_back(origin + 8.0 * oracle::random_point(rng, -1.0, 1.0));
      flags.push_back(n % 4 != 0);
    }
    const Scan scan = make_scan(origin, pts, flags);
    for (auto policy : {UpdatePolicy::Method1, UpdatePolicy::Method2}) {
      OccupancyMap map(GridConfig{0.2, 0.5}, kParams.clamp());
      insert_scan(map, scan, options(policy), kParams);
      const auto lists = observation_lists(scan, policy);
      std::size_t compared = 0;
      for (const auto& [key, obs] : lists) {
        const double expected = oracle::iterate_bayes(0.5, obs);
        if (expected <= 0.12 || expected >= 0.97) continue;
        CHECK(map.occupancy(key) == doctest::Approx(expected).epsilon(1e-10));
        ++compared;
      }
      CHECK(compared > 0);
      CHECK(map.size() == lists.size());
    }
  }
}

TEST_CASE("ray order within a scan does not matter") {
  std::mt19937_64 rng(77);
  std::vector<Point3> pts;
  for (int n = 0; n < 200; ++n) pts.push_back(6.0 * oracle::random_point(rng, -1.0, 1.0));
  const Scan scan = make_scan({0.03, -0.07, 0.11}, pts);
  Scan shuffled = scan;
  std::shuffle(shuffled.points.begin(), shuffled.points.end(), rng);

  for (auto policy : {UpdatePolicy::Baseline, UpdatePolicy::Method1, UpdatePolicy::Method2}) {
    OccupancyMap a(GridConfig{0.2, 0.5}, kParams.clamp());
    OccupancyMap b(GridConfig{0.2, 0.5}, kParams.clamp());
    insert_scan(a, scan, options(policy), kParams);
    insert_scan(b, shuffled, options(policy), kParams);
    REQUIRE(a.size() == b.size());
    for (const auto& [key, state] : a.cells()) {
      REQUIRE(b.contains(key));
      CHECK(b.find(key)->log_odds == doctest::Approx(state.log_odds).epsilon(1e-12));
    }
  }
}

TEST_CASE("empty and degenerate scans") {
  OccupancyMap map(GridConfig{0.2, 0.5}, kParams.clamp());
  const auto report = insert_scan(map, make_scan({0, 0, 0}, {}), options(UpdatePolicy::Method2), kParams);
  CHECK(map.size() == 0);
  CHECK(report.rays_processed == 0);

  const auto r2 = insert_scan(map, make_scan({0, 0, 0}, {{0, 0, 0}, {1, 0, 0}}),
                              options(UpdatePolicy::Method2), kParams);
  CHECK(r2.rays_skipped == 1);
  CHECK(r2.rays_processed == 1);

  OccupancyMap untouched(GridConfig{0.2, 0.5}, kParams.clamp());
  CHECK_THROWS_AS(insert_scan(untouched, make_scan({0, 0, 0}, {{1, 0, 0}, {std::nan(""), 0, 0}}),
                              options(UpdatePolicy::Method2), kParams),
                  DomainError);
  CHECK(untouched.size() == 0);
  CHECK_THROWS_AS(insert_scan(untouched, make_scan({0, 0, 0}, {{1, 0, 0}}, {true, false}),
                              options(UpdatePolicy::Method2), kParams),
                  DomainError);

  OccupancyMap wrong_size(GridConfig{0.1, 0.5}, kParams.clamp());
  CHECK_THROWS_AS(insert_scan(wrong_size, make_scan({0, 0, 0}, {{1, 0, 0}}),
                              options(UpdatePolicy::Method2), kParams),
                  DomainError);
  SensorModelParams bad;
  bad.p_free = 0.6;
  CHECK_THROWS_AS(ScanIntegrator{bad}, DomainError);
}

TEST_CASE("max-range rays only free space") {
  const Scan scan = make_scan({0.1, 0.1, 0.1}, {{0.9, 0.1, 0.1}}, {false});
  OccupancyMap map(GridConfig{0.2, 0.5}, kParams.clamp());
  const auto report = insert_scan(map, scan, options(UpdatePolicy::Method2), kParams);
  CHECK(report.hits == 0);
  for (const auto& [key, state] : map.cells()) CHECK(state.log_odds < 0.0);
  CHECK(map.contains({4, 0, 0}));
}

TEST_CASE("disabling misses keeps only impacts") {
  const Scan scan = make_scan({0.1, 0.1, 0.1}, {{0.9, 0.1, 0.1}, {0.1, 0.9, 0.1}}, {true, false});
  OccupancyMap map(GridConfig{0.2, 0.5}, kParams.clamp());
  InsertOptions o = options(UpdatePolicy::Method2);
  o.integrate_misses = false;
  insert_scan(map, scan, o, kParams);
  CHECK(map.size() == 1);
  CHECK(map.occupancy({4, 0, 0}) > 0.5);
}

TEST_CASE("per-measurement clamping differs from per-scan clamping") {
  // Twenty hits saturate cell 2 before one miss passes through it.
  std::vector<Point3> pts(20, Point3(0.5, 0.1, 0.1));
  pts.emplace_back(0.9, 0.1, 0.1);
  std::vector<bool> flags(20, true);
  flags.push_back(false);
  const Scan scan = make_scan({0.1, 0.1, 0.1}, pts, flags);

  const double hit_p = 0.6;  // lambda = lambda' = 0.1
  const double miss_p = 0.5 - 0.1 * 0.2 / (std::sqrt(3.0) * 0.2);

  OccupancyMap per_scan(GridConfig{0.2, 0.5}, kParams.clamp());
  const auto r1 = insert_scan(per_scan, scan, options(UpdatePolicy::Method2), kParams);
  CHECK(per_scan.occupancy({2, 0, 0}) == 0.97);
  // Cells 0 and 1 saturate from the misses of the same rays.
  CHECK(r1.clamped_cells == 3);
  CHECK(per_scan.occupancy({0, 0, 0}) == 0.12);

  OccupancyMap per_meas(GridConfig{0.2, 0.5}, kParams.clamp());
  const auto r2 = insert_scan(per_meas, scan, options(UpdatePolicy::Method2, ClampMode::PerMeasurement),
                              kParams);
  CHECK(per_meas.find({2, 0, 0})->log_odds ==
        doctest::Approx(log_odds(0.97) + log_odds(miss_p)).epsilon(1e-12));
  CHECK(per_meas.occupancy({2, 0, 0}) < 0.97);
  CHECK(r2.clamped_cells == 2);
  CHECK(log_odds(hit_p) * 20 > log_odds(0.97));

  // Without saturation both modes coincide.
  const Scan light = make_scan({0.1, 0.1, 0.1}, {{0.5, 0.1, 0.1}, {0.9, 0.1, 0.1}}, {true, false});
  OccupancyMap a(GridConfig{0.2, 0.5}, kParams.clamp());
  OccupancyMap b(GridConfig{0.2, 0.5}, kParams.clamp());
  insert_scan(a, light, options(UpdatePolicy::Method1), kParams);
  insert_scan(b, light, options(UpdatePolicy::Method1, ClampMode::PerMeasurement), kParams);
  for (const auto& [key, state] : a.cells()) {
    CHECK(b.find(key)->log_odds == doctest::Approx(state.log_odds).epsilon(1e-12));
  }
}

TEST_CASE("weight table and direct evaluation give matching maps") {
  std::mt19937_64 rng(12);
  std::vector<Point3> pts;
  for (int n = 0; n < 100; ++n) pts.push_back(40.0 * oracle::random_unit(rng));
  const Scan scan = make_scan({0, 0, 0}, pts);
  ScanIntegrator direct(kParams);
  ScanIntegrator tabled(kParams, 50.0);
  OccupancyMap a = direct.make_map();
  OccupancyMap b = tabled.make_map();
  direct.insert(a, scan, options(UpdatePolicy::Method1));
  tabled.insert(b, scan, options(UpdatePolicy::Method1));
  REQUIRE(a.size() == b.size());
  for (const auto& [key, state] : a.cells()) {
    CHECK(b.find(key)->log_odds == doctest::Approx(state.log_odds).epsilon(1e-3));
  }
}
