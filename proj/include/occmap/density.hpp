#pragma once

#include <vector>

namespace occmap {

/// Angular spacing between adjacent beams, in radians.
struct SensorAngularSpec {
  double phi_s = 0.0;    // vertical
  double theta_s = 0.0;  // horizontal

  static SensorAngularSpec from_degrees(double vertical_deg, double horizontal_deg);

  /// Throws DomainError unless both resolutions lie in (0, pi/2).
  void validate() const;
};

struct DensityParams {
  SensorAngularSpec spec = SensorAngularSpec::from_degrees(0.4, 0.16);
  double omega = 0.2;
  double gamma = 32.0;

  void validate() const;
};

/// Number of voxel faces visible from the sensor for the three model cases.
enum class FaceCase { One = 1, Two = 2, Three = 3 };

/// Distances at or below this value make the case-3 arctangent
/// denominators non-positive; all density functions treat it as the
/// boundary of their domain.
double density_validity_threshold(const DensityParams& params);

/// Expected ray count through a voxel at distance d for one visibility case.
/// Throws DensityDomainError for d <= density_validity_threshold().
double alpha(FaceCase face_case, double d, const DensityParams& params);

/// Approximate voxel counts on a sphere of radius d: axis-aligned voxels
/// (one visible face), voxels in the coordinate planes (two faces), the
/// rest (three faces), and the total.
struct EtaCounts {
  double eta1 = 0.0;
  double eta2 = 0.0;
  double eta3 = 0.0;
  double eta_total = 0.0;
};

/// eta2 and eta3 are clamped at 0 where the asymptotic formulas go
/// negative. Throws DomainError for d <= 0.
EtaCounts eta(double d, const DensityParams& params);

/// Mean expected ray count over the three cases, weighted by eta.
double rho(double d, const DensityParams& params);

/// min(1, rho(d) / gamma); saturates to 1 inside the validity threshold.
/// Throws DomainError only for negative or non-finite d.
double weight(double d, const DensityParams& params);

/// Read-only lookup of weight(d) on a grid of spacing omega/4 with linear
/// interpolation; distances past the table fall back to direct evaluation.
class WeightTable {
 public:
  WeightTable(const DensityParams& params, double max_distance);

  double operator()(double d) const;

  const DensityParams& params() const { return params_; }
  double max_distance() const { return max_distance_; }

 private:
  DensityParams params_;
  double spacing_;
  double max_distance_;
  std::vector<double> values_;
};

}  // namespace occmap
