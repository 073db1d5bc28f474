// occmap: build occupancy maps from Velodyne scans, validate the ray density
// model and run the synthetic ground-plane comparison.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "occmap/errors.hpp"
#include "occmap/grid.hpp"
#include "occmap/integration.hpp"
#include "occmap/scan_io.hpp"
#include "occmap/sensor_model.hpp"
#include "occmap/validation.hpp"

namespace fs = std::filesystem;
using namespace occmap;

namespace {

struct ModelFlags {
  double voxel_size = 0.2;
  double p_occ = 0.7;
  double p_free = 0.4;
  double clamp_min = 0.12;
  double clamp_max = 0.97;
  double gamma = 32.0;
  double vres_deg = 0.4;
  double hres_deg = 0.16;

  SensorModelParams params(double omega) const {
    SensorModelParams p;
    p.p_occ = p_occ;
    p.p_free = p_free;
    p.p_min = clamp_min;
    p.p_max = clamp_max;
    p.density.spec = SensorAngularSpec::from_degrees(vres_deg, hres_deg);
    p.density.omega = omega;
    p.density.gamma = gamma;
    p.validate();
    return p;
  }
  SensorModelParams params() const { return params(voxel_size); }
};

void add_model_flags(CLI::App* app, ModelFlags& f, bool with_voxel_size = true) {
  if (with_voxel_size) {
    app->add_option("--voxel-size", f.voxel_size, "Leaf voxel size (m)")->check(CLI::PositiveNumber);
  }
  app->add_option("--p-occ", f.p_occ, "Occupancy probability of a full-strength hit");
  app->add_option("--p-free", f.p_free, "Occupancy probability of a full-strength miss");
  app->add_option("--clamp-min", f.clamp_min, "Lower occupancy clamp");
  app->add_option("--clamp-max", f.clamp_max, "Upper occupancy clamp");
  app->add_option("--gamma", f.gamma, "Ray density scale")->check(CLI::PositiveNumber);
  app->add_option("--vres-deg", f.vres_deg, "Vertical angular resolution (deg)")->check(CLI::PositiveNumber);
  app->add_option("--hres-deg", f.hres_deg, "Horizontal angular resolution (deg)")->check(CLI::PositiveNumber);
}

const std::map<std::string, ClampMode> kClampModes{
    {"per-scan", ClampMode::PerScan}, {"per-measurement", ClampMode::PerMeasurement}};

struct FrameRange {
  std::size_t first = 0;
  std::size_t last = 0;
};

FrameRange parse_frames(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw CLI::ValidationError("--frames", "expected A..B");
  try {
    std::size_t used_a = 0, used_b = 0;
    const std::string a = text.substr(0, dots), b = text.substr(dots + 2);
    FrameRange r{std::stoul(a, &used_a), std::stoul(b, &used_b)};
    if (used_a != a.size() || used_b != b.size() || r.first > r.last) throw std::invalid_argument(text);
    return r;
  } catch (const std::logic_error&) {
    throw CLI::ValidationError("--frames", "expected A..B with A <= B, got '" + text + "'");
  }
}

ExportFormat format_for(const std::string& requested, const fs::path& output) {
  if (!requested.empty()) return *parse_export_format(requested);
  return output.extension() == ".csv" ? ExportFormat::Csv : ExportFormat::Ply;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// build-map

struct BuildMapArgs {
  ModelFlags model;
  fs::path input;
  fs::path poses;
  std::string frames;
  double max_range = 80.0;
  std::string method = "m2";
  std::string clamp_mode = "per-scan";
  bool no_misses = false;
  fs::path output;
  std::string format;
  double threshold = 0.5;
};

int run_build_map(const BuildMapArgs& args) {
  if (!fs::is_directory(args.input)) {
    std::cerr << "error: input directory not found: " << args.input.string() << "\n";
    return 1;
  }
  if (!fs::is_regular_file(args.poses)) {
    std::cerr << "error: pose file not found: " << args.poses.string() << "\n";
    return 1;
  }

  std::vector<fs::path> bins;
  for (const auto& entry : fs::directory_iterator(args.input)) {
    if (entry.is_regular_file() && entry.path().extension() == ".bin") bins.push_back(entry.path());
  }
  std::sort(bins.begin(), bins.end());
  if (bins.empty()) {
    std::cerr << "error: no .bin files in " << args.input.string() << "\n";
    return 1;
  }

  FrameRange range{0, bins.size() - 1};
  if (!args.frames.empty()) range = parse_frames(args.frames);
  if (range.last >= bins.size()) {
    std::cerr << "error: frame " << range.last << " requested but " << args.input.string()
              << " holds " << bins.size() << " scans\n";
    return 1;
  }
  const auto poses = read_poses(args.poses);
  if (poses.size() <= range.last) {
    std::cerr << "error: " << poses.size() << " poses for frames " << range.first << ".." << range.last
              << " (need " << range.last + 1 << ")\n";
    return 1;
  }

  const SensorModelParams params = args.model.params();
  ScanIntegrator integrator(params, args.max_range + 2.0 * params.density.omega);
  OccupancyMap map = integrator.make_map();
  const InsertOptions options{*parse_policy(args.method), kClampModes.at(args.clamp_mode),
                              !args.no_misses};

  ScanInsertReport total;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t f = range.first; f <= range.last; ++f) {
    const RawScan raw = read_velodyne_bin(bins[f]);
    const Scan scan = to_world_scan(raw, poses[f], args.max_range);
    const ScanInsertReport r = integrator.insert(map, scan, options);
    total += r;
    std::cout << "{\"frame\": " << f << ", \"file\": \"" << bins[f].filename().string()
              << "\", \"points\": " << raw.points.size()
              << ", \"skipped_non_finite\": " << raw.skipped_non_finite
              << ", \"rays\": " << r.rays_processed << ", \"cells\": " << r.cells_touched
              << ", \"hits\": " << r.hits << ", \"misses\": " << r.misses
              << ", \"clamped\": " << r.clamped_cells << ", \"map_cells\": " << map.size() << "}\n";
    std::cerr << "[" << f - range.first + 1 << "/" << range.last - range.first + 1 << "] "
              << bins[f].filename().string() << "\n";
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::size_t occupied = map.occupied_cells(args.threshold).size();
  std::cout << "{\"total\": true, \"policy\": \"" << to_string(options.policy) << "\", \"clamp_mode\": \""
            << to_string(options.clamp_mode) << "\", \"scans\": " << range.last - range.first + 1
            << ", \"rays\": " << total.rays_processed << ", \"hits\": " << total.hits
            << ", \"misses\": " << total.misses << ", \"map_cells\": " << map.size()
            << ", \"occupied\": " << occupied << "}\n";
  std::cerr << "integrated " << range.last - range.first + 1 << " scans in " << fmt(seconds) << " s\n";

  if (!args.output.empty()) {
    const std::size_t written =
        export_map(map, args.threshold, format_for(args.format, args.output), args.output);
    std::cerr << "wrote " << written << " cells to " << args.output.string() << "\n";
  }
  return 0;
}

// validate-density

struct DensityArgs {
  ModelFlags model;
  std::vector<double> voxel_sizes{0.6, 0.8};
  double radius = 100.0;
  double bin_width = 0.0;
  fs::path output;
  fs::path output_dir = ".";
};

int run_validate_density(const DensityArgs& args) {
  if (!args.output.empty() && args.voxel_sizes.size() != 1) {
    std::cerr << "error: --output needs exactly one --voxel-size; use --output-dir for several\n";
    return 1;
  }
  const bool to_stdout = args.output == "-";
  for (const double omega : args.voxel_sizes) {
    const SensorModelParams params = args.model.params(omega);
    SphereScanSpec spec;
    spec.radius = args.radius;
    spec.phi_s = params.density.spec.phi_s;
    spec.theta_s = params.density.spec.theta_s;
    const double bw = args.bin_width > 0.0 ? args.bin_width : omega / 2.0;

    std::cerr << "counting rays for voxel size " << fmt(omega) << " m\n";
    const DensityCurve curve = density_validation_curve(spec, omega, bw, params.density.gamma);

    std::size_t outside = 0;
    for (const auto& b : curve.bins) {
      if (b.d >= 5.0 && (b.empirical < 0.9 * b.alpha1 || b.empirical > 1.1 * b.alpha3)) ++outside;
    }

    fs::path path;
    if (to_stdout) {
      write_density_curve_csv(curve, std::cout);
    } else {
      path = !args.output.empty() ? args.output
                                  : args.output_dir / ("density_w" + fmt(omega) + ".csv");
      if (path.has_parent_path()) fs::create_directories(path.parent_path());
      write_density_curve_csv(curve, path);
    }
    std::ostream& summary = to_stdout ? std::cerr : std::cout;
    summary << "{\"omega\": " << fmt(omega) << ", \"radius\": " << fmt(args.radius)
            << ", \"bins\": " << curve.bins.size() << ", \"bins_outside_bounds\": " << outside;
    if (!to_stdout) summary << ", \"path\": \"" << path.string() << "\"";
    summary << "}\n";
  }
  return 0;
}

// ground-plane

struct GroundArgs {
  ModelFlags model;
  GroundPlaneConfig config;
  std::string clamp_mode = "per-scan";
  bool no_misses = false;
};

int run_ground_plane(GroundArgs args) {
  args.config.params = args.model.params();
  args.config.integrate_misses = !args.no_misses;
  args.config.clamp_mode = kClampModes.at(args.clamp_mode);
  std::cerr << "integrating " << args.config.num_scans << " synthetic scans per policy\n";
  const auto metrics = ground_plane_experiment(
      {UpdatePolicy::Baseline, UpdatePolicy::Method1, UpdatePolicy::Method2}, args.config);

  std::printf("%-9s %12s %12s %12s %18s %22s\n", "policy", "plane_voxels", "occupied", "holes",
              "occupied_fraction", "hit_occupied_fraction");
  for (const auto& m : metrics) {
    std::printf("%-9s %12zu %12zu %12zu %18.6f %22.6f\n", std::string(to_string(m.policy)).c_str(),
                m.plane_voxels, m.occupied_voxels, m.hole_voxels, m.occupied_fraction,
                m.hit_occupied_fraction);
  }
  return 0;
}

// export

struct ExportArgs {
  ModelFlags model;
  fs::path input;
  fs::path output;
  std::string format;
  double threshold = 0.5;
};

int run_export(const ExportArgs& args) {
  if (!fs::is_regular_file(args.input)) {
    std::cerr << "error: map file not found: " << args.input.string() << "\n";
    return 1;
  }
  const ClampBounds clamp{args.model.clamp_min, args.model.clamp_max};
  const OccupancyMap map = import_csv_map(args.input, GridConfig{args.model.voxel_size, 0.5}, clamp);
  const std::size_t written =
      export_map(map, args.threshold, format_for(args.format, args.output), args.output);
  std::cout << "{\"read\": " << map.size() << ", \"written\": " << written << ", \"path\": \""
            << args.output.string() << "\"}\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Voxel occupancy mapping with ray-density aware updates"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  BuildMapArgs build;
  auto* build_cmd = app.add_subcommand("build-map", "Integrate Velodyne scans into an occupancy map");
  add_model_flags(build_cmd, build.model);
  build_cmd->add_option("--input", build.input, "Directory of .bin scans")->required();
  build_cmd->add_option("--poses", build.poses, "Pose file, 12 reals per line")->required();
  build_cmd->add_option("--frames", build.frames, "Inclusive frame range A..B (default: all)");
  build_cmd->add_option("--max-range", build.max_range, "Returns beyond this range become misses (m)")
      ->check(CLI::PositiveNumber);
  build_cmd->add_option("--method", build.method, "Update policy")
      ->check(CLI::IsMember({"baseline", "m1", "m2"}));
  build_cmd->add_option("--clamp-mode", build.clamp_mode, "Clamp after each scan or each measurement")
      ->check(CLI::IsMember({"per-scan", "per-measurement"}));
  build_cmd->add_flag("--no-misses", build.no_misses, "Only integrate impacts");
  build_cmd->add_option("--output", build.output, "Export path for occupied cells");
  build_cmd->add_option("--format", build.format, "Export format (default: from extension)")
      ->check(CLI::IsMember({"ply", "csv"}));
  build_cmd->add_option("--threshold", build.threshold, "Occupancy threshold for export")
      ->check(CLI::Range(0.0, 1.0));

  DensityArgs density;
  auto* density_cmd =
      app.add_subcommand("validate-density", "Compare sphere-scan ray counts with the density model");
  add_model_flags(density_cmd, density.model, false);
  density_cmd->add_option("--voxel-size", density.voxel_sizes, "Voxel sizes to evaluate (m)")
      ->check(CLI::PositiveNumber);
  density_cmd->add_option("--radius", density.radius, "Sphere radius (m)")->check(CLI::PositiveNumber);
  density_cmd->add_option("--bin-width", density.bin_width, "Distance bin width (m, default omega/2)")
      ->check(CLI::NonNegativeNumber);
  density_cmd->add_option("--output", density.output, "Curve CSV path, '-' for stdout");
  density_cmd->add_option("--output-dir", density.output_dir, "Directory for density_w<size>.csv");

  GroundArgs ground;
  auto* ground_cmd =
      app.add_subcommand("ground-plane", "Hole counts of the three policies on a synthetic flat ground");
  add_model_flags(ground_cmd, ground.model);
  ground_cmd->add_option("--scans", ground.config.num_scans, "Number of scans")
      ->check(CLI::PositiveNumber);
  ground_cmd->add_option("--spacing", ground.config.scan_spacing, "Distance between scan origins (m)");
  ground_cmd->add_option("--sensor-height", ground.config.sensor_height, "Sensor height above ground (m)")
      ->check(CLI::PositiveNumber);
  ground_cmd->add_option("--ground-z", ground.config.ground_z, "Ground plane height (m)");
  ground_cmd->add_option("--eval-radius", ground.config.eval_radius, "Evaluation disk radius (m)")
      ->check(CLI::PositiveNumber);
  ground_cmd->add_option("--max-range", ground.config.max_range, "Maximum sensor range (m)")
      ->check(CLI::PositiveNumber);
  ground_cmd->add_option("--clamp-mode", ground.clamp_mode, "Clamp after each scan or each measurement")
      ->check(CLI::IsMember({"per-scan", "per-measurement"}));
  ground_cmd->add_flag("--no-misses", ground.no_misses, "Only integrate impacts");

  ExportArgs exp;
  auto* export_cmd = app.add_subcommand("export", "Re-export a CSV map as PLY or CSV");
  add_model_flags(export_cmd, exp.model);
  export_cmd->add_option("--input", exp.input, "CSV map written by build-map")->required();
  export_cmd->add_option("--output", exp.output, "Output path")->required();
  export_cmd->add_option("--format", exp.format, "Export format (default: from extension)")
      ->check(CLI::IsMember({"ply", "csv"}));
  export_cmd->add_option("--threshold", exp.threshold, "Occupancy threshold")
      ->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*build_cmd) return run_build_map(build);
    if (*density_cmd) return run_validate_density(density);
    if (*ground_cmd) return run_ground_plane(ground);
    if (*export_cmd) return run_export(exp);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
