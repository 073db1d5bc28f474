#include "occmap/scan_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>

#include <Eigen/LU>

#include "occmap/errors.hpp"

namespace occmap {

namespace {

constexpr std::size_t kRecordBytes = 16;
constexpr std::string_view kCsvHeader = "i,j,k,x,y,z,occupancy";

float decode_le_float(const unsigned char* bytes) {
  const std::uint32_t bits = static_cast<std::uint32_t>(bytes[0]) |
                             (static_cast<std::uint32_t>(bytes[1]) << 8) |
                             (static_cast<std::uint32_t>(bytes[2]) << 16) |
                             (static_cast<std::uint32_t>(bytes[3]) << 24);
  return std::bit_cast<float>(bits);
}

bool parse_double(std::string_view token, double& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    const std::size_t start = pos;
    while (pos < line.size() && !std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    if (pos > start) tokens.push_back(line.substr(start, pos - start));
  }
  return tokens;
}

std::string format_real(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof(buf), "%.9g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

std::vector<std::pair<VoxelKey, double>> sorted_occupied(const OccupancyMap& map, double threshold) {
  auto cells = map.occupied_cells(threshold);
  std::sort(cells.begin(), cells.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return cells;
}

}  // namespace

RawScan read_velodyne_bin(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string());

  const std::size_t whole = bytes.size() / kRecordBytes * kRecordBytes;
  if (whole != bytes.size()) {
    throw FormatError(path.string() + ": truncated point record at byte offset " +
                          std::to_string(whole),
                      whole);
  }

  RawScan scan;
  scan.points.reserve(bytes.size() / kRecordBytes);
  for (std::size_t off = 0; off < bytes.size(); off += kRecordBytes) {
    const float x = decode_le_float(&bytes[off]);
    const float y = decode_le_float(&bytes[off + 4]);
    const float z = decode_le_float(&bytes[off + 8]);
    const float r = decode_le_float(&bytes[off + 12]);
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z) || !std::isfinite(r)) {
      ++scan.skipped_non_finite;
      continue;
    }
    scan.points.push_back({Point3(x, y, z), r});
  }
  return scan;
}

void validate_pose(const PoseRecord& pose, double tolerance) {
  const Eigen::Matrix3d& R = pose.rotation;
  if (!R.allFinite() || !pose.translation.allFinite()) {
    throw ValidationError("pose contains non-finite values", std::numeric_limits<double>::infinity());
  }
  const double ortho = (R.transpose() * R - Eigen::Matrix3d::Identity()).norm();
  if (ortho > tolerance) {
    throw ValidationError("rotation is not orthonormal: |R^T R - I| = " + format_real(ortho), ortho);
  }
  const double det_dev = std::abs(R.determinant() - 1.0);
  if (det_dev > tolerance) {
    throw ValidationError("rotation determinant deviates from +1 by " + format_real(det_dev), det_dev);
  }
}

std::vector<PoseRecord> read_poses(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::vector<PoseRecord> poses;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_whitespace(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 12) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected 12 values, found " +
                           std::to_string(tokens.size()),
                       line_no);
    }
    double v[12];
    for (std::size_t n = 0; n < 12; ++n) {
      if (!parse_double(tokens[n], v[n])) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": invalid number '" +
                             std::string(tokens[n]) + "'",
                         line_no);
      }
    }
    PoseRecord pose;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) pose.rotation(r, c) = v[r * 4 + c];
      pose.translation[r] = v[r * 4 + 3];
    }
    try {
      validate_pose(pose);
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what(),
                            e.deviation());
    }
    poses.push_back(pose);
  }
  return poses;
}

Scan to_world_scan(const RawScan& raw, const PoseRecord& pose, double max_range) {
  if (!(max_range > 0.0)) throw DomainError("to_world_scan: max range must be positive");
  Scan scan;
  scan.origin = pose.translation;
  scan.points.reserve(raw.points.size());
  scan.hit_flags.reserve(raw.points.size());
  for (const RawPoint& rp : raw.points) {
    Point3 p = rp.position;
    const double range = p.norm();
    const bool hit = range <= max_range;
    if (!hit) p *= max_range / range;
    scan.points.push_back(pose.rotation * p + pose.translation);
    scan.hit_flags.push_back(hit);
  }
  return scan;
}

std::optional<ExportFormat> parse_export_format(std::string_view name) {
  if (name == "ply") return ExportFormat::Ply;
  if (name == "csv") return ExportFormat::Csv;
  return std::nullopt;
}

std::size_t export_map(const OccupancyMap& map, double threshold, ExportFormat format,
                       const std::filesystem::path& path) {
  const auto cells = sorted_occupied(map, threshold);
  const double omega = map.voxel_size();

  std::ostringstream out;
  if (format == ExportFormat::Csv) {
    out << kCsvHeader << '\n';
    for (const auto& [key, p] : cells) {
      const Point3 c = voxel_center(key, omega);
      out << key.i << ',' << key.j << ',' << key.k << ',' << format_real(c.x()) << ','
          << format_real(c.y()) << ',' << format_real(c.z()) << ',' << format_real(p) << '\n';
    }
  } else {
    out << "ply\nformat ascii 1.0\nelement vertex " << cells.size()
        << "\nproperty float x\nproperty float y\nproperty float z\nproperty float occupancy\n"
           "end_header\n";
    for (const auto& [key, p] : cells) {
      const Point3 c = voxel_center(key, omega);
      out << format_real(c.x()) << ' ' << format_real(c.y()) << ' ' << format_real(c.z()) << ' '
          << format_real(p) << '\n';
    }
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot write " + path.string());
  const std::string text = out.str();
  file.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!file) throw IoError("write failed for " + path.string());
  return cells.size();
}

OccupancyMap import_csv_map(const std::filesystem::path& path, GridConfig grid, ClampBounds clamp) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  OccupancyMap map(grid, clamp);

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != kCsvHeader) throw ParseError(path.string() + ": unexpected CSV header", 1);
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (std::size_t comma; (comma = rest.find(',')) != std::string_view::npos;) {
      fields.push_back(rest.substr(0, comma));
      rest.remove_prefix(comma + 1);
    }
    fields.push_back(rest);
    if (fields.size() != 7) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected 7 fields", line_no);
    }
    VoxelKey key;
    for (int a = 0; a < 3; ++a) {
      const auto f = fields[static_cast<std::size_t>(a)];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), key[a]);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": invalid key", line_no);
      }
    }
    double p = 0.0;
    if (!parse_double(fields[6], p) || !(p > 0.0 && p < 1.0)) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": invalid occupancy", line_no);
    }
    map.apply_log_odds(key, log_odds(p) - map.prior_log_odds());
  }
  return map;
}

}  // namespace occmap
