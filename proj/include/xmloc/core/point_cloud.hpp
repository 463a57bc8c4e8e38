#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "xmloc/core/error.hpp"

namespace xmloc {

// Sensor frame: x forward, y left, z up, meters.
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
};

class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::vector<Point3> points) : points_(std::move(points)) {
    for (const auto& p : points_)
      if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
        throw InvalidArgument("PointCloud: non-finite coordinate");
  }

  const std::vector<Point3>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;

 private:
  std::vector<Point3> points_;
};

namespace detail {

inline std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big)
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  return v;
}

}  // namespace detail

// Binary layout: consecutive little-endian float32 triples (x, y, z).
inline void write_point_cloud_bin(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& p : cloud.points()) {
    for (double c : {p.x, p.y, p.z}) {
      const std::uint32_t bits = detail::to_little_endian(std::bit_cast<std::uint32_t>(static_cast<float>(c)));
      out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline PointCloud read_point_cloud_bin(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputFormatError("cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % 12 != 0)
    throw InputFormatError(path.string() + ": size is not a multiple of 12 bytes");
  std::vector<Point3> pts(bytes.size() / 12);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    float xyz[3];
    for (int k = 0; k < 3; ++k) {
      std::uint32_t bits;
      std::memcpy(&bits, bytes.data() + 12 * i + 4 * k, 4);
      xyz[k] = std::bit_cast<float>(detail::to_little_endian(bits));
    }
    pts[i] = {xyz[0], xyz[1], xyz[2]};
  }
  try {
    return PointCloud(std::move(pts));
  } catch (const InvalidArgument& e) {
    throw InputFormatError(path.string() + ": " + e.what());
  }
}

inline void write_point_cloud_csv(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "x,y,z\n";
  out.precision(17);
  for (const auto& p : cloud.points()) out << p.x << ',' << p.y << ',' << p.z << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

inline PointCloud read_point_cloud_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputFormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InputFormatError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,y,z") throw InputFormatError(path.string() + ": expected header \"x,y,z\"");
  std::vector<Point3> pts;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    Point3 p;
    char c1 = 0, c2 = 0;
    if (!(ss >> p.x >> c1 >> p.y >> c2 >> p.z) || c1 != ',' || c2 != ',')
      throw InputFormatError(path.string() + ": malformed row at line " + std::to_string(lineno));
    pts.push_back(p);
  }
  try {
    return PointCloud(std::move(pts));
  } catch (const InvalidArgument& e) {
    throw InputFormatError(path.string() + ": " + e.what());
  }
}

// Dispatches on extension: ".csv" is text, anything else the binary layout.
inline PointCloud read_point_cloud(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return read_point_cloud_csv(path);
  return read_point_cloud_bin(path);
}

}  // namespace xmloc
