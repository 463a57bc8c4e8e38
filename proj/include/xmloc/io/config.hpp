#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xmloc/core/error.hpp"
#include "xmloc/core/parallel.hpp"
#include "xmloc/pipeline/localizer.hpp"
#include "xmloc/synth/scene.hpp"
#include "xmloc/synth/town.hpp"

namespace xmloc {

using Json = nlohmann::ordered_json;

namespace detail {

// Reads known keys of one JSON object and rejects any other key.
class Fields {
 public:
  Fields(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw InvalidArgument(where_ + ": expected a JSON object");
  }

  template <class T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const Json::exception& e) {
      throw InvalidArgument(where_ + "." + key + ": " + e.what());
    }
  }

  const Json* sub(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string path(const char* key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) throw InvalidArgument(where_ + ": unknown key '" + item.key() + "'");
  }

 private:
  const Json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

inline Json range_json(const Range& r) { return Json::array({r.min, r.max}); }

inline Range range_from(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw InvalidArgument(where + ": expected [min, max]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

// ---- voxel ----

inline Json to_json(const VoxelConfig& v) {
  return Json{{"dx", v.dx},
              {"dy", v.dy},
              {"dz", v.dz},
              {"range_x", detail::range_json(v.range_x)},
              {"range_y", detail::range_json(v.range_y)},
              {"range_z", detail::range_json(v.range_z)},
              {"max_points_per_voxel", v.max_points_per_voxel}};
}

inline VoxelConfig voxel_from_json(const Json& j, const std::string& where = "voxel") {
  VoxelConfig v;
  detail::Fields f(j, where);
  f.read("dx", v.dx);
  f.read("dy", v.dy);
  f.read("dz", v.dz);
  if (const Json* r = f.sub("range_x")) v.range_x = detail::range_from(*r, f.path("range_x"));
  if (const Json* r = f.sub("range_y")) v.range_y = detail::range_from(*r, f.path("range_y"));
  if (const Json* r = f.sub("range_z")) v.range_z = detail::range_from(*r, f.path("range_z"));
  f.read("max_points_per_voxel", v.max_points_per_voxel);
  f.finish();
  return v;
}

// ---- localizer ----

inline const char* rescale_name(RescaleMode m) { return m == RescaleMode::Revoxelize ? "revoxelize" : "nearest"; }

inline RescaleMode rescale_from_name(const std::string& s) {
  if (s == "revoxelize") return RescaleMode::Revoxelize;
  if (s == "nearest") return RescaleMode::Nearest;
  throw InvalidArgument("rescale: expected 'revoxelize' or 'nearest', got '" + s + "'");
}

// Worker count is a run-level setting and is not part of this object.
inline Json to_json(const LocalizerConfig& c) {
  return Json{{"voxel", to_json(c.voxel)},
              {"channels", c.channels},
              {"map_stride", c.map_stride},
              {"n_rot", c.n_rot},
              {"scale",
               {{"min", c.scale_min},
                {"max", c.scale_max},
                {"bins", c.scale_bins},
                {"temperature", c.scale_temperature},
                {"rotations", c.scale_rotations}}},
              {"stages",
               {{"feature", c.feature_matching},
                {"skeleton", c.skeleton_matching},
                {"scale_alignment", c.scale_alignment}}},
              {"channel_pairing", c.channel_pairing},
              {"rescale", rescale_name(c.rescale)},
              {"skeleton_min_span", c.skeleton_min_span},
              {"skeleton_tolerance", c.skeleton_tolerance},
              {"skeleton_background", c.skeleton_background},
              {"adaptive_stride", c.adaptive_stride}};
}

inline LocalizerConfig localizer_from_json(const Json& j, const std::string& where = "localizer") {
  LocalizerConfig c;
  detail::Fields f(j, where);
  if (const Json* v = f.sub("voxel")) c.voxel = voxel_from_json(*v, f.path("voxel"));
  f.read("channels", c.channels);
  f.read("map_stride", c.map_stride);
  f.read("n_rot", c.n_rot);
  if (const Json* s = f.sub("scale")) {
    detail::Fields g(*s, f.path("scale"));
    g.read("min", c.scale_min);
    g.read("max", c.scale_max);
    g.read("bins", c.scale_bins);
    g.read("temperature", c.scale_temperature);
    g.read("rotations", c.scale_rotations);
    g.finish();
  }
  if (const Json* s = f.sub("stages")) {
    detail::Fields g(*s, f.path("stages"));
    g.read("feature", c.feature_matching);
    g.read("skeleton", c.skeleton_matching);
    g.read("scale_alignment", c.scale_alignment);
    g.finish();
  }
  f.read("channel_pairing", c.channel_pairing);
  std::string rescale = rescale_name(c.rescale);
  f.read("rescale", rescale);
  c.rescale = rescale_from_name(rescale);
  f.read("skeleton_min_span", c.skeleton_min_span);
  f.read("skeleton_tolerance", c.skeleton_tolerance);
  f.read("skeleton_background", c.skeleton_background);
  f.read("adaptive_stride", c.adaptive_stride);
  f.finish();
  return c;
}

// ---- synth ----

inline Json to_json(const synth::TownParams& p) {
  return Json{{"world_size", p.world_size},       {"resolution", p.resolution},
              {"road_pitch", p.road_pitch},       {"road_width", p.road_width},
              {"building_density", p.building_density}, {"min_lot", p.min_lot},
              {"max_lot", p.max_lot},             {"min_setback", p.min_setback},
              {"max_setback", p.max_setback},     {"min_height", p.min_height},
              {"max_height", p.max_height},       {"map_cars", p.map_cars}};
}

inline synth::TownParams town_from_json(const Json& j, const std::string& where = "town") {
  synth::TownParams p;
  detail::Fields f(j, where);
  f.read("world_size", p.world_size);
  f.read("resolution", p.resolution);
  f.read("road_pitch", p.road_pitch);
  f.read("road_width", p.road_width);
  f.read("building_density", p.building_density);
  f.read("min_lot", p.min_lot);
  f.read("max_lot", p.max_lot);
  f.read("min_setback", p.min_setback);
  f.read("max_setback", p.max_setback);
  f.read("min_height", p.min_height);
  f.read("max_height", p.max_height);
  f.read("map_cars", p.map_cars);
  f.finish();
  return p;
}

inline Json to_json(const synth::LidarParams& p) {
  return Json{{"n_azimuth", p.n_azimuth},
              {"max_range", p.max_range},
              {"sensor_forward", p.sensor_forward},
              {"sensor_height", p.sensor_height},
              {"elevation_samples", p.elevation_samples},
              {"vfov_up_deg", p.vfov_up_deg},
              {"range_noise", p.range_noise},
              {"seed", p.seed}};
}

inline synth::LidarParams lidar_from_json(const Json& j, const std::string& where = "lidar") {
  synth::LidarParams p;
  detail::Fields f(j, where);
  f.read("n_azimuth", p.n_azimuth);
  f.read("max_range", p.max_range);
  f.read("sensor_forward", p.sensor_forward);
  f.read("sensor_height", p.sensor_height);
  f.read("elevation_samples", p.elevation_samples);
  f.read("vfov_up_deg", p.vfov_up_deg);
  f.read("range_noise", p.range_noise);
  f.read("seed", p.seed);
  f.finish();
  return p;
}

inline Json to_json(const synth::AugmentationParams& a) {
  return Json{{"patch_size", a.patch_size},
              {"stride", a.stride},
              {"bev_cell", a.bev_cell},
              {"scale_min", a.scale_min},
              {"scale_max", a.scale_max},
              {"scale_choices", a.scale_choices},
              {"max_offset", a.max_offset},
              {"rotation_range", a.rotation_range},
              {"time_lag", a.time_lag},
              {"scan_cars", a.scan_cars},
              {"brightness_jitter", a.brightness_jitter},
              {"contrast_jitter", a.contrast_jitter},
              {"pixel_noise", a.pixel_noise},
              {"heading_jitter_deg", a.heading_jitter_deg},
              {"skeleton_radius", a.skeleton_radius},
              {"max_retries", a.max_retries},
              {"lidar", to_json(a.lidar)}};
}

inline synth::AugmentationParams augmentation_from_json(const Json& j, const std::string& where = "augmentation") {
  synth::AugmentationParams a;
  detail::Fields f(j, where);
  f.read("patch_size", a.patch_size);
  f.read("stride", a.stride);
  f.read("bev_cell", a.bev_cell);
  f.read("scale_min", a.scale_min);
  f.read("scale_max", a.scale_max);
  f.read("scale_choices", a.scale_choices);
  f.read("max_offset", a.max_offset);
  f.read("rotation_range", a.rotation_range);
  f.read("time_lag", a.time_lag);
  f.read("scan_cars", a.scan_cars);
  f.read("brightness_jitter", a.brightness_jitter);
  f.read("contrast_jitter", a.contrast_jitter);
  f.read("pixel_noise", a.pixel_noise);
  f.read("heading_jitter_deg", a.heading_jitter_deg);
  f.read("skeleton_radius", a.skeleton_radius);
  f.read("max_retries", a.max_retries);
  if (const Json* l = f.sub("lidar")) a.lidar = lidar_from_json(*l, f.path("lidar"));
  f.finish();
  return a;
}

// ---- run config ----

/// Everything a CLI run depends on. Defaults:
///   localizer      2 m pillars over [-100, 100] m, 8 channels, map stride 4,
///                  64 rotations, 33 scale bins over [0.5, 10]
///   town           800 m world at 0.5 m per cell
///   augmentation   256 px patches, scale 1, offsets up to 1/4 of the half extent
///   scenes_per_town  consecutive scene seeds sharing one town
///   workers        hardware concurrency
struct RunConfig {
  LocalizerConfig localizer;
  synth::TownParams town;
  synth::AugmentationParams augmentation;
  int scenes_per_town = 10;
  std::uint64_t seed = 0;
  std::string dataset;
  std::string output_dir = "out";
  int workers = default_workers();

  void validate() const {
    localizer.validate();
    town.validate();
    augmentation.validate();
    if (scenes_per_town < 1) throw InvalidArgument("config: scenes_per_town must be >= 1");
    if (workers < 1) throw InvalidArgument("config: workers must be >= 1");
  }

  LocalizerConfig effective_localizer() const {
    LocalizerConfig c = localizer;
    c.workers = workers;
    return c;
  }
};

inline Json to_json(const RunConfig& c) {
  return Json{{"localizer", to_json(c.localizer)},
              {"town", to_json(c.town)},
              {"augmentation", to_json(c.augmentation)},
              {"scenes_per_town", c.scenes_per_town},
              {"seed", c.seed},
              {"dataset", c.dataset},
              {"output_dir", c.output_dir},
              {"workers", c.workers}};
}

inline RunConfig run_config_from_json(const Json& j) {
  RunConfig c;
  detail::Fields f(j, "config");
  if (const Json* s = f.sub("localizer")) c.localizer = localizer_from_json(*s, "config.localizer");
  if (const Json* s = f.sub("town")) c.town = town_from_json(*s, "config.town");
  if (const Json* s = f.sub("augmentation")) c.augmentation = augmentation_from_json(*s, "config.augmentation");
  f.read("scenes_per_town", c.scenes_per_town);
  f.read("seed", c.seed);
  f.read("dataset", c.dataset);
  f.read("output_dir", c.output_dir);
  f.read("workers", c.workers);
  f.finish();
  c.validate();
  return c;
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputFormatError(path.string() + ": " + e.what());
  }
}

inline void write_json_file(const Json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  try {
    return run_config_from_json(read_json_file(path));
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

// Snapshot of the configuration a run actually used.
inline void write_effective_config(const RunConfig& c, const std::filesystem::path& dir) {
  write_json_file(to_json(c), dir / "effective_config.json");
}

}  // namespace xmloc
