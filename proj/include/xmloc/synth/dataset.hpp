#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xmloc/core/error.hpp"
#include "xmloc/core/parallel.hpp"
#include "xmloc/core/point_cloud.hpp"
#include "xmloc/image/image_io.hpp"
#include "xmloc/io/checksum.hpp"
#include "xmloc/io/config.hpp"
#include "xmloc/synth/scene.hpp"
#include "xmloc/synth/town.hpp"

namespace xmloc::synth {

// Scene directory layout.
inline constexpr const char* kScanFile = "scan.bin";
inline constexpr const char* kPatchFile = "patch.png";
inline constexpr const char* kMetaFile = "meta.json";
inline constexpr const char* kSkeletonFile = "skeleton.pgm";
inline constexpr const char* kManifestFile = "manifest.json";

inline std::string scene_dir_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%06zu", index);
  return buf;
}

// Consecutive scene seeds share a town; the town depends only on the seed.
inline std::uint64_t town_seed_for(std::uint64_t scene_seed, int scenes_per_town) {
  if (scenes_per_town < 1) throw InvalidArgument("town_seed_for: scenes_per_town must be >= 1");
  return scene_seed / static_cast<std::uint64_t>(scenes_per_town);
}

inline Scene generate_scene(std::uint64_t seed, const TownParams& tp, const AugmentationParams& aug,
                            int scenes_per_town = 10) {
  const std::uint64_t ts = town_seed_for(seed, scenes_per_town);
  Scene s = render_scene(generate_town(ts, tp), seed, aug, tp);
  s.town_seed = ts;
  return s;
}

/// Scenes for seeds first, first + 1, ... Each town is generated once and
/// shared by the scenes that use it; results do not depend on `workers`.
inline std::vector<Scene> generate_scenes(std::uint64_t first, std::size_t count, const TownParams& tp,
                                          const AugmentationParams& aug, int scenes_per_town = 10, int workers = 1) {
  std::vector<Scene> out(count);
  std::size_t k = 0;
  while (k < count) {
    const std::uint64_t ts = town_seed_for(first + k, scenes_per_town);
    std::size_t end = k;
    while (end < count && town_seed_for(first + end, scenes_per_town) == ts) ++end;
    const TownMap town = generate_town(ts, tp);
    parallel_for(end - k, workers, [&](int, std::size_t i) {
      out[k + i] = render_scene(town, first + k + i, aug, tp);
      out[k + i].town_seed = ts;
    });
    k = end;
  }
  return out;
}

// ---- meta.json ----

inline Json scene_meta(const Scene& s) {
  return Json{{"format", "xmloc-scene/1"},
              {"seed", s.seed},
              {"town_seed", s.town_seed},
              {"gt_pose", {{"u", s.gt_pose.u()}, {"v", s.gt_pose.v()}, {"theta", s.gt_pose.theta()}}},
              {"gt_scale", s.gt_scale},
              {"meters_per_pixel", s.meters_per_pixel},
              {"patch_center", Json::array({s.patch_center.x, s.patch_center.y})},
              {"patch_rotation", s.patch_rotation},
              {"ego", {{"u", s.ego.u}, {"v", s.ego.v}, {"heading", s.ego.heading}}},
              {"augmentation", to_json(s.aug)}};
}

namespace detail {

inline void apply_meta(Scene& s, const Json& j) {
  xmloc::detail::Fields f(j, "meta");
  std::string format;
  f.read("format", format);
  if (format != "xmloc-scene/1") throw InvalidArgument("meta: unsupported format '" + format + "'");
  f.read("seed", s.seed);
  f.read("town_seed", s.town_seed);
  if (const Json* p = f.sub("gt_pose")) {
    double u = 0, v = 0, th = 0;
    xmloc::detail::Fields g(*p, "meta.gt_pose");
    g.read("u", u);
    g.read("v", v);
    g.read("theta", th);
    g.finish();
    s.gt_pose = Pose(u, v, th);
  } else {
    throw InvalidArgument("meta: gt_pose missing");
  }
  f.read("gt_scale", s.gt_scale);
  f.read("meters_per_pixel", s.meters_per_pixel);
  if (const Json* c = f.sub("patch_center")) {
    const Range r = xmloc::detail::range_from(*c, "meta.patch_center");
    s.patch_center = {r.min, r.max};
  }
  f.read("patch_rotation", s.patch_rotation);
  if (const Json* e = f.sub("ego")) {
    xmloc::detail::Fields g(*e, "meta.ego");
    g.read("u", s.ego.u);
    g.read("v", s.ego.v);
    g.read("heading", s.ego.heading);
    g.finish();
  }
  if (const Json* a = f.sub("augmentation")) s.aug = augmentation_from_json(*a, "meta.augmentation");
  f.finish();
}

inline Image8 skeleton_image(const Grid2D& g) {
  Image8 img(g.width(), g.height(), 1);
  for (std::size_t i = 0; i < g.cells(); ++i) img.data[i] = g.values()[i] > 0.5 ? 255 : 0;
  return img;
}

}  // namespace detail

// ---- scene directories ----

inline void write_scene(const Scene& s, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_point_cloud_bin(s.scan, dir / kScanFile);
  write_png(s.patch_image, dir / kPatchFile);
  write_json_file(scene_meta(s), dir / kMetaFile);
  write_pgm(detail::skeleton_image(s.gt_skeleton), dir / kSkeletonFile);
}

/// Inverse of write_scene. Missing or malformed files raise InputFormatError
/// naming the file.
inline Scene read_scene_dir(const std::filesystem::path& dir) {
  auto need = [&](const char* name) {
    const auto p = dir / name;
    if (!std::filesystem::is_regular_file(p)) throw InputFormatError(p.string() + ": file not found");
    return p;
  };
  Scene s;
  const auto meta_path = need(kMetaFile);
  try {
    detail::apply_meta(s, read_json_file(meta_path));
  } catch (const InvalidArgument& e) {
    throw InputFormatError(meta_path.string() + ": " + e.what());
  } catch (const Json::exception& e) {
    throw InputFormatError(meta_path.string() + ": " + e.what());
  }

  const auto scan_path = need(kScanFile);
  try {
    s.scan = read_point_cloud_bin(scan_path);
  } catch (const InputFormatError&) {
    throw;
  } catch (const Error& e) {
    throw InputFormatError(scan_path.string() + ": " + e.what());
  }

  const auto patch_path = need(kPatchFile);
  s.patch_image = read_png(patch_path);
  if (s.patch_image.channels != 1 || s.patch_image.width != s.patch_image.height)
    throw InputFormatError(patch_path.string() + ": expected a square grayscale patch");
  s.patch = MapPatch(luminance_from_image(s.patch_image));

  const auto skel_path = need(kSkeletonFile);
  const Image8 sk = read_pgm(skel_path);
  s.gt_skeleton = Grid2D(sk.height, sk.width, 1);
  for (std::size_t i = 0; i < s.gt_skeleton.cells(); ++i) s.gt_skeleton.values()[i] = sk.data[i] > 127 ? 1.0 : 0.0;
  return s;
}

inline Scene read_scene(const std::filesystem::path& dataset, std::size_t index) {
  return read_scene_dir(dataset / scene_dir_name(index));
}

// ---- datasets ----

struct ManifestEntry {
  std::size_t id = 0;
  std::string dir;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> sha256;  // file name -> digest
};

inline ManifestEntry manifest_entry(const std::filesystem::path& root, std::size_t id, std::uint64_t seed) {
  ManifestEntry e{id, scene_dir_name(id), seed, {}};
  for (const char* f : {kScanFile, kPatchFile, kMetaFile, kSkeletonFile}) e.sha256[f] = sha256_file(root / e.dir / f);
  return e;
}

inline Json manifest_json(const std::vector<ManifestEntry>& entries) {
  Json scenes = Json::array();
  for (const auto& e : entries) {
    Json files = Json::object();
    for (const auto& [name, digest] : e.sha256) files[name] = digest;
    scenes.push_back(Json{{"id", e.id}, {"dir", e.dir}, {"seed", e.seed}, {"sha256", files}});
  }
  return Json{{"format", "xmloc-dataset/1"}, {"count", entries.size()}, {"scenes", scenes}};
}

inline std::vector<ManifestEntry> read_manifest(const std::filesystem::path& root) {
  const auto path = root / kManifestFile;
  if (!std::filesystem::is_regular_file(path)) throw InputFormatError(path.string() + ": file not found");
  const Json j = read_json_file(path);
  std::vector<ManifestEntry> out;
  try {
    if (j.at("format").get<std::string>() != "xmloc-dataset/1") throw InputFormatError(path.string() + ": unsupported format");
    for (const auto& s : j.at("scenes")) {
      ManifestEntry e{s.at("id").get<std::size_t>(), s.at("dir").get<std::string>(), s.at("seed").get<std::uint64_t>(), {}};
      for (const auto& item : s.at("sha256").items()) e.sha256[item.key()] = item.value().get<std::string>();
      out.push_back(std::move(e));
    }
  } catch (const Json::exception& e) {
    throw InputFormatError(path.string() + ": " + e.what());
  }
  return out;
}

// Writes scene_000000, scene_000001, ... and a manifest with SHA-256 digests.
inline void write_dataset(const std::vector<Scene>& scenes, const std::filesystem::path& root) {
  std::error_code ec;
  std::filesystem::create_directories(root, ec);
  if (ec) throw IoError("cannot create " + root.string() + ": " + ec.message());
  std::vector<ManifestEntry> entries;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    write_scene(scenes[i], root / scene_dir_name(i));
    entries.push_back(manifest_entry(root, i, scenes[i].seed));
  }
  write_json_file(manifest_json(entries), root / kManifestFile);
}

inline std::vector<Scene> read_dataset(const std::filesystem::path& root) {
  std::vector<Scene> out;
  for (const auto& e : read_manifest(root)) out.push_back(read_scene_dir(root / e.dir));
  return out;
}

}  // namespace xmloc::synth
