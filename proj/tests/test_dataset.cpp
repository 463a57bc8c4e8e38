#include <gtest/gtest.h>

#include <set>

#include "test_support.hpp"
#include "xmloc/synth/dataset.hpp"

using namespace xmloc;
using namespace xmloc::synth;

namespace {

TownParams small_town() {
  TownParams p;
  p.world_size = 400.0;
  return p;
}

void expect_same_scene(const Scene& a, const Scene& b) {
  // Scans are stored as float32.
  ASSERT_EQ(a.scan.size(), b.scan.size());
  for (std::size_t i = 0; i < a.scan.size(); ++i) {
    EXPECT_EQ(static_cast<float>(a.scan.points()[i].x), static_cast<float>(b.scan.points()[i].x));
    EXPECT_EQ(static_cast<float>(a.scan.points()[i].y), static_cast<float>(b.scan.points()[i].y));
    EXPECT_EQ(static_cast<float>(a.scan.points()[i].z), static_cast<float>(b.scan.points()[i].z));
  }
  EXPECT_EQ(a.patch_image, b.patch_image);
  EXPECT_EQ(a.patch.luminance(), b.patch.luminance());
  EXPECT_NEAR(a.gt_pose.u(), b.gt_pose.u(), 1e-6);
  EXPECT_NEAR(a.gt_pose.v(), b.gt_pose.v(), 1e-6);
  EXPECT_NEAR(a.gt_pose.theta(), b.gt_pose.theta(), 1e-6);
  EXPECT_NEAR(a.gt_scale, b.gt_scale, 1e-6);
  EXPECT_EQ(a.gt_skeleton.values().size(), b.gt_skeleton.values().size());
  EXPECT_TRUE(std::equal(a.gt_skeleton.values().begin(), a.gt_skeleton.values().end(), b.gt_skeleton.values().begin()));
  EXPECT_EQ(a.seed, b.seed);
  EXPECT_EQ(a.town_seed, b.town_seed);
  EXPECT_NEAR(a.meters_per_pixel, b.meters_per_pixel, 1e-9);
  EXPECT_NEAR(a.patch_center.x, b.patch_center.x, 1e-6);
  EXPECT_NEAR(a.patch_center.y, b.patch_center.y, 1e-6);
  EXPECT_NEAR(a.patch_rotation, b.patch_rotation, 1e-9);
  EXPECT_EQ(a.ego, b.ego);
  EXPECT_EQ(a.aug.patch_size, b.aug.patch_size);
  EXPECT_EQ(a.aug.scale_choices, b.aug.scale_choices);
  EXPECT_EQ(a.aug.max_offset, b.aug.max_offset);
}

}  // namespace

TEST(SceneIo, RoundTrip) {
  test::TempDir dir;
  AugmentationParams aug;
  aug.scale_choices = {1.0, 2.0};
  aug.time_lag = true;
  const Scene s = generate_scene(13, small_town(), aug);
  write_scene(s, dir / "scene");
  expect_same_scene(s, read_scene_dir(dir / "scene"));
}

TEST(SceneIo, MissingMetaNamesFile) {
  test::TempDir dir;
  write_scene(generate_scene(1, small_town(), AugmentationParams{}), dir / "s");
  std::filesystem::remove(dir / "s" / "meta.json");
  try {
    read_scene_dir(dir / "s");
    FAIL() << "expected InputFormatError";
  } catch (const InputFormatError& e) {
    EXPECT_NE(std::string(e.what()).find("meta.json"), std::string::npos);
  }
}

TEST(SceneIo, CorruptFilesNameFile) {
  test::TempDir dir;
  write_scene(generate_scene(1, small_town(), AugmentationParams{}), dir / "s");
  auto expect_named = [&](const char* file) {
    try {
      read_scene_dir(dir / "s");
      FAIL() << "expected InputFormatError for " << file;
    } catch (const InputFormatError& e) {
      EXPECT_NE(std::string(e.what()).find(file), std::string::npos) << e.what();
    }
  };
  const std::string meta = test::file_bytes(dir / "s" / "meta.json");
  test::write_text(dir / "s" / "meta.json", "{ not json");
  expect_named("meta.json");
  test::write_text(dir / "s" / "meta.json", R"({"format": "xmloc-scene/1", "bogus": 1})");
  expect_named("meta.json");
  test::write_text(dir / "s" / "meta.json", meta);
  test::write_text(dir / "s" / "scan.bin", "abcde");
  expect_named("scan.bin");
  std::filesystem::remove(dir / "s" / "scan.bin");
  expect_named("scan.bin");
}

TEST(Dataset, TenScenesDistinctAndReproducible) {
  test::TempDir a, b;
  const auto scenes = generate_scenes(0, 10, small_town(), AugmentationParams{});
  write_dataset(scenes, a.path());
  write_dataset(generate_scenes(0, 10, small_town(), AugmentationParams{}), b.path());
  std::set<std::string> dirs;
  for (const auto& e : std::filesystem::directory_iterator(a.path()))
    if (e.is_directory()) dirs.insert(e.path().filename().string());
  EXPECT_EQ(dirs.size(), 10u);
  EXPECT_EQ(test::file_bytes(a / "manifest.json"), test::file_bytes(b / "manifest.json"));
  const auto manifest = read_manifest(a.path());
  ASSERT_EQ(manifest.size(), 10u);
  for (const auto& m : manifest) {
    EXPECT_EQ(m.seed, m.id);
    for (const auto& [file, digest] : m.sha256) {
      EXPECT_EQ(sha256_file(a.path() / m.dir / file), digest);
      EXPECT_EQ(test::file_bytes(a.path() / m.dir / file), test::file_bytes(b.path() / m.dir / file));
    }
  }
  const auto back = read_dataset(a.path());
  ASSERT_EQ(back.size(), 10u);
  expect_same_scene(scenes[4], back[4]);
  expect_same_scene(scenes[4], read_scene(a.path(), 4));
}

TEST(Dataset, MissingManifest) {
  test::TempDir dir;
  EXPECT_THROW(read_dataset(dir.path()), InputFormatError);
  test::write_text(dir / "manifest.json", R"({"format": "other"})");
  EXPECT_THROW(read_dataset(dir.path()), InputFormatError);
}

TEST(Dataset, TownSeedGrouping) {
  EXPECT_EQ(town_seed_for(0, 10), 0u);
  EXPECT_EQ(town_seed_for(19, 10), 1u);
  EXPECT_THROW(town_seed_for(1, 0), InvalidArgument);
  EXPECT_EQ(scene_dir_name(42), "scene_000042");
}
