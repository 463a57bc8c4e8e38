#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"
#include "xmloc/eval/bench.hpp"
#include "xmloc/eval/harness.hpp"
#include "xmloc/eval/metrics.hpp"
#include "xmloc/image/heatmap.hpp"

using namespace xmloc;

TEST(DecomposeError, AxisAligned) {
  LatLong e = decompose_error(Pose(1, 2, 0), Pose(0, 0, 0), 1.0);
  EXPECT_NEAR(e.lon, 1.0, 1e-12);
  EXPECT_NEAR(e.lat, 2.0, 1e-12);
  e = decompose_error(Pose(3, 3, 0.4), Pose(3, 3, 0.4), 1.0);
  EXPECT_EQ(e.lat, 0.0);
  EXPECT_EQ(e.lon, 0.0);
  e = decompose_error(Pose(1, 0, 0), Pose(0, 0, kPi / 2), 1.0);
  EXPECT_NEAR(e.lon, 0.0, 1e-12);
  EXPECT_NEAR(e.lat, 1.0, 1e-12);
  EXPECT_THROW(decompose_error(Pose(), Pose(), -1.0), InvalidArgument);
}

TEST(DecomposeError, PythagoreanIdentity) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-50, 50), a(-kPi, kPi), cs(0.1, 5);
  for (int i = 0; i < 1000; ++i) {
    const Pose pred(u(rng), u(rng), a(rng)), gt(u(rng), u(rng), a(rng));
    const double cell = cs(rng);
    const LatLong e = decompose_error(pred, gt, cell);
    const double loc = pose_error(pred, gt, cell).loc_m;
    ASSERT_NEAR(e.lat * e.lat + e.lon * e.lon, loc * loc, 1e-6);
  }
}

TEST(RecallAt, Cases) {
  EXPECT_EQ(recall_at({0.5, 2, 4, 10}, {1, 3, 5}), (std::vector<double>{25, 50, 75}));
  EXPECT_EQ(recall_at({0, 0, 0}, {1, 3, 5}), (std::vector<double>{100, 100, 100}));
  EXPECT_EQ(recall_at({1.0}, {1.0}), (std::vector<double>{100}));  // inclusive
  EXPECT_THROW(recall_at({}, {1}), InvalidArgument);
}

namespace {

// Records whose location errors (cell size 1) equal `errors`, along +u.
std::vector<EvalRecord> records_with(const std::vector<double>& errors) {
  std::vector<EvalRecord> out;
  for (std::size_t i = 0; i < errors.size(); ++i)
    out.push_back(make_record(i, Pose(errors[i], 0, 0), Pose(0, 0, 0), 1.0, 1.0, 1.0, 10.0 * i));
  return out;
}

}  // namespace

TEST(Summarize, HandComputed) {
  const Report r = summarize(records_with({0.5, 2, 4, 10}));
  EXPECT_EQ(r.count, 4u);
  EXPECT_DOUBLE_EQ(r.mean_loc_m, 4.125);
  EXPECT_EQ(r.recall_loc, (std::vector<double>{25, 50, 75}));
  EXPECT_EQ(r.recall_long, (std::vector<double>{25, 50, 75}));
  EXPECT_EQ(r.recall_lat, (std::vector<double>{100, 100, 100}));
  EXPECT_EQ(r.recall_ori, (std::vector<double>{100, 100, 100}));
  EXPECT_DOUBLE_EQ(r.mean_runtime_ms, 15.0);
  EXPECT_DOUBLE_EQ(summarize(records_with({4.125})).mean_loc_m, 4.125);
  EXPECT_THROW(summarize({}), InvalidArgument);
}

TEST(Report, JsonRoundTripAndTable) {
  const Report r = summarize(records_with({0.5, 2, 4, 10}));
  const Report back = report_from_json(to_json(r));
  EXPECT_EQ(back.recall_loc, r.recall_loc);
  EXPECT_EQ(back.mean_loc_m, r.mean_loc_m);
  EXPECT_THROW(report_from_json(Json{{"extra", 1}}), InvalidArgument);
  const std::string table = report_table({{"crafted", r}});
  EXPECT_NE(table.find("Loc R@1m"), std::string::npos);
  EXPECT_NE(table.find("25.00"), std::string::npos);
  EXPECT_NE(table.find("50.00"), std::string::npos);
  EXPECT_NE(table.find("75.00"), std::string::npos);
  EXPECT_NE(table.find("4.12"), std::string::npos);
}

TEST(RecordsCsv, RoundTrip) {
  test::TempDir dir;
  const auto recs = records_with({0.5, 2, 4, 10});
  write_records_csv(recs, dir / "r.csv");
  auto back = read_records_csv(dir / "r.csv");
  ASSERT_EQ(back.size(), 4u);
  EXPECT_DOUBLE_EQ(back[3].loc_err_m, 10.0);
  EXPECT_EQ(back[3].runtime_ms, 0.0);
  write_records_csv(recs, dir / "t.csv", true);
  back = read_records_csv(dir / "t.csv");
  EXPECT_DOUBLE_EQ(back[3].runtime_ms, 30.0);
}

TEST(RecordsCsv, MalformedInput) {
  test::TempDir dir;
  test::write_text(dir / "a.csv", "wrong,header\n");
  EXPECT_THROW(read_records_csv(dir / "a.csv"), InputFormatError);
  test::write_text(dir / "b.csv", std::string(kRecordHeader) + "\n1,2,3\n");
  EXPECT_THROW(read_records_csv(dir / "b.csv"), InputFormatError);
  test::write_text(dir / "c.csv", std::string(kRecordHeader) + "\n0,1,2,x,4,5,6,7,8,9,10,11,12\n");
  try {
    read_records_csv(dir / "c.csv");
    FAIL();
  } catch (const InputFormatError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos);
  }
  EXPECT_THROW(read_records_csv(dir / "missing.csv"), IoError);
}

TEST(Ablation, MatrixParsing) {
  EXPECT_EQ(default_ablation_matrix().size(), 4u);
  const auto rows = ablation_matrix_from_json(
      Json::parse(R"({"rows": [{"name": "a", "skeleton": false}, {"scale_align": false}]})"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_FALSE(rows[0].skeleton);
  EXPECT_TRUE(rows[0].feature);
  EXPECT_EQ(rows[1].name, "row1");
  EXPECT_THROW(ablation_matrix_from_json(Json::parse(R"({"rows": []})")), InvalidArgument);
  EXPECT_THROW(ablation_matrix_from_json(Json::parse(R"({"rows": [{"nmae": "x"}]})")), InvalidArgument);
}

TEST(Ablation, RejectsInvalidRows) {
  const std::vector<synth::Scene> none;
  std::vector<synth::Scene> one(1);
  EXPECT_THROW(run_ablation(one, one, {{"off", false, false, true, true}}, LocalizerConfig{}), InvalidArgument);
  EXPECT_THROW(run_ablation(none, one, {{"aug", true, true, true, true}}, LocalizerConfig{}), InvalidArgument);
  EXPECT_THROW(run_ablation(one, none, {{"plain", true, true, true, false}}, LocalizerConfig{}), InvalidArgument);
}

TEST(Bench, TimingStats) {
  const TimingStats s = timing_stats({5, 1, 4, 2, 3});
  EXPECT_EQ(s.reps, 5);
  EXPECT_EQ(s.median_ms, 3);
  EXPECT_EQ(s.p95_ms, 5);
  EXPECT_EQ(s.min_ms, 1);
  EXPECT_EQ(s.max_ms, 5);
  std::vector<double> v(20);
  for (int i = 0; i < 20; ++i) v[i] = i + 1;
  EXPECT_EQ(timing_stats(v).p95_ms, 19);
  EXPECT_EQ(timing_stats(v).median_ms, 10.5);
  EXPECT_THROW(timing_stats({}), InvalidArgument);
  int calls = 0;
  EXPECT_EQ(time_reps(3, [&] { ++calls; }).reps, 3);
  EXPECT_EQ(calls, 3);
}

TEST(Heatmap, ShapeAndGroundTruthOutline) {
  ScoreVolume v(2, 8, 8);
  v.at(1, 3, 4) = 5.0;
  const ProbabilityVolume p = softmax_volume(v);
  const Pose gt(2.2, 5.8, 0);  // nearest cell (6, 2)
  const Image8 img = probability_heatmap(p, 4, &gt);
  EXPECT_EQ(img.width, 32);
  EXPECT_EQ(img.height, 32);
  EXPECT_EQ(img.channels, 3);
  EXPECT_EQ(img.at(24, 8, 1), 255);  // top-left corner of cell (6, 2)
}
