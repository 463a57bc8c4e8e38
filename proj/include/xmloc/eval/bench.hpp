#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <vector>

#include "xmloc/core/error.hpp"
#include "xmloc/io/config.hpp"
#include "xmloc/match/score_volume.hpp"
#include "xmloc/pipeline/localizer.hpp"
#include "xmloc/synth/scene.hpp"

namespace xmloc {

struct TimingStats {
  int reps = 0;
  double median_ms = 0.0;
  double p95_ms = 0.0;  // nearest rank
  double min_ms = 0.0;
  double max_ms = 0.0;
};

inline TimingStats timing_stats(std::vector<double> ms) {
  if (ms.empty()) throw InvalidArgument("timing_stats: no samples");
  std::sort(ms.begin(), ms.end());
  const std::size_t n = ms.size();
  TimingStats s;
  s.reps = static_cast<int>(n);
  s.median_ms = n % 2 ? ms[n / 2] : 0.5 * (ms[n / 2 - 1] + ms[n / 2]);
  s.p95_ms = ms[static_cast<std::size_t>(std::ceil(0.95 * n)) - 1];
  s.min_ms = ms.front();
  s.max_ms = ms.back();
  return s;
}

template <class Fn>
TimingStats time_reps(int reps, Fn&& fn) {
  if (reps < 1) throw InvalidArgument("time_reps: reps must be >= 1");
  std::vector<double> ms;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  return timing_stats(std::move(ms));
}

struct BenchReport {
  int multi_workers = 8;
  TimingStats localize_single;
  TimingStats localize_multi;
  TimingStats volume_single;
  TimingStats volume_multi;
};

inline Json to_json(const TimingStats& s) {
  return Json{{"reps", s.reps}, {"median_ms", s.median_ms}, {"p95_ms", s.p95_ms}, {"min_ms", s.min_ms}, {"max_ms", s.max_ms}};
}

inline Json to_json(const BenchReport& b) {
  return Json{{"multi_workers", b.multi_workers},
              {"localize", {{"single", to_json(b.localize_single)}, {"multi", to_json(b.localize_multi)}}},
              {"score_volume", {{"single", to_json(b.volume_single)}, {"multi", to_json(b.volume_multi)}}}};
}

/// Times full localizations of `scene` and bare score volumes at the same
/// sizes (64 x 64 x C map grid against a 100 x 100 x C BEV for 256 px
/// patches), each with one worker and with `multi_workers`. Single- and
/// multi-worker repetitions alternate so drift in machine load hits both.
inline BenchReport run_bench(const synth::Scene& scene, LocalizerConfig cfg, int reps, int multi_workers) {
  if (multi_workers < 1) throw InvalidArgument("run_bench: multi_workers must be >= 1");
  if (reps < 1) throw InvalidArgument("run_bench: reps must be >= 1");
  BenchReport b;
  b.multi_workers = multi_workers;

  const int n = scene.patch.size() / cfg.map_stride;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Grid2D map(n, n, cfg.channels), bev(cfg.voxel.rows(), cfg.voxel.cols(), cfg.channels);
  for (auto& v : map.values()) v = g(rng);
  for (auto& v : bev.values()) v = g(rng);

  auto ms_of = [](auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };
  LocalizerConfig one = cfg, many = cfg;
  one.workers = 1;
  many.workers = multi_workers;
  std::vector<double> ls, lm, vs, vm;
  for (int r = 0; r < reps; ++r) {
    ls.push_back(ms_of([&] { (void)localize(scene.scan, scene.patch, one, scene.seed); }));
    lm.push_back(ms_of([&] { (void)localize(scene.scan, scene.patch, many, scene.seed); }));
  }
  for (int r = 0; r < reps; ++r) {
    vs.push_back(ms_of([&] { (void)score_volume(map, bev, cfg.n_rot, 1); }));
    vm.push_back(ms_of([&] { (void)score_volume(map, bev, cfg.n_rot, multi_workers); }));
  }
  b.localize_single = timing_stats(std::move(ls));
  b.localize_multi = timing_stats(std::move(lm));
  b.volume_single = timing_stats(std::move(vs));
  b.volume_multi = timing_stats(std::move(vm));
  return b;
}

}  // namespace xmloc
