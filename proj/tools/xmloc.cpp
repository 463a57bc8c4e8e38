// xmloc command-line tool: synth-gen, localize, eval, ablate, bench.
//
// Exit codes: 0 success, 1 some scenes failed, 2 bad arguments or config,
// 3 I/O or input format error, 4 any other library error.

#include <CLI11.hpp>

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "xmloc/xmloc.hpp"

namespace fs = std::filesystem;
using namespace xmloc;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<int> n_rot;
  std::optional<int> map_stride;
  std::optional<double> temperature;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", config, "JSON config file (defaults apply to missing keys)")->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "first scene seed");
    cmd->add_option("-j,--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--n-rot", n_rot, "rotation bins")->check(CLI::PositiveNumber);
    cmd->add_option("--map-stride", map_stride, "patch pixels per map cell")->check(CLI::PositiveNumber);
    cmd->add_option("--scale-temperature", temperature, "softmax temperature of the scale weights");
  }

  RunConfig load() const {
    RunConfig c = config.empty() ? RunConfig{} : load_run_config(config);
    if (seed) c.seed = *seed;
    if (workers) c.workers = *workers;
    if (n_rot) c.localizer.n_rot = *n_rot;
    if (map_stride) c.localizer.map_stride = *map_stride;
    if (temperature) c.localizer.scale_temperature = *temperature;
    c.validate();
    return c;
  }
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string slug(const std::string& name) {
  std::string out;
  for (char c : name) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_';
  return out.empty() ? "row" : out;
}

// ---- synth-gen ----

int cmd_synth_gen(RunConfig cfg, const fs::path& out, std::size_t count, bool force) {
  if (fs::exists(out)) {
    if (!fs::is_directory(out)) throw IoError(out.string() + " exists and is not a directory");
    if (!fs::is_empty(out)) {
      if (!force) throw IoError("refusing to write into non-empty directory " + out.string() + " (use --force)");
      for (const auto& e : fs::directory_iterator(out)) {
        const std::string name = e.path().filename().string();
        if (name.rfind("scene_", 0) == 0 || name == synth::kManifestFile || name == "effective_config.json")
          fs::remove_all(e.path());
      }
    }
  }
  ensure_dir(out);
  cfg.output_dir = out.string();

  std::vector<synth::ManifestEntry> entries;
  std::size_t k = 0;
  while (k < count) {
    const std::uint64_t first = cfg.seed + k;
    const std::uint64_t ts = synth::town_seed_for(first, cfg.scenes_per_town);
    std::size_t n = 0;
    while (k + n < count && synth::town_seed_for(first + n, cfg.scenes_per_town) == ts) ++n;
    const auto scenes =
        synth::generate_scenes(first, n, cfg.town, cfg.augmentation, cfg.scenes_per_town, cfg.workers);
    for (std::size_t i = 0; i < n; ++i) {
      synth::write_scene(scenes[i], out / synth::scene_dir_name(k + i));
      entries.push_back(synth::manifest_entry(out, k + i, scenes[i].seed));
    }
    k += n;
  }
  write_json_file(synth::manifest_json(entries), out / synth::kManifestFile);
  write_effective_config(cfg, out);
  std::printf("wrote %zu scenes to %s\n", count, out.string().c_str());
  return 0;
}

// ---- localize ----

enum class Stage { Full, FeatureOnly, SkeletonOnly };

int cmd_localize(RunConfig cfg, const fs::path& dataset, const fs::path& out, Stage stage, bool no_scale_align,
                 std::optional<double> fixed_scale, bool heatmaps) {
  const auto entries = synth::read_manifest(dataset);
  ensure_dir(out);
  if (heatmaps) ensure_dir(out / "heatmaps");
  if (stage == Stage::FeatureOnly) cfg.localizer.skeleton_matching = false;
  if (stage == Stage::SkeletonOnly) cfg.localizer.feature_matching = false;
  if (no_scale_align) cfg.localizer.scale_alignment = false;
  cfg.dataset = dataset.string();
  cfg.output_dir = out.string();
  cfg.validate();

  LocalizerConfig loc = cfg.effective_localizer();
  if (entries.size() > 1) loc.workers = 1;
  std::vector<std::optional<EvalRecord>> records(entries.size());
  std::vector<std::string> errors(entries.size());
  parallel_for(entries.size(), cfg.workers, [&](int, std::size_t i) {
    try {
      const synth::Scene scene = synth::read_scene_dir(dataset / entries[i].dir);
      const SceneResult r = evaluate_scene(entries[i].id, scene, loc, fixed_scale);
      records[i] = r.record;
      if (heatmaps) {
        const bool same_grid = cfg.localizer.map_stride == scene.aug.stride;
        write_png(probability_heatmap(r.localization.probability, 4, same_grid ? &scene.gt_pose : nullptr),
                  out / "heatmaps" / (entries[i].dir + ".png"));
      }
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  std::vector<EvalRecord> ok;
  for (const auto& r : records)
    if (r) ok.push_back(*r);
  write_records_csv(ok, out / "records.csv");
  {
    std::ofstream t(out / "timings.csv", std::ios::binary);
    t << "scene_id,runtime_ms\n";
    for (const auto& r : ok) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%zu,%.3f\n", r.scene_id, r.runtime_ms);
      t << buf;
    }
  }
  std::size_t failed = 0;
  std::ofstream err;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (errors[i].empty()) continue;
    if (!failed++) {
      err.open(out / "errors.csv", std::ios::binary);
      err << "scene_id,message\n";
    }
    err << entries[i].id << ',' << csv_quote(errors[i]) << '\n';
    std::fprintf(stderr, "scene %zu: %s\n", entries[i].id, errors[i].c_str());
  }
  if (!failed) fs::remove(out / "errors.csv");
  write_effective_config(cfg, out);
  std::printf("localized %zu of %zu scenes into %s\n", ok.size(), entries.size(), out.string().c_str());
  return failed ? 1 : 0;
}

// ---- eval ----

int cmd_eval(const fs::path& results, const std::string& dataset, std::string timings, const fs::path& out) {
  std::vector<EvalRecord> recs = read_records_csv(results);
  if (!dataset.empty()) {
    for (auto& r : recs) {
      const synth::Scene s = synth::read_scene(dataset, r.scene_id);
      r = make_record(r.scene_id, r.pred, s.gt_pose, s.meters_per_pixel * s.aug.stride, r.s_pred, s.gt_scale,
                      r.runtime_ms);
    }
  }
  if (timings.empty() && fs::exists(results.parent_path() / "timings.csv"))
    timings = (results.parent_path() / "timings.csv").string();
  if (!timings.empty()) {
    std::ifstream in(timings);
    if (!in) throw IoError("cannot open " + timings);
    std::map<std::size_t, double> ms;
    std::string line;
    std::getline(in, line);
    std::size_t id = 0;
    double t = 0.0;
    char comma = 0;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      if (ls >> id >> comma >> t && comma == ',') ms[id] = t;
    }
    for (auto& r : recs)
      if (auto it = ms.find(r.scene_id); it != ms.end()) r.runtime_ms = it->second;
  }
  ensure_dir(out);
  const Report rep = summarize(recs);
  write_report(rep, results.stem().string(), out / "report.json", out / "report.txt");
  std::cout << report_table({{results.stem().string(), rep}});
  return 0;
}

// ---- ablate ----

int cmd_ablate(RunConfig cfg, const std::string& dataset, const std::string& plain, const std::string& matrix,
               const fs::path& out) {
  const auto rows = matrix.empty() ? default_ablation_matrix() : ablation_matrix_from_json(read_json_file(matrix));
  bool need_aug = false, need_plain = false;
  for (const auto& r : rows) (r.scale_aug ? need_aug : need_plain) = true;
  if (need_aug && dataset.empty()) throw InvalidArgument("ablate: --dataset is required by the matrix");
  if (need_plain && plain.empty()) throw InvalidArgument("ablate: --plain-dataset is required by the matrix");
  const auto aug = need_aug ? synth::read_dataset(dataset) : std::vector<synth::Scene>{};
  const auto pl = need_plain ? synth::read_dataset(plain) : std::vector<synth::Scene>{};
  ensure_dir(out);
  cfg.dataset = dataset;
  cfg.output_dir = out.string();
  const auto results = run_ablation(aug, pl, rows, cfg.effective_localizer(), cfg.workers);

  std::vector<std::pair<std::string, Report>> table;
  Json summary = Json::array();
  for (const auto& res : results) {
    const std::string s = slug(res.row.name);
    write_report(res.report, res.row.name, out / ("report_" + s + ".json"), out / ("report_" + s + ".txt"));
    write_records_csv(res.records, out / ("records_" + s + ".csv"));
    summary.push_back(Json{{"row", to_json(res.row)}, {"report", to_json(res.report)}});
    table.emplace_back(res.row.name, res.report);
  }
  write_json_file(summary, out / "ablation.json");
  std::ofstream(out / "ablation.txt", std::ios::binary) << report_table(table);
  write_effective_config(cfg, out);
  std::cout << report_table(table);
  return 0;
}

// ---- bench ----

int cmd_bench(RunConfig cfg, int reps, int multi, const std::string& out) {
  const synth::Scene scene = synth::generate_scene(cfg.seed, cfg.town, cfg.augmentation, cfg.scenes_per_town);
  const BenchReport b = run_bench(scene, cfg.effective_localizer(), reps, multi);
  auto line = [](const char* what, const TimingStats& s) {
    std::printf("%-24s median %9.2f ms   p95 %9.2f ms   (%d reps)\n", what, s.median_ms, s.p95_ms, s.reps);
  };
  line("localize 1 worker", b.localize_single);
  line(("localize " + std::to_string(multi) + " workers").c_str(), b.localize_multi);
  line("score_volume 1 worker", b.volume_single);
  line(("score_volume " + std::to_string(multi) + " workers").c_str(), b.volume_multi);
  if (!out.empty()) {
    ensure_dir(out);
    write_json_file(to_json(b), fs::path(out) / "bench.json");
    cfg.output_dir = out;
    write_effective_config(cfg, out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-modal LiDAR to overhead map localization"};
  app.require_subcommand(1);

  Overrides gen_o, loc_o, abl_o, bench_o;

  auto* gen = app.add_subcommand("synth-gen", "generate a synthetic dataset");
  gen_o.attach(gen);
  std::string gen_out;
  std::size_t gen_count = 10;
  bool gen_force = false;
  std::vector<double> gen_scales;
  std::optional<double> gen_scale_min, gen_scale_max, gen_offset;
  bool gen_time_lag = false;
  gen->add_option("-o,--out", gen_out, "output dataset directory")->required();
  gen->add_option("-n,--count", gen_count, "number of scenes");
  gen->add_flag("--force", gen_force, "write into a non-empty directory, replacing earlier scenes");
  gen->add_option("--scale-choices", gen_scales, "draw each scene scale from these values");
  gen->add_option("--scale-min", gen_scale_min, "lower end of the uniform scale range");
  gen->add_option("--scale-max", gen_scale_max, "upper end of the uniform scale range");
  gen->add_option("--max-offset", gen_offset, "patch center offset as a fraction of the half extent");
  gen->add_flag("--time-lag", gen_time_lag, "inject map-only and scan-only cars");

  auto* loc = app.add_subcommand("localize", "localize every scene of a dataset");
  loc_o.attach(loc);
  std::string loc_dataset, loc_out, loc_stage = "full";
  bool loc_no_align = false, loc_heatmaps = false;
  std::optional<double> loc_scale;
  loc->add_option("-d,--dataset", loc_dataset, "dataset directory (default: config 'dataset')");
  loc->add_option("-o,--out", loc_out, "output directory")->required();
  loc->add_option("--stage", loc_stage, "matching stages")
      ->check(CLI::IsMember({"full", "feature-only", "skeleton-only"}));
  loc->add_flag("--no-scale-align", loc_no_align, "fix S = 1");
  loc->add_option("--scale", loc_scale, "use this scale instead of estimating it")->check(CLI::PositiveNumber);
  loc->add_flag("--heatmaps", loc_heatmaps, "write a probability heatmap PNG per scene");

  auto* ev = app.add_subcommand("eval", "summarize localization records");
  std::string ev_results, ev_dataset, ev_timings, ev_out;
  ev->add_option("-r,--results", ev_results, "records.csv written by localize")->required()->check(CLI::ExistingFile);
  ev->add_option("-d,--dataset", ev_dataset, "recompute errors against this dataset's ground truth");
  ev->add_option("--timings", ev_timings, "timings.csv (default: next to the results)");
  ev->add_option("-o,--out", ev_out, "output directory")->required();

  auto* abl = app.add_subcommand("ablate", "run an ablation matrix");
  abl_o.attach(abl);
  std::string abl_dataset, abl_plain, abl_matrix, abl_out;
  abl->add_option("-d,--dataset", abl_dataset, "scale-augmented dataset");
  abl->add_option("--plain-dataset", abl_plain, "scale-1 dataset for rows with scale_aug off");
  abl->add_option("-m,--matrix", abl_matrix, "matrix JSON (default: four standard rows)")->check(CLI::ExistingFile);
  abl->add_option("-o,--out", abl_out, "output directory")->required();

  auto* bench = app.add_subcommand("bench", "time localization and score volumes");
  bench_o.attach(bench);
  int bench_reps = 20, bench_multi = 8;
  std::string bench_out;
  bench->add_option("--reps", bench_reps, "repetitions per measurement")->check(CLI::Range(20, 100000));
  bench->add_option("--multi-workers", bench_multi, "worker count of the multi-worker run")->check(CLI::PositiveNumber);
  bench->add_option("-o,--out", bench_out, "write bench.json here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      RunConfig cfg = gen_o.load();
      if (!gen_scales.empty()) cfg.augmentation.scale_choices = gen_scales;
      if (gen_scale_min) cfg.augmentation.scale_min = *gen_scale_min;
      if (gen_scale_max) cfg.augmentation.scale_max = *gen_scale_max;
      if (gen_offset) cfg.augmentation.max_offset = *gen_offset;
      if (gen_time_lag) cfg.augmentation.time_lag = true;
      cfg.validate();
      return cmd_synth_gen(cfg, gen_out, gen_count, gen_force);
    }
    if (*loc) {
      RunConfig cfg = loc_o.load();
      const std::string ds = loc_dataset.empty() ? cfg.dataset : loc_dataset;
      if (ds.empty()) throw InvalidArgument("localize: no dataset given");
      const Stage st = loc_stage == "feature-only"    ? Stage::FeatureOnly
                       : loc_stage == "skeleton-only" ? Stage::SkeletonOnly
                                                      : Stage::Full;
      return cmd_localize(cfg, ds, loc_out, st, loc_no_align, loc_scale, loc_heatmaps);
    }
    if (*ev) return cmd_eval(ev_results, ev_dataset, ev_timings, ev_out);
    if (*abl) return cmd_ablate(abl_o.load(), abl_dataset, abl_plain, abl_matrix, abl_out);
    if (*bench) return cmd_bench(bench_o.load(), bench_reps, bench_multi, bench_out);
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const InputFormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 0;
}
