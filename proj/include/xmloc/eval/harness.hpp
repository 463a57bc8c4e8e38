#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "xmloc/core/error.hpp"
#include "xmloc/core/parallel.hpp"
#include "xmloc/eval/metrics.hpp"
#include "xmloc/io/config.hpp"
#include "xmloc/pipeline/localizer.hpp"
#include "xmloc/synth/scene.hpp"

namespace xmloc {

struct SceneResult {
  EvalRecord record;
  Localization localization;
};

/// Localizes one scene and scores it against the scene's ground truth. Poses
/// and scales are converted to the scene's own map grid when the localizer
/// runs with a different map stride or pillar size.
inline SceneResult evaluate_scene(std::size_t id, const synth::Scene& scene, const LocalizerConfig& cfg,
                                  std::optional<double> fixed_scale = std::nullopt) {
  SceneResult out;
  out.localization = localize(scene.scan, scene.patch, cfg, scene.seed, fixed_scale);
  const double grid = static_cast<double>(cfg.map_stride) / scene.aug.stride;
  const Pose& p = out.localization.estimate.pose;
  const Pose pred(p.u() * grid, p.v() * grid, p.theta());
  const double s_pred = out.localization.scale.scale * grid * cfg.voxel.dx / scene.aug.bev_cell;
  const double cell_m = scene.meters_per_pixel * scene.aug.stride;
  out.record = make_record(id, pred, scene.gt_pose, cell_m, s_pred, scene.gt_scale, out.localization.runtime_ms);
  return out;
}

/// Records for every scene in index order. Scenes run in parallel; each
/// localization then runs single-threaded.
inline std::vector<EvalRecord> evaluate_scenes(const std::vector<synth::Scene>& scenes, LocalizerConfig cfg,
                                               int workers = 1) {
  std::vector<EvalRecord> out(scenes.size());
  if (scenes.size() > 1) cfg.workers = 1;
  parallel_for(scenes.size(), workers, [&](int, std::size_t i) { out[i] = evaluate_scene(i, scenes[i], cfg).record; });
  return out;
}

// ---- ablation ----

struct AblationRow {
  std::string name;
  bool feature = true;
  bool skeleton = true;
  bool scale_align = true;
  bool scale_aug = true;  // evaluate on the scale-augmented scenes, else on the scale-1 scenes
};

inline std::vector<AblationRow> default_ablation_matrix() {
  return {{"feature", true, false, true, true},
          {"feature+skeleton", true, true, true, true},
          {"no-scale-align", true, true, false, true},
          {"no-scale-aug", true, true, true, false}};
}

inline Json to_json(const AblationRow& r) {
  return Json{{"name", r.name},
              {"feature", r.feature},
              {"skeleton", r.skeleton},
              {"scale_align", r.scale_align},
              {"scale_aug", r.scale_aug}};
}

/// {"rows": [{"name", "feature", "skeleton", "scale_align", "scale_aug"}, ...]}
inline std::vector<AblationRow> ablation_matrix_from_json(const Json& j) {
  detail::Fields f(j, "matrix");
  const Json* rows = f.sub("rows");
  f.finish();
  if (!rows || !rows->is_array() || rows->empty()) throw InvalidArgument("matrix: 'rows' must be a nonempty array");
  std::vector<AblationRow> out;
  for (std::size_t i = 0; i < rows->size(); ++i) {
    AblationRow r;
    detail::Fields g((*rows)[i], "matrix.rows[" + std::to_string(i) + "]");
    g.read("name", r.name);
    g.read("feature", r.feature);
    g.read("skeleton", r.skeleton);
    g.read("scale_align", r.scale_align);
    g.read("scale_aug", r.scale_aug);
    g.finish();
    if (r.name.empty()) r.name = "row" + std::to_string(i);
    out.push_back(std::move(r));
  }
  return out;
}

struct AblationResult {
  AblationRow row;
  std::vector<EvalRecord> records;
  Report report;
};

/// One summary per matrix row. Disabled stages contribute zero to the fused
/// scores; scale alignment off fixes S = 1.
inline std::vector<AblationResult> run_ablation(const std::vector<synth::Scene>& augmented,
                                                const std::vector<synth::Scene>& plain,
                                                const std::vector<AblationRow>& rows, const LocalizerConfig& base,
                                                int workers = 1) {
  for (const auto& r : rows) {
    if (!r.feature && !r.skeleton) throw InvalidArgument("run_ablation: row '" + r.name + "' disables both stages");
    const auto& scenes = r.scale_aug ? augmented : plain;
    if (scenes.empty())
      throw InvalidArgument("run_ablation: row '" + r.name + "' needs " +
                            (r.scale_aug ? "scale-augmented" : "scale-1") + " scenes");
  }
  std::vector<AblationResult> out;
  for (const auto& r : rows) {
    LocalizerConfig cfg = base;
    cfg.feature_matching = r.feature;
    cfg.skeleton_matching = r.skeleton;
    cfg.scale_alignment = r.scale_align;
    AblationResult res{r, evaluate_scenes(r.scale_aug ? augmented : plain, cfg, workers), {}};
    res.report = summarize(res.records);
    out.push_back(std::move(res));
  }
  return out;
}

}  // namespace xmloc
