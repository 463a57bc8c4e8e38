#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "xmloc/core/error.hpp"
#include "xmloc/core/geometry.hpp"
#include "xmloc/io/config.hpp"

namespace xmloc {

struct LatLong {
  double lat = 0.0;
  double lon = 0.0;
};

/// Error vector pred - gt (meters) split along the ground-truth heading
/// (longitudinal) and across it (lateral), both as absolute values.
inline LatLong decompose_error(const Pose& pred, const Pose& gt, double cell_size) {
  if (!(cell_size > 0.0)) throw InvalidArgument("decompose_error: cell_size must be positive");
  const double eu = (pred.u() - gt.u()) * cell_size;
  const double ev = (pred.v() - gt.v()) * cell_size;
  const double c = std::cos(gt.theta()), s = std::sin(gt.theta());
  return {std::abs(-s * eu + c * ev), std::abs(c * eu + s * ev)};
}

// Percentage of errors <= each threshold.
inline std::vector<double> recall_at(const std::vector<double>& errors, const std::vector<double>& thresholds) {
  if (errors.empty()) throw InvalidArgument("recall_at: empty error list");
  std::vector<double> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    const auto hits = std::count_if(errors.begin(), errors.end(), [t](double e) { return e <= t; });
    out.push_back(100.0 * static_cast<double>(hits) / static_cast<double>(errors.size()));
  }
  return out;
}

struct EvalRecord {
  std::size_t scene_id = 0;
  Pose pred;
  Pose gt;
  double loc_err_m = 0.0;
  double lat_err_m = 0.0;
  double long_err_m = 0.0;
  double ori_err_deg = 0.0;
  double s_pred = 1.0;
  double s_gt = 1.0;
  double runtime_ms = 0.0;
};

inline EvalRecord make_record(std::size_t id, const Pose& pred, const Pose& gt, double cell_size, double s_pred,
                              double s_gt, double runtime_ms = 0.0) {
  const PoseError e = pose_error(pred, gt, cell_size);
  const LatLong ll = decompose_error(pred, gt, cell_size);
  return {id, pred, gt, e.loc_m, ll.lat, ll.lon, e.ori_deg, s_pred, s_gt, runtime_ms};
}

// ---- CSV ----

inline constexpr const char* kRecordHeader =
    "scene_id,pred_u,pred_v,pred_theta,gt_u,gt_v,gt_theta,loc_err_m,lat_err_m,long_err_m,ori_err_deg,s_pred,s_gt";

// Runtime is left out unless asked for, so result files stay reproducible.
inline void write_records_csv(const std::vector<EvalRecord>& records, const std::filesystem::path& path,
                              bool with_runtime = false) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << kRecordHeader << (with_runtime ? ",runtime_ms" : "") << '\n';
  char buf[512];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g",
                  r.scene_id, r.pred.u(), r.pred.v(), r.pred.theta(), r.gt.u(), r.gt.v(), r.gt.theta(), r.loc_err_m,
                  r.lat_err_m, r.long_err_m, r.ori_err_deg, r.s_pred, r.s_gt);
    out << buf;
    if (with_runtime) {
      std::snprintf(buf, sizeof buf, ",%.3f", r.runtime_ms);
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::vector<EvalRecord> read_records_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InputFormatError(path.string() + ": empty file");
  const std::string header = kRecordHeader;
  bool with_runtime = false;
  if (line == header + ",runtime_ms")
    with_runtime = true;
  else if (line != header)
    throw InputFormatError(path.string() + ": unexpected header");
  std::vector<EvalRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw InputFormatError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (v.size() != (with_runtime ? 14u : 13u) || v[0] < 0)
      throw InputFormatError(path.string() + ":" + std::to_string(lineno) + ": wrong column count");
    EvalRecord r;
    r.scene_id = static_cast<std::size_t>(v[0]);
    r.pred = Pose(v[1], v[2], v[3]);
    r.gt = Pose(v[4], v[5], v[6]);
    r.loc_err_m = v[7];
    r.lat_err_m = v[8];
    r.long_err_m = v[9];
    r.ori_err_deg = v[10];
    r.s_pred = v[11];
    r.s_gt = v[12];
    if (with_runtime) r.runtime_ms = v[13];
    out.push_back(r);
  }
  return out;
}

// ---- summary ----

struct Report {
  std::size_t count = 0;
  double mean_loc_m = 0.0;
  double mean_ori_deg = 0.0;
  double mean_lat_m = 0.0;
  double mean_long_m = 0.0;
  double mean_scale_abs_err = 0.0;
  double mean_runtime_ms = 0.0;
  std::vector<double> loc_thresholds_m{1.0, 3.0, 5.0};
  std::vector<double> ori_thresholds_deg{1.0, 3.0, 5.0};
  std::vector<double> recall_loc;
  std::vector<double> recall_lat;
  std::vector<double> recall_long;
  std::vector<double> recall_ori;
};

inline Report summarize(const std::vector<EvalRecord>& records) {
  if (records.empty()) throw InvalidArgument("summarize: no records");
  Report r;
  r.count = records.size();
  std::vector<double> loc, lat, lon, ori;
  for (const auto& e : records) {
    loc.push_back(e.loc_err_m);
    lat.push_back(e.lat_err_m);
    lon.push_back(e.long_err_m);
    ori.push_back(e.ori_err_deg);
    r.mean_scale_abs_err += std::abs(e.s_pred - e.s_gt);
    r.mean_runtime_ms += e.runtime_ms;
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const double n = static_cast<double>(records.size());
  r.mean_loc_m = mean(loc);
  r.mean_lat_m = mean(lat);
  r.mean_long_m = mean(lon);
  r.mean_ori_deg = mean(ori);
  r.mean_scale_abs_err /= n;
  r.mean_runtime_ms /= n;
  r.recall_loc = recall_at(loc, r.loc_thresholds_m);
  r.recall_lat = recall_at(lat, r.loc_thresholds_m);
  r.recall_long = recall_at(lon, r.loc_thresholds_m);
  r.recall_ori = recall_at(ori, r.ori_thresholds_deg);
  return r;
}

/// Report keys: count, mean_loc_m, mean_ori_deg, mean_lat_m, mean_long_m,
/// mean_scale_abs_err, mean_runtime_ms, loc_thresholds_m, ori_thresholds_deg,
/// recall_loc, recall_lat, recall_long, recall_ori (percentages).
inline Json to_json(const Report& r) {
  return Json{{"count", r.count},
              {"mean_loc_m", r.mean_loc_m},
              {"mean_ori_deg", r.mean_ori_deg},
              {"mean_lat_m", r.mean_lat_m},
              {"mean_long_m", r.mean_long_m},
              {"mean_scale_abs_err", r.mean_scale_abs_err},
              {"mean_runtime_ms", r.mean_runtime_ms},
              {"loc_thresholds_m", r.loc_thresholds_m},
              {"ori_thresholds_deg", r.ori_thresholds_deg},
              {"recall_loc", r.recall_loc},
              {"recall_lat", r.recall_lat},
              {"recall_long", r.recall_long},
              {"recall_ori", r.recall_ori}};
}

inline Report report_from_json(const Json& j) {
  Report r;
  detail::Fields f(j, "report");
  f.read("count", r.count);
  f.read("mean_loc_m", r.mean_loc_m);
  f.read("mean_ori_deg", r.mean_ori_deg);
  f.read("mean_lat_m", r.mean_lat_m);
  f.read("mean_long_m", r.mean_long_m);
  f.read("mean_scale_abs_err", r.mean_scale_abs_err);
  f.read("mean_runtime_ms", r.mean_runtime_ms);
  f.read("loc_thresholds_m", r.loc_thresholds_m);
  f.read("ori_thresholds_deg", r.ori_thresholds_deg);
  f.read("recall_loc", r.recall_loc);
  f.read("recall_lat", r.recall_lat);
  f.read("recall_long", r.recall_long);
  f.read("recall_ori", r.recall_ori);
  f.finish();
  return r;
}

/// Aligned text table, one row per named report. Columns: average
/// location / orientation error, then Loc, Lat, Long recall at the metric
/// thresholds and Ori recall at the angular thresholds.
inline std::string report_table(const std::vector<std::pair<std::string, Report>>& rows) {
  if (rows.empty()) return {};
  const Report& first = rows.front().second;
  std::vector<std::string> head{"run", "n", "avg loc/ori (m/deg)"};
  for (const char* group : {"Loc", "Lat", "Long"})
    for (double t : first.loc_thresholds_m) {
      char b[32];
      std::snprintf(b, sizeof b, "%s R@%gm", group, t);
      head.push_back(b);
    }
  for (double t : first.ori_thresholds_deg) {
    char b[32];
    std::snprintf(b, sizeof b, "Ori R@%gdeg", t);
    head.push_back(b);
  }
  std::vector<std::vector<std::string>> cells{head};
  for (const auto& [name, r] : rows) {
    std::vector<std::string> row{name, std::to_string(r.count)};
    char b[64];
    std::snprintf(b, sizeof b, "%.2f / %.2f", r.mean_loc_m, r.mean_ori_deg);
    row.push_back(b);
    for (const auto* v : {&r.recall_loc, &r.recall_lat, &r.recall_long, &r.recall_ori})
      for (double x : *v) {
        std::snprintf(b, sizeof b, "%.2f", x);
        row.push_back(b);
      }
    cells.push_back(std::move(row));
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : cells)
    for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::string out;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) {
      if (c) out += "  ";
      if (c == 0)
        out += row[c] + std::string(width[c] - row[c].size(), ' ');
      else
        out += std::string(width[c] - row[c].size(), ' ') + row[c];
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  }
  return out;
}

inline void write_report(const Report& r, const std::string& name, const std::filesystem::path& json_path,
                         const std::filesystem::path& table_path) {
  write_json_file(to_json(r), json_path);
  std::ofstream out(table_path, std::ios::binary);
  if (!out) throw IoError("cannot open " + table_path.string() + " for writing");
  out << report_table({{name, r}});
}

}  // namespace xmloc
