#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "xmloc/core/error.hpp"
#include "xmloc/core/geometry.hpp"
#include "xmloc/match/score_volume.hpp"

namespace xmloc {

// Normalized pose probabilities, same layout as ScoreVolume.
struct ProbabilityVolume {
  int n_rot = 0;
  int height = 0;
  int width = 0;
  std::vector<double> probs;
  std::vector<double> angles;

  std::size_t slice_size() const { return static_cast<std::size_t>(height) * width; }
  std::size_t size() const { return probs.size(); }
  std::size_t index(int i, int a, int b) const { return i * slice_size() + static_cast<std::size_t>(a) * width + b; }
  double at(int i, int a, int b) const { return probs[index(i, a, b)]; }
};

// Softmax over every (rotation, row, column) entry, max-subtracted.
inline ProbabilityVolume softmax_volume(const ScoreVolume& logits) {
  ProbabilityVolume p{logits.n_rot, logits.height, logits.width, std::vector<double>(logits.scores.size()),
                      logits.angles};
  if (logits.scores.empty()) return p;
  const double mx = *std::max_element(logits.scores.begin(), logits.scores.end());
  double sum = 0.0;
  for (std::size_t k = 0; k < p.probs.size(); ++k) {
    p.probs[k] = std::exp(logits.scores[k] - mx);
    sum += p.probs[k];
  }
  for (double& v : p.probs) v /= sum;
  return p;
}

// P = softmax(omega + psi).
inline ProbabilityVolume fuse_probability(const ScoreVolume& omega, const ScoreVolume& psi) {
  if (!omega.same_shape(psi)) throw InvalidArgument("fuse_probability: score volumes differ in shape or rotations");
  ScoreVolume sum = omega;
  for (std::size_t k = 0; k < sum.scores.size(); ++k) sum.scores[k] += psi.scores[k];
  return softmax_volume(sum);
}

struct PoseEstimate {
  Pose pose;
  double confidence = 0.0;
  int rotation_index = 0;
  int row = 0;
  int col = 0;
};

// Maximum-likelihood entry; ties go to the lowest rotation-major linear index.
inline PoseEstimate estimate_pose(const ProbabilityVolume& p) {
  if (p.probs.empty()) throw InvalidArgument("estimate_pose: empty probability volume");
  std::size_t best = 0;
  for (std::size_t k = 1; k < p.probs.size(); ++k)
    if (p.probs[k] > p.probs[best]) best = k;
  const int i = static_cast<int>(best / p.slice_size());
  const std::size_t rem = best % p.slice_size();
  const int a = static_cast<int>(rem / p.width);
  const int b = static_cast<int>(rem % p.width);
  return {Pose(b, a, p.angles[i]), p.probs[best], i, a, b};
}

/// Sums a volume computed on a grid `factor` times finer into the coarse grid.
/// Fine hypothesis (a, b) goes to the nearest coarse hypothesis
/// (round(a / factor), round(b / factor)), clamped to the coarse extent.
inline ProbabilityVolume pool_probability(const ProbabilityVolume& p, int factor) {
  if (factor < 1) throw InvalidArgument("pool_probability: factor must be >= 1");
  if (factor == 1) return p;
  if (p.height % factor != 0 || p.width % factor != 0)
    throw InvalidArgument("pool_probability: grid not divisible by factor");
  ProbabilityVolume out{p.n_rot, p.height / factor, p.width / factor, {}, p.angles};
  out.probs.assign(static_cast<std::size_t>(out.n_rot) * out.height * out.width, 0.0);
  auto coarse = [factor](int x, int n) { return std::min((x + factor / 2) / factor, n - 1); };
  for (int i = 0; i < p.n_rot; ++i)
    for (int a = 0; a < p.height; ++a)
      for (int b = 0; b < p.width; ++b)
        out.probs[out.index(i, coarse(a, out.height), coarse(b, out.width))] += p.at(i, a, b);
  return out;
}

// Max over rotations per cell, used for heatmap rendering.
inline std::vector<double> max_over_rotations(const ProbabilityVolume& p) {
  std::vector<double> out(p.slice_size(), 0.0);
  for (int i = 0; i < p.n_rot; ++i)
    for (std::size_t k = 0; k < p.slice_size(); ++k) out[k] = std::max(out[k], p.probs[i * p.slice_size() + k]);
  return out;
}

}  // namespace xmloc
