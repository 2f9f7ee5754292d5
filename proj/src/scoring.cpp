#include "poseref/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace poseref {

void ScoreConfig::validate() const {
  if (tau_d <= 0.0 || tau_n <= 0.0) {
    throw std::invalid_argument("ScoreConfig: thresholds must be positive");
  }
}

double score_pose(const DepthImage& rendered_depth, const NormalImage& rendered_normals,
                  const DepthImage& observed_depth, const NormalImage& observed_normals,
                  const PixelMask& mask, const ScoreConfig& cfg) {
  cfg.validate();
  const int w = rendered_depth.width;
  const int h = rendered_depth.height;
  if (observed_depth.width != w || observed_depth.height != h ||
      rendered_normals.width != w || observed_normals.width != w) {
    throw std::invalid_argument("score_pose: image shape mismatch");
  }
  if (!mask.empty() && mask.size() != static_cast<std::size_t>(w) * h) {
    throw std::invalid_argument("score_pose: mask shape mismatch");
  }

  double sum = 0.0;
  std::size_t count = 0;
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      const std::size_t idx = static_cast<std::size_t>(row) * w + col;
      if (!mask.empty() && !mask[idx]) continue;
      const double rd = rendered_depth.at(col, row);
      const double od = observed_depth.at(col, row);
      const bool r_hit = rd > 0.0;
      const bool o_hit = od > 0.0;
      if (!r_hit && !o_hit) continue;
      ++count;
      if (!r_hit || !o_hit) continue;  // one-sided pixels score 0

      const double e_d = 1.0 - std::min(1.0, std::abs(rd - od) / cfg.tau_d);
      const double cosine =
          std::clamp(rendered_normals.at(col, row).dot(observed_normals.at(col, row)), 0.0, 1.0);
      const double e_n = 1.0 - std::min(1.0, (1.0 - cosine) / cfg.tau_n);
      sum += (e_d + e_n) / 2.0;
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

std::vector<double> score_poses(const std::vector<RigidTransform>& poses,
                                const TriangleMesh& mesh, const CameraIntrinsics& cam,
                                const DepthImage& observed_depth,
                                const NormalImage& observed_normals, const PixelMask& mask,
                                const ScoreConfig& cfg) {
  std::vector<double> scores;
  scores.reserve(poses.size());
  for (const RigidTransform& pose : poses) {
    const auto [depth, normals] = render(mesh, pose, cam);
    scores.push_back(score_pose(depth, normals, observed_depth, observed_normals, mask, cfg));
  }
  return scores;
}

std::pair<std::size_t, RigidTransform> select_best_pose(
    const std::vector<RigidTransform>& poses, const TriangleMesh& mesh,
    const CameraIntrinsics& cam, const DepthImage& observed_depth,
    const NormalImage& observed_normals, const PixelMask& mask, const ScoreConfig& cfg) {
  if (poses.empty()) throw std::invalid_argument("select_best_pose: no poses");
  const std::vector<double> scores =
      score_poses(poses, mesh, cam, observed_depth, observed_normals, mask, cfg);
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] >= scores[best]) best = i;  // ties -> latest
  }
  return {best, poses[best]};
}

PixelMask mask_from_labels(const LabelImage& labels, std::uint16_t id) {
  PixelMask mask(labels.data.size(), 0);
  for (std::size_t i = 0; i < labels.data.size(); ++i) mask[i] = labels.data[i] == id ? 1 : 0;
  return mask;
}

}  // namespace poseref
