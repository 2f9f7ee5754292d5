#pragma once

#include <utility>
#include <vector>

#include "poseref/render.hpp"

namespace poseref {

struct ScoreConfig {
  double tau_d = 0.02;  // depth error clamp, meters
  double tau_n = 0.7;   // normal cosine-deficit clamp

  void validate() const;
};

// Pixel mask; empty means every pixel. Otherwise one byte per pixel, nonzero
// selects the pixel.
using PixelMask = std::vector<std::uint8_t>;

// Mean per-pixel agreement in [0,1] between a rendered and an observed
// depth/normal pair over the union of their valid pixels restricted to the
// mask. Pixels valid on only one side count as full error (score 0 there).
// An empty domain scores 0.
double score_pose(const DepthImage& rendered_depth, const NormalImage& rendered_normals,
                  const DepthImage& observed_depth, const NormalImage& observed_normals,
                  const PixelMask& mask, const ScoreConfig& cfg);

// Scores each candidate pose (mesh frame -> camera) against the observation
// and returns (index, pose) of the best; ties go to the latest index.
// Index 0 is conventionally the initial pose of a refinement trajectory.
std::pair<std::size_t, RigidTransform> select_best_pose(
    const std::vector<RigidTransform>& poses, const TriangleMesh& mesh,
    const CameraIntrinsics& cam, const DepthImage& observed_depth,
    const NormalImage& observed_normals, const PixelMask& mask, const ScoreConfig& cfg);

// Per-pose scores for the same candidates (used for reporting).
std::vector<double> score_poses(const std::vector<RigidTransform>& poses,
                                const TriangleMesh& mesh, const CameraIntrinsics& cam,
                                const DepthImage& observed_depth,
                                const NormalImage& observed_normals, const PixelMask& mask,
                                const ScoreConfig& cfg);

// Mask with one byte per pixel set where `labels` equals `id`.
PixelMask mask_from_labels(const LabelImage& labels, std::uint16_t id);

}  // namespace poseref
