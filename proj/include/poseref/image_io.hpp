#pragma once

#include <string>

#include "poseref/render.hpp"

namespace poseref {

// 16-bit binary PGM, depth in millimeters (0 = no hit, clamped at 65535).
void save_depth_pgm16(const DepthImage& depth, const std::string& path);
DepthImage load_depth_pgm16(const std::string& path);

// 32-bit little-endian PFM, meters. Grayscale "Pf" for depth.
void save_depth_pfm(const DepthImage& depth, const std::string& path);
DepthImage load_depth_pfm(const std::string& path);

// 3-channel "PF" PFM for normal images.
void save_normals_pfm(const NormalImage& normals, const std::string& path);
NormalImage load_normals_pfm(const std::string& path);

// 16-bit grayscale PNG (zlib-deflated, non-interlaced) for label images.
void save_labels_png16(const LabelImage& labels, const std::string& path);
LabelImage load_labels_png16(const std::string& path);

}  // namespace poseref
