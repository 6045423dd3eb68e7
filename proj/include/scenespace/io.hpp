// Copyright Contributors to the scenespace project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "scenespace/dataset.hpp"
#include "scenespace/image.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace scenespace::io {

// Dataset layout under a root directory:
//   frames/frame_%06d.png   8-bit sRGB
//   cameras.json            [{frame, fx, fy, cx, cy, world_to_cam: [16 numbers, row-major]}, ...]
//   depth/frame_%06d.pfm    grayscale PFM, -1 = INVALID
//   masks/frame_%06d.png    optional, 8-bit gray, > 127 = masked
//   scene_scale.json        optional, {"scale": number}

/// "frame_000042" + extension.
std::string frame_filename(int frame_index, const std::string& extension);

Image8 read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image8& image);

Mask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const Mask& mask);

/// Little-endian grayscale PFM, rows stored bottom-up. INVALID depths are written as -1.
/// Throws DataError for NaN.
void write_pfm(const std::filesystem::path& path, const DepthMap& depth);
/// Accepts either byte order. Non-positive values are read as INVALID.
DepthMap read_pfm(const std::filesystem::path& path);

std::vector<CameraPose> read_cameras(const std::filesystem::path& path);
void write_cameras(const std::filesystem::path& path, std::span<const CameraPose> cams);

std::optional<SceneScale> read_scale(const std::filesystem::path& path);
void write_scale(const std::filesystem::path& path, const SceneScale& scale);

/// Loads and validates a dataset. Frames are linearized; depth stays in stored units and the
/// sidecar scale, if present, is returned in Dataset::scale. Masks are loaded from
/// `mask_dir` when given, else from root/masks when present.
Dataset load_dataset(const std::filesystem::path& root, bool require_depth = true,
                     const std::optional<std::filesystem::path>& mask_dir = std::nullopt);
void write_dataset(const std::filesystem::path& root, const Dataset& dataset);

/// Delinearizes and writes frames as dir/frame_%06d.png, named by frame index.
void write_png_sequence(const std::filesystem::path& dir, std::span<const Frame> frames);
/// All frame_*.png files of a directory in name order.
std::vector<Image8> read_png_sequence(const std::filesystem::path& dir);

} // namespace scenespace::io
