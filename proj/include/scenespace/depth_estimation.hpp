// Copyright Contributors to the scenespace project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "scenespace/geometry.hpp"
#include "scenespace/image.hpp"

#include <span>
#include <utility>
#include <vector>

namespace scenespace {

/// Local plane-sweep stereo without any smoothness term.
struct SweepConfig {
    static constexpr int kPatchRadius = 1;

    int num_hypotheses = 64;
    double d_min = 0.1;
    double d_max = 100.0;
    /// Frames within this distance of the reference frame are matched against.
    int window_radius = 3;

    void validate() const;

    /// Hypothesis depths, uniform in inverse depth; index 0 is d_min.
    std::vector<double> hypotheses() const;
};

/// Sum of squared linear-RGB differences over a 3x3 patch. Reference pixels are read with
/// clamped coordinates; the other frame is sampled bilinearly around `other_px`
/// (continuous coordinates).
double patch_cost(const Frame& ref, PixelIndex ref_px, const Frame& other, const Eigen::Vector2d& other_px);

/// Depth range derived from camera motion: 0.1x and 100x the median distance between
/// consecutive camera centers. Throws DataError if the cameras never move.
std::pair<double, double> default_depth_range(std::span<const CameraPose> cams);

/// Depth map of the frame with index `frame_index`: per pixel the hypothesis with the lowest
/// mean patch cost over all window frames the reprojection lands inside. Ties go to the lower
/// hypothesis index; pixels that never land inside any frame are INVALID.
/// Throws ConfigError for an empty window.
DepthMap estimate_depth(int frame_index, std::span<const Frame> frames, std::span<const CameraPose> cams,
                        const SweepConfig& cfg, int threads = 0);

} // namespace scenespace
