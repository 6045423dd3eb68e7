// Copyright Contributors to the scenespace project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "scenespace/dataset.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace scenespace::synth {

/// Axis-aligned textured box. Moving boxes translate by `velocity` scene units per frame
/// and carry their texture with them.
struct Box {
    Eigen::Vector3d min = Eigen::Vector3d::Zero();
    Eigen::Vector3d max = Eigen::Vector3d::Ones();
    Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
    Eigen::Vector3d albedo = Eigen::Vector3d::Constant(0.7);
    double checker_period = 1.0;
    double checker_contrast = 0.3;
    double noise_frequency = 2.0;
    double noise_amplitude = 0.25;
};

/// Camera path. Without `look_at` the camera keeps the canonical orientation
/// (looking along +z with +y down).
struct Trajectory {
    Eigen::Vector3d start = Eigen::Vector3d::Zero();
    Eigen::Vector3d step = Eigen::Vector3d(0.05, 0.0, 0.0);
    std::optional<Eigen::Vector3d> look_at;
};

struct Scene {
    int width = 64;
    int height = 64;
    int frames = 5;
    int first_frame = 0;
    /// Focal length in pixels; 0 selects 0.9 * width.
    double focal = 0.0;
    /// n x n subpixel rays per pixel, averaged in linear space.
    int supersample = 1;
    std::uint64_t seed = 1;
    Eigen::Vector3d light_dir = Eigen::Vector3d(0.3, 0.6, 1.0);
    std::vector<Box> boxes;
    Trajectory trajectory;

    CameraPose camera(int frame_offset) const;
};

/// Ray-cast Lambertian rendering with exact depth and poses. Frames are quantized to 8 bits
/// and linearized, so they survive a PNG round trip unchanged. Deterministic.
Dataset render_scene(const Scene& scene, int threads = 0);

/// Per-frame mask of pixels whose nearest surface is box `box_index`.
std::vector<Mask> render_box_mask(const Scene& scene, std::size_t box_index);

/// Built-in scenes: "static" (wall plus three boxes), "plane" (one fronto-parallel wall),
/// "occlusion" (wall with a thin foreground pillar), "moving" (static plus a moving box).
/// Throws ConfigError for unknown names.
Scene preset(const std::string& name, int width, int height, int frames, std::uint64_t seed);

/// Zero-mean Gaussian noise of standard deviation `sigma` (8-bit gamma units), the same value
/// on all three channels of a pixel, clamped to [0, 255] and requantized.
Dataset add_noise(const Dataset& clean, double sigma, std::uint64_t seed);

/// Salt-and-pepper corruption: replaces `fraction` of the valid depth pixels by d_min or
/// d_max with equal probability.
void corrupt_depth(std::span<DepthMap> depths, double fraction, double d_min, double d_max, std::uint64_t seed);

/// 10 log10(255^2 / MSE) over all pixels, channels and images; 99 for identical input.
double psnr(std::span<const Image8> a, std::span<const Image8> b);
/// PSNR of linear frames after delinearization and 8-bit quantization.
double psnr(std::span<const Frame> a, std::span<const Frame> b);
/// PSNR restricted to pixels with mask != 0.
double psnr(std::span<const Frame> a, std::span<const Frame> b, std::span<const Mask> masks);

} // namespace scenespace::synth
