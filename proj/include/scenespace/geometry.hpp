// Copyright Contributors to the scenespace project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "scenespace/image.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>

namespace scenespace {

/// Clipping planes of every pixel frustum, in normalized scene units.
inline constexpr double kNear = 0.01;
inline constexpr double kFar = 1000.0;

/// Exponent of the power-law color transfer curve.
inline constexpr double kGamma = 2.2;

using ScenePoint = Eigen::Vector3d;

/// Pinhole camera for one video frame. Pixel (i, j) covers [i, i+1) x [j, j+1),
/// so the principal point is expressed in the same continuous coordinates.
struct CameraPose {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    Eigen::Matrix4d world_to_cam = Eigen::Matrix4d::Identity();
    int frame_index = 0;

    Eigen::Matrix3d rotation() const { return world_to_cam.topLeftCorner<3, 3>(); }
    Eigen::Vector3d translation() const { return world_to_cam.topRightCorner<3, 1>(); }

    /// Center of projection in world coordinates.
    Eigen::Vector3d center() const { return -rotation().transpose() * translation(); }

    /// Unit world-space direction of the ray through continuous pixel coordinates (u, v).
    Eigen::Vector3d ray_direction(const Eigen::Vector2d& px) const;

    /// Throws DataError if intrinsics or the rotation block are not usable.
    void validate() const;

    /// Same pose with intrinsics rescaled for an output grid `factor` times finer per side.
    CameraPose with_grid_scale(double factor) const;
};

/// A pixel projected into an image: continuous coordinates plus camera-space z.
struct ImagePoint {
    Eigen::Vector2d px;
    double depth = 0.0;
};

/// Power-law linearization of one 8-bit gamma-encoded channel value.
double linearize(double encoded);
/// Exact inverse of linearize on [0, 255].
double delinearize(double linear);
std::uint8_t quantize(double encoded);

Frame linearize(const Image8& image, int frame_index = 0);
Image8 delinearize(const Frame& frame);

/// Unprojects continuous pixel coordinates at camera-space depth into world space.
/// Throws DomainError if the depth is not positive and finite.
ScenePoint project_to_scene(const CameraPose& cam, const Eigen::Vector2d& px, double depth);

/// Pinhole projection. Returns nullopt for points with camera-space z <= 0 (behind the camera).
std::optional<ImagePoint> project_to_image(const CameraPose& cam, const ScenePoint& pt);

struct SceneScale {
    double scale = 1.0;
};

/// Estimates a uniform scale such that the central 90% (5th to 95th percentile per axis)
/// of sampled scene points spans 10 units along the largest axis.
/// Throws DataError if no valid depth pixel is sampled.
SceneScale normalize_scene(std::span<const DepthMap> depths, std::span<const CameraPose> cams, int stride);

/// Multiplies depths and camera translations by the scale in place.
void apply_scene_scale(const SceneScale& scale, std::span<DepthMap> depths, std::span<CameraPose> cams);
void apply_scene_scale(const SceneScale& scale, CameraPose& cam);

} // namespace scenespace
