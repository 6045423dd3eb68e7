// Copyright Contributors to the scenespace project
// SPDX-License-Identifier: Apache-2.0

#include "scenespace/geometry.hpp"

#include "scenespace/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace scenespace {

Eigen::Vector3d CameraPose::ray_direction(const Eigen::Vector2d& px) const {
    const Eigen::Vector3d cam_dir((px.x() - cx) / fx, (px.y() - cy) / fy, 1.0);
    return (rotation().transpose() * cam_dir).normalized();
}

void CameraPose::validate() const {
    const auto frame = std::to_string(frame_index);
    if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
        throw DataError("camera " + frame + ": focal lengths must be positive and finite");
    }
    if (!std::isfinite(cx) || !std::isfinite(cy) || !world_to_cam.allFinite()) {
        throw DataError("camera " + frame + ": non-finite entries");
    }
    const Eigen::Matrix3d r = rotation();
    if (((r.transpose() * r) - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-6) {
        throw DataError("camera " + frame + ": rotation block is not orthonormal");
    }
    if (r.determinant() < 0.0) {
        throw DataError("camera " + frame + ": rotation block is a reflection");
    }
    const Eigen::RowVector4d last = world_to_cam.row(3);
    if ((last - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-12) {
        throw DataError("camera " + frame + ": last row of world_to_cam must be [0 0 0 1]");
    }
}

CameraPose CameraPose::with_grid_scale(double factor) const {
    CameraPose out = *this;
    out.fx *= factor;
    out.fy *= factor;
    out.cx *= factor;
    out.cy *= factor;
    return out;
}

double linearize(double encoded) { return 255.0 * std::pow(encoded / 255.0, kGamma); }

double delinearize(double linear) { return 255.0 * std::pow(std::max(linear, 0.0) / 255.0, 1.0 / kGamma); }

std::uint8_t quantize(double encoded) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(encoded), 0L, 255L));
}

Frame linearize(const Image8& image, int frame_index) {
    // 256-entry table; every 8-bit value maps to exactly one linear value
    static const auto table = [] {
        std::array<float, 256> t{};
        for (int i = 0; i < 256; ++i) {
            t[i] = static_cast<float>(linearize(static_cast<double>(i)));
        }
        return t;
    }();
    Frame out(image.width, image.height, frame_index);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        const std::uint8_t* p = &image.data[i * 3];
        out.data[i] = Rgb(table[p[0]], table[p[1]], table[p[2]]);
    }
    return out;
}

Image8 delinearize(const Frame& frame) {
    Image8 out(frame.width, frame.height);
    for (std::size_t i = 0; i < frame.data.size(); ++i) {
        for (int c = 0; c < 3; ++c) {
            out.data[i * 3 + c] = quantize(delinearize(static_cast<double>(frame.data[i][c])));
        }
    }
    return out;
}

ScenePoint project_to_scene(const CameraPose& cam, const Eigen::Vector2d& px, double depth) {
    if (!(depth > 0.0) || !std::isfinite(depth)) {
        throw DomainError("project_to_scene: depth must be positive and finite");
    }
    const Eigen::Vector3d cam_pt((px.x() - cam.cx) / cam.fx * depth, (px.y() - cam.cy) / cam.fy * depth, depth);
    return cam.rotation().transpose() * (cam_pt - cam.translation());
}

std::optional<ImagePoint> project_to_image(const CameraPose& cam, const ScenePoint& pt) {
    const Eigen::Vector3d c = cam.rotation() * pt + cam.translation();
    if (!(c.z() > 0.0)) {
        return std::nullopt;
    }
    return ImagePoint{{cam.fx * c.x() / c.z() + cam.cx, cam.fy * c.y() / c.z() + cam.cy}, c.z()};
}

namespace {

double percentile(std::vector<double>& values, double q) {
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double t = pos - static_cast<double>(lo);
    return values[lo] + t * (values[hi] - values[lo]);
}

} // namespace

SceneScale normalize_scene(std::span<const DepthMap> depths, std::span<const CameraPose> cams, int stride) {
    if (stride < 1) {
        throw ConfigError("normalize_scene: stride must be >= 1");
    }
    if (depths.size() != cams.size()) {
        throw DataError("normalize_scene: depth and camera counts differ");
    }
    std::array<std::vector<double>, 3> axes;
    for (std::size_t f = 0; f < depths.size(); f += static_cast<std::size_t>(stride)) {
        const DepthMap& d = depths[f];
        for (int y = 0; y < d.height; y += stride) {
            for (int x = 0; x < d.width; x += stride) {
                if (!d.valid(x, y)) {
                    continue;
                }
                const ScenePoint p = project_to_scene(cams[f], pixel_center({x, y}), d.at(x, y));
                for (int a = 0; a < 3; ++a) {
                    axes[a].push_back(p[a]);
                }
            }
        }
    }
    if (axes[0].empty()) {
        throw DataError("normalize_scene: no valid depth samples");
    }
    double extent = 0.0;
    for (auto& values : axes) {
        const double lo = percentile(values, 0.05);
        const double hi = percentile(values, 0.95);
        extent = std::max(extent, hi - lo);
    }
    if (!(extent > 0.0)) {
        throw DataError("normalize_scene: degenerate scene extent");
    }
    return SceneScale{10.0 / extent};
}

void apply_scene_scale(const SceneScale& scale, CameraPose& cam) {
    cam.world_to_cam.topRightCorner<3, 1>() *= scale.scale;
}

void apply_scene_scale(const SceneScale& scale, std::span<DepthMap> depths, std::span<CameraPose> cams) {
    const auto s = static_cast<float>(scale.scale);
    for (DepthMap& d : depths) {
        for (float& v : d.depth) {
            if (DepthMap::is_valid(v)) {
                v *= s;
            }
        }
    }
    for (CameraPose& cam : cams) {
        apply_scene_scale(scale, cam);
    }
}

} // namespace scenespace
