// Copyright Contributors to the scenespace project
// SPDX-License-Identifier: Apache-2.0

#include "scenespace/depth_estimation.hpp"

#include "scenespace/errors.hpp"

#include <Eigen/Dense>
#include <omp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace scenespace {

void SweepConfig::validate() const {
    if (num_hypotheses < 2) {
        throw ConfigError("plane sweep needs at least 2 hypotheses");
    }
    if (!(d_min > 0.0) || !(d_min < d_max) || !std::isfinite(d_max)) {
        throw ConfigError("plane sweep needs 0 < d_min < d_max");
    }
    if (window_radius < 1) {
        throw ConfigError("plane sweep window radius must be >= 1");
    }
}

std::vector<double> SweepConfig::hypotheses() const {
    std::vector<double> depths(static_cast<std::size_t>(num_hypotheses));
    const double inv_near = 1.0 / d_min;
    const double inv_far = 1.0 / d_max;
    for (int k = 0; k < num_hypotheses; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(num_hypotheses - 1);
        depths[k] = 1.0 / (inv_near + t * (inv_far - inv_near));
    }
    depths.front() = d_min;
    depths.back() = d_max;
    return depths;
}

namespace {

constexpr int kPatchSide = 2 * SweepConfig::kPatchRadius + 1;
using Patch = std::array<Rgb, kPatchSide * kPatchSide>;

Patch reference_patch(const Frame& ref, PixelIndex p) {
    constexpr int r = SweepConfig::kPatchRadius;
    Patch patch;
    for (int dy = -r; dy <= r; ++dy) {
        const int y = std::clamp(p.y + dy, 0, ref.height - 1);
        for (int dx = -r; dx <= r; ++dx) {
            patch[(dy + r) * kPatchSide + dx + r] = ref.at(std::clamp(p.x + dx, 0, ref.width - 1), y);
        }
    }
    return patch;
}

// All patch taps share one fractional offset, so the bilinear weights and the clamped
// source grid are computed once.
double patch_cost(const Patch& a, const Frame& other, const Eigen::Vector2d& other_px) {
    constexpr int r = SweepConfig::kPatchRadius;
    constexpr int n = kPatchSide + 1;
    const double x = other_px.x() - 0.5;
    const double y = other_px.y() - 0.5;
    const double fx = std::floor(x);
    const double fy = std::floor(y);
    const auto tx = static_cast<float>(x - fx);
    const auto ty = static_cast<float>(y - fy);
    std::array<int, n> xs;
    std::array<int, n> ys;
    for (int i = 0; i < n; ++i) {
        xs[i] = std::clamp(static_cast<int>(fx) - r + i, 0, other.width - 1);
        ys[i] = std::clamp(static_cast<int>(fy) - r + i, 0, other.height - 1);
    }
    std::array<Rgb, n * kPatchSide> rows; // horizontally interpolated rows
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < kPatchSide; ++i) {
            rows[j * kPatchSide + i] = other.at(xs[i], ys[j]) * (1.0f - tx) + other.at(xs[i + 1], ys[j]) * tx;
        }
    }
    double cost = 0.0;
    for (int j = 0; j < kPatchSide; ++j) {
        for (int i = 0; i < kPatchSide; ++i) {
            const Rgb b = rows[j * kPatchSide + i] * (1.0f - ty) + rows[(j + 1) * kPatchSide + i] * ty;
            cost += (a[j * kPatchSide + i] - b).cast<double>().squaredNorm();
        }
    }
    return cost;
}

} // namespace

double patch_cost(const Frame& ref, PixelIndex ref_px, const Frame& other, const Eigen::Vector2d& other_px) {
    return patch_cost(reference_patch(ref, ref_px), other, other_px);
}

std::pair<double, double> default_depth_range(std::span<const CameraPose> cams) {
    std::vector<double> baselines;
    for (std::size_t i = 1; i < cams.size(); ++i) {
        baselines.push_back((cams[i].center() - cams[i - 1].center()).norm());
    }
    if (baselines.empty()) {
        throw DataError("depth range needs at least two cameras");
    }
    std::nth_element(baselines.begin(), baselines.begin() + baselines.size() / 2, baselines.end());
    const double median = baselines[baselines.size() / 2];
    if (!(median > 0.0)) {
        throw DataError("cameras do not move; depth range cannot be derived");
    }
    return {0.1 * median, 100.0 * median};
}

DepthMap estimate_depth(int frame_index, std::span<const Frame> frames, std::span<const CameraPose> cams,
                        const SweepConfig& cfg, int threads) {
    cfg.validate();
    if (frames.size() != cams.size()) {
        throw DataError("estimate_depth: frame and camera counts differ");
    }
    std::size_t ref_slot = frames.size();
    std::vector<std::size_t> neighbors;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const int df = frames[i].frame_index - frame_index;
        if (df == 0) {
            ref_slot = i;
        } else if (std::abs(df) <= cfg.window_radius) {
            neighbors.push_back(i);
        }
    }
    if (ref_slot == frames.size()) {
        throw DataError("estimate_depth: frame " + std::to_string(frame_index) + " not found");
    }
    if (neighbors.empty()) {
        throw ConfigError("estimate_depth: no neighbor frame inside the temporal window");
    }

    const Frame& ref = frames[ref_slot];
    const CameraPose& ref_cam = cams[ref_slot];
    const std::vector<double> depths = cfg.hypotheses();

    // camera-space point of neighbor n at hypothesis depth d: offset[n] + d * (rot[n] * ray)
    struct Relative {
        Eigen::Matrix3d rot;
        Eigen::Vector3d offset;
        const Frame* frame;
        const CameraPose* cam;
    };
    std::vector<Relative> rel;
    for (std::size_t n : neighbors) {
        Relative r;
        r.rot = cams[n].rotation() * ref_cam.rotation().transpose();
        r.offset = cams[n].rotation() * ref_cam.center() + cams[n].translation();
        r.frame = &frames[n];
        r.cam = &cams[n];
        rel.push_back(r);
    }

    DepthMap out(ref.width, ref.height);
    const int num_threads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(num_threads)
    for (int y = 0; y < ref.height; ++y) {
        std::vector<Eigen::Vector3d> rays(rel.size());
        for (int x = 0; x < ref.width; ++x) {
            const Patch patch = reference_patch(ref, {x, y});
            const Eigen::Vector2d c = pixel_center({x, y});
            const Eigen::Vector3d ray((c.x() - ref_cam.cx) / ref_cam.fx, (c.y() - ref_cam.cy) / ref_cam.fy, 1.0);
            for (std::size_t n = 0; n < rel.size(); ++n) {
                rays[n] = rel[n].rot * ray;
            }
            double best_cost = std::numeric_limits<double>::infinity();
            int best = -1;
            for (int k = 0; k < cfg.num_hypotheses; ++k) {
                double sum = 0.0;
                int count = 0;
                for (std::size_t n = 0; n < rel.size(); ++n) {
                    const Eigen::Vector3d p = rel[n].offset + depths[k] * rays[n];
                    if (!(p.z() > 0.0)) {
                        continue;
                    }
                    const CameraPose& cam = *rel[n].cam;
                    const double u = cam.fx * p.x() / p.z() + cam.cx;
                    const double v = cam.fy * p.y() / p.z() + cam.cy;
                    if (!(u >= 0.0 && v >= 0.0 && u < rel[n].frame->width && v < rel[n].frame->height)) {
                        continue;
                    }
                    sum += patch_cost(patch, *rel[n].frame, {u, v});
                    ++count;
                }
                if (count == 0) {
                    continue;
                }
                const double mean = sum / count;
                if (mean < best_cost) {
                    best_cost = mean;
                    best = k;
                }
            }
            if (best >= 0) {
                out.at(x, y) = static_cast<float>(depths[best]);
            }
        }
    }
    return out;
}

} // namespace scenespace
