// Copyright Contributors to the scenespace project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "scenespace/geometry.hpp"
#include "scenespace/image.hpp"

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace scenespace {

/// One observation of the scene: linear color, scene position and frame time,
/// plus the pixel it came from.
struct Sample {
    Eigen::Vector3d rgb = Eigen::Vector3d::Zero();
    ScenePoint xyz = ScenePoint::Zero();
    double f = 0.0;
    PixelIndex src;
    /// Squared scene-space edge length of the source pixel (see sample_area).
    std::optional<double> area;
    /// Number of samples of the same set closer to the output camera (see depth_order).
    std::optional<int> ord;
};

/// Samples ordered by (source frame ascending, row-major source pixel).
struct SampleSet {
    std::vector<Sample> samples;
    std::optional<Sample> ref;

    void clear() {
        samples.clear();
        ref.reset();
    }
};

/// Gathering query: a square of side `l` output pixels around the continuous
/// position `px`, truncated to camera-space depths (near, far).
struct FrustumSpec {
    Eigen::Vector2d px = Eigen::Vector2d::Zero();
    double l = 3.0;
    double near = kNear;
    double far = kFar;

    static FrustumSpec at(PixelIndex p, double l = 3.0) { return FrustumSpec{pixel_center(p), l, kNear, kFar}; }
};

/// Read-only view of one input frame of the temporal window. `points` optionally holds
/// the precomputed scene point of every pixel (see unproject_depth_map).
struct FrameView {
    const Frame* frame = nullptr;
    const DepthMap* depth = nullptr;
    const CameraPose* cam = nullptr;
    const std::vector<ScenePoint>* points = nullptr;
};

/// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct PixelRect {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    bool empty() const { return x1 <= x0 || y1 <= y0; }
    bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
    long long area() const { return empty() ? 0 : static_cast<long long>(x1 - x0) * (y1 - y0); }
};

/// The 8 world-space vertices of the truncated pyramid. Index bit 0 selects +x,
/// bit 1 selects +y and bit 2 selects the far plane.
std::array<ScenePoint, 8> frustum_corners(const CameraPose& cam_out, const FrustumSpec& spec);

/// Conservative pixel region of the frustum's projection into an input frame: the bounding
/// box of the projected hull, widened by one pixel and clipped to the image. Frustum edges are
/// clipped against z = 1e-6 of the input camera first.
PixelRect frustum_hull_2d(std::span<const ScenePoint, 8> corners, const CameraPose& cam_in, int width, int height);

/// Per-pixel acceptance: L1 distance of the reprojection to the output pixel below l/2 and
/// reprojected depth inside (near, far).
inline bool passes_reprojection_test(double u, double v, double z, const FrustumSpec& spec) {
    return z > spec.near && z < spec.far && std::abs(u - spec.px.x()) + std::abs(v - spec.px.y()) < 0.5 * spec.l;
}

/// Scene point of every pixel, NaN for INVALID depth.
std::vector<ScenePoint> unproject_depth_map(const CameraPose& cam, const DepthMap& depth);

/// Reusable gathering state for one output camera and one temporal window. Construction
/// reprojects every valid input pixel into the output camera once; gather() then only
/// scans the hull regions. Immutable after construction, so gather() may run concurrently.
class GatherContext {
public:
    /// `attach_reference` selects whether the sample at the output pixel of the output
    /// frame is reported as the set's reference (only meaningful when the output grid is
    /// the input grid).
    GatherContext(const CameraPose& cam_out, std::span<const FrameView> window, bool attach_reference = true);

    void gather(const FrustumSpec& spec, SampleSet& out) const;
    SampleSet gather(const FrustumSpec& spec) const {
        SampleSet out;
        gather(spec, out);
        return out;
    }

    const CameraPose& output_camera() const { return cam_out_; }

private:
    struct Reprojection {
        double u;
        double v;
        double z; // NaN when the pixel has no sample or lands behind the output camera
    };

    struct Slot {
        FrameView view;
        std::vector<Reprojection> reprojections;
        std::vector<ScenePoint> owned_points;
        double z_min = 0.0;
        double z_max = -1.0;
        const ScenePoint& point(std::size_t i) const {
            return view.points != nullptr ? (*view.points)[i] : owned_points[i];
        }
    };

    CameraPose cam_out_;
    std::vector<Slot> slots_;
    std::optional<std::size_t> reference_slot_;
};

/// Gathers S(p) for one output pixel frustum over the window. Equivalent to building a
/// GatherContext and querying it once.
SampleSet gather(const CameraPose& cam_out, const FrustumSpec& spec, std::span<const FrameView> window);

/// Reference implementation: tests every pixel of every window frame. Used as an oracle.
/// Reads FrameView::points when present instead of unprojecting.
SampleSet gather_bruteforce(const CameraPose& cam_out, const FrustumSpec& spec, std::span<const FrameView> window);

/// Squared scene-space distance between the left and right edge midpoints of the sample's
/// source pixel at its depth. Throws DomainError for invalid depth.
double sample_area(const Sample& s, const CameraPose& cam, double depth);

/// Number of samples strictly closer to `center` than `s`.
int depth_order(const Sample& s, std::span<const Sample> set, const ScenePoint& center);

/// depth_order for every sample of the set, in O(n log n).
std::vector<int> depth_orders(std::span<const Sample> set, const ScenePoint& center);

} // namespace scenespace
