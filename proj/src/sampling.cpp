// Copyright Contributors to the scenespace project
// SPDX-License-Identifier: Apache-2.0

#include "scenespace/sampling.hpp"

#include "scenespace/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace scenespace {

namespace {

constexpr double kClipZ = 1e-6;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Sample make_sample(const FrameView& view, PixelIndex q, const ScenePoint& xyz) {
    Sample s;
    s.rgb = view.frame->at(q.x, q.y).cast<double>();
    s.xyz = xyz;
    s.f = static_cast<double>(view.frame->frame_index);
    s.src = q;
    return s;
}

std::vector<std::size_t> ascending_order(std::span<const FrameView> window) {
    std::vector<std::size_t> order(window.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return window[a].frame->frame_index < window[b].frame->frame_index;
    });
    return order;
}

/// Window position of the output frame when the output pixel lies inside it.
std::optional<std::size_t> find_reference_slot(const CameraPose& cam_out, std::span<const FrameView> window) {
    for (std::size_t i = 0; i < window.size(); ++i) {
        if (window[i].frame->frame_index == cam_out.frame_index) {
            return i;
        }
    }
    return std::nullopt;
}

std::optional<PixelIndex> reference_pixel(const FrustumSpec& spec, const FrameView& view) {
    const PixelIndex p{static_cast<int>(std::floor(spec.px.x())), static_cast<int>(std::floor(spec.px.y()))};
    if (!view.frame->contains(p.x, p.y) || !view.depth->valid(p.x, p.y)) {
        return std::nullopt;
    }
    return p;
}

bool row_major_less(const Sample& a, PixelIndex b) {
    return a.src.y != b.y ? a.src.y < b.y : a.src.x < b.x;
}

/// Makes sure the reference sample is part of the samples gathered from its own frame,
/// which occupy [first, end()) of `out`.
void merge_reference(SampleSet& out, std::size_t first) {
    if (!out.ref) {
        return;
    }
    const PixelIndex q = out.ref->src;
    const auto begin = out.samples.begin() + static_cast<std::ptrdiff_t>(first);
    const auto it = std::lower_bound(begin, out.samples.end(), q, row_major_less);
    if (it == out.samples.end() || !(it->src == q)) {
        out.samples.insert(it, *out.ref);
    }
}

} // namespace

std::array<ScenePoint, 8> frustum_corners(const CameraPose& cam_out, const FrustumSpec& spec) {
    std::array<ScenePoint, 8> corners;
    const double h = 0.5 * spec.l;
    for (int i = 0; i < 8; ++i) {
        const double u = spec.px.x() + ((i & 1) != 0 ? h : -h);
        const double v = spec.px.y() + ((i & 2) != 0 ? h : -h);
        const double z = (i & 4) != 0 ? spec.far : spec.near;
        corners[i] = project_to_scene(cam_out, {u, v}, z);
    }
    return corners;
}

PixelRect frustum_hull_2d(std::span<const ScenePoint, 8> corners, const CameraPose& cam_in, int width, int height) {
    const Eigen::Matrix3d r = cam_in.rotation();
    const Eigen::Vector3d t = cam_in.translation();
    std::array<Eigen::Vector3d, 8> local;
    for (int i = 0; i < 8; ++i) {
        local[i] = r * corners[i] + t;
    }

    double min_u = std::numeric_limits<double>::infinity();
    double min_v = min_u;
    double max_u = -min_u;
    double max_v = -min_u;
    bool any = false;
    const auto add = [&](const Eigen::Vector3d& c) {
        const double u = cam_in.fx * c.x() / c.z() + cam_in.cx;
        const double v = cam_in.fy * c.y() / c.z() + cam_in.cy;
        min_u = std::min(min_u, u);
        max_u = std::max(max_u, u);
        min_v = std::min(min_v, v);
        max_v = std::max(max_v, v);
        any = true;
    };

    for (int i = 0; i < 8; ++i) {
        if (local[i].z() >= kClipZ) {
            add(local[i]);
        }
    }
    // edges connect corners differing in exactly one index bit
    for (int i = 0; i < 8; ++i) {
        for (int bit = 1; bit < 8; bit <<= 1) {
            const int j = i | bit;
            if (j == i) {
                continue;
            }
            const double zi = local[i].z();
            const double zj = local[j].z();
            if ((zi < kClipZ) != (zj < kClipZ)) {
                const double s = (kClipZ - zi) / (zj - zi);
                Eigen::Vector3d c = local[i] + s * (local[j] - local[i]);
                c.z() = kClipZ;
                add(c);
            }
        }
    }
    if (!any) {
        return {};
    }
    if (std::isnan(min_u + max_u + min_v + max_v)) {
        return PixelRect{0, 0, width, height};
    }

    // pixel q is centered at q + 0.5; one extra pixel of slack on every side
    const auto lo = [](double c, int size) {
        return static_cast<int>(std::clamp(std::floor(c - 0.5) - 1.0, 0.0, static_cast<double>(size)));
    };
    const auto hi = [](double c, int size) {
        return static_cast<int>(std::clamp(std::floor(c - 0.5) + 2.0, 0.0, static_cast<double>(size)));
    };
    return PixelRect{lo(min_u, width), lo(min_v, height), hi(max_u, width), hi(max_v, height)};
}

std::vector<ScenePoint> unproject_depth_map(const CameraPose& cam, const DepthMap& depth) {
    std::vector<ScenePoint> points(depth.depth.size(), ScenePoint::Constant(kNaN));
    for (int y = 0; y < depth.height; ++y) {
        for (int x = 0; x < depth.width; ++x) {
            if (depth.valid(x, y)) {
                points[depth.index(x, y)] = project_to_scene(cam, pixel_center({x, y}), depth.at(x, y));
            }
        }
    }
    return points;
}

GatherContext::GatherContext(const CameraPose& cam_out, std::span<const FrameView> window, bool attach_reference)
    : cam_out_(cam_out) {
    const auto order = ascending_order(window);
    const auto ref = attach_reference ? find_reference_slot(cam_out, window) : std::nullopt;
    slots_.reserve(window.size());
    for (std::size_t w : order) {
        if (ref && *ref == w) {
            reference_slot_ = slots_.size();
        }
        Slot slot;
        slot.view = window[w];
        if (slot.view.points == nullptr) {
            slot.owned_points = unproject_depth_map(*slot.view.cam, *slot.view.depth);
        }
        const std::size_t n = slot.view.depth->depth.size();
        slot.reprojections.assign(n, Reprojection{kNaN, kNaN, kNaN});
        double z_min = std::numeric_limits<double>::infinity();
        double z_max = -z_min;
        for (std::size_t i = 0; i < n; ++i) {
            if (!DepthMap::is_valid(slot.view.depth->depth[i])) {
                continue;
            }
            const auto proj = project_to_image(cam_out_, slot.point(i));
            if (!proj) {
                continue;
            }
            slot.reprojections[i] = Reprojection{proj->px.x(), proj->px.y(), proj->depth};
            z_min = std::min(z_min, proj->depth);
            z_max = std::max(z_max, proj->depth);
        }
        slot.z_min = z_min;
        slot.z_max = z_max;
        slots_.push_back(std::move(slot));
    }
}

void GatherContext::gather(const FrustumSpec& spec, SampleSet& out) const {
    out.clear();
    for (std::size_t k = 0; k < slots_.size(); ++k) {
        const Slot& slot = slots_[k];
        const std::size_t first = out.samples.size();
        if (reference_slot_ && *reference_slot_ == k) {
            if (const auto q = reference_pixel(spec, slot.view)) {
                out.ref = make_sample(slot.view, *q, slot.point(slot.view.depth->index(q->x, q->y)));
            }
        }

        // no pixel of this frame reprojects outside [z_min, z_max]; truncating the frustum
        // there shrinks the scanned region without changing the accepted set
        FrustumSpec truncated = spec;
        truncated.near = std::max(spec.near, slot.z_min);
        truncated.far = std::min(spec.far, slot.z_max);
        if (truncated.near <= truncated.far) {
            const auto corners = frustum_corners(cam_out_, truncated);
            const int width = slot.view.frame->width;
            const PixelRect rect = frustum_hull_2d(corners, *slot.view.cam, width, slot.view.frame->height);
            for (int y = rect.y0; y < rect.y1; ++y) {
                const Reprojection* row = slot.reprojections.data() + static_cast<std::size_t>(y) * width;
                for (int x = rect.x0; x < rect.x1; ++x) {
                    const Reprojection& r = row[x];
                    if (passes_reprojection_test(r.u, r.v, r.z, spec)) {
                        out.samples.push_back(
                            make_sample(slot.view, {x, y}, slot.point(static_cast<std::size_t>(y) * width + x)));
                    }
                }
            }
        }
        if (reference_slot_ && *reference_slot_ == k) {
            merge_reference(out, first);
        }
    }
}

SampleSet gather(const CameraPose& cam_out, const FrustumSpec& spec, std::span<const FrameView> window) {
    return GatherContext(cam_out, window).gather(spec);
}

SampleSet gather_bruteforce(const CameraPose& cam_out, const FrustumSpec& spec, std::span<const FrameView> window) {
    SampleSet out;
    const auto ref = find_reference_slot(cam_out, window);
    for (std::size_t w : ascending_order(window)) {
        const FrameView& view = window[w];
        const std::size_t first = out.samples.size();
        const bool is_ref = ref && *ref == w;
        std::optional<PixelIndex> ref_px = is_ref ? reference_pixel(spec, view) : std::nullopt;
        for (int y = 0; y < view.frame->height; ++y) {
            for (int x = 0; x < view.frame->width; ++x) {
                if (!view.depth->valid(x, y)) {
                    continue;
                }
                const ScenePoint xyz = view.points != nullptr
                                           ? (*view.points)[view.depth->index(x, y)]
                                           : project_to_scene(*view.cam, pixel_center({x, y}), view.depth->at(x, y));
                if (ref_px && *ref_px == PixelIndex{x, y}) {
                    out.ref = make_sample(view, {x, y}, xyz);
                }
                const auto proj = project_to_image(cam_out, xyz);
                if (proj && passes_reprojection_test(proj->px.x(), proj->px.y(), proj->depth, spec)) {
                    out.samples.push_back(make_sample(view, {x, y}, xyz));
                }
            }
        }
        if (is_ref) {
            merge_reference(out, first);
        }
    }
    return out;
}

double sample_area(const Sample& s, const CameraPose& cam, double depth) {
    if (!DepthMap::is_valid(static_cast<float>(depth))) {
        throw DomainError("sample_area: invalid depth");
    }
    const double v = s.src.y + 0.5;
    const ScenePoint left = project_to_scene(cam, {static_cast<double>(s.src.x), v}, depth);
    const ScenePoint right = project_to_scene(cam, {s.src.x + 1.0, v}, depth);
    return (left - right).squaredNorm();
}

int depth_order(const Sample& s, std::span<const Sample> set, const ScenePoint& center) {
    const double ds = (center - s.xyz).squaredNorm();
    int count = 0;
    for (const Sample& q : set) {
        if ((center - q.xyz).squaredNorm() < ds) {
            ++count;
        }
    }
    return count;
}

std::vector<int> depth_orders(std::span<const Sample> set, const ScenePoint& center) {
    std::vector<double> dist(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        dist[i] = (center - set[i].xyz).squaredNorm();
    }
    std::vector<double> sorted = dist;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> orders(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        orders[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), dist[i]) - sorted.begin());
    }
    return orders;
}

} // namespace scenespace
