// Copyright Contributors to the scenespace project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "scenespace/dataset.hpp"
#include "scenespace/filters.hpp"
#include "scenespace/sampling.hpp"

#include <Eigen/Core>

#include <climits>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scenespace {

enum class Application { denoise, deblur, superres, inpaint, semitransparent, shutter, action, aperture };

std::string_view to_string(Application app);
/// Throws ConfigError for unknown names.
Application parse_application(std::string_view name);

/// Axis-aligned scene-space box, active on the frame interval [frame_begin, frame_end].
struct Region3D {
    Eigen::Vector3d min = Eigen::Vector3d::Zero();
    Eigen::Vector3d max = Eigen::Vector3d::Zero();
    int frame_begin = INT_MIN;
    int frame_end = INT_MAX;

    bool contains(const ScenePoint& p, int frame) const {
        return frame >= frame_begin && frame <= frame_end && (p.array() >= min.array()).all() &&
               (p.array() <= max.array()).all();
    }
    void validate() const;
};

/// Everything that selects and parameterizes one rendering application.
struct RenderJob {
    Application application = Application::denoise;
    /// Temporal gathering radius in frames; derived from sigma_f when unset.
    std::optional<int> window_radius;
    /// Frustum side length in output pixels.
    double l = 3.0;
    Sigmas sigmas;
    std::optional<ShutterFunction> shutter;
    std::optional<ApertureSpec> aperture;
    /// Inpainting: source of masks when no mask files are given. Shutter and action:
    /// restricts the shutter to samples inside the region.
    std::optional<Region3D> region;
    /// Output pixels per input pixel along each axis (super resolution only).
    int superres_factor = 3;
    /// Color deviation of the input-pixel term used for semi-transparency.
    double semitransparent_sigma_rgb = 80.0;
    int inpaint_iterations = 2;

    /// Job with the per-application default sigmas preloaded.
    static RenderJob defaults(Application app);

    /// Throws ConfigError if a parameter required by the application is missing or invalid.
    void validate() const;

    /// Radius used when window_radius is unset: min(3 sigma_f, 60), or a per-application
    /// fallback when sigma_f is not used.
    int default_window_radius() const;
};

struct RenderOptions {
    /// Worker threads; 0 selects the OpenMP default. Never changes the output.
    int threads = 0;
    /// Subsampling stride used when the scene scale has to be estimated.
    int normalize_stride = 4;
};

struct FrameStats {
    int frame_index = 0;
    double seconds = 0.0;
    /// Mean |S(p)| over gathered output pixels.
    double samples_per_pixel = 0.0;
    /// Mean W / |S(p)| over gathered output pixels with a non-empty set.
    double weight_fraction = 0.0;
};

struct RenderResult {
    std::vector<Frame> frames; // linear RGB, output resolution
    std::vector<FrameStats> stats;
};

/// M^f(p) = 1 where the pixel's scene point lies inside the region. Expects normalized
/// depths and cameras.
std::vector<Mask> region_to_masks(const Region3D& region, std::span<const DepthMap> depths,
                                  std::span<const CameraPose> cams);

/// Prepared render state for one job over one dataset. Construction validates the job,
/// normalizes the scene scale (the dataset's sidecar scale, or an estimate) and resolves
/// masks. Rendering a frame is parallel over output pixels and deterministic.
class Renderer {
public:
    Renderer(RenderJob job, const Dataset& dataset, RenderOptions options = {});
    ~Renderer();
    Renderer(const Renderer&) = delete;
    Renderer& operator=(const Renderer&) = delete;

    /// Renders the frame stored at position `slot` of the dataset.
    Frame render_frame(std::size_t slot, FrameStats* stats = nullptr);

    RenderResult render_video(const std::function<void(const FrameStats&)>& progress = {});

    const SceneScale& scale() const { return scale_; }
    const std::vector<CameraPose>& cameras() const { return cams_; }
    const std::vector<DepthMap>& depths() const { return depths_; }
    const std::vector<Mask>& masks() const { return masks_; }
    /// Window slots gathered for the output frame at `slot`.
    std::vector<std::size_t> window_slots(std::size_t slot) const;
    /// Frustum side length actually used for gathering.
    double effective_l() const { return l_eff_; }

private:
    const std::vector<ScenePoint>& points(std::size_t slot);
    std::size_t slot_of_frame(int frame_index) const;

    RenderJob job_;
    const Dataset& data_;
    RenderOptions options_;
    SceneScale scale_;
    std::vector<CameraPose> cams_;
    std::vector<DepthMap> depths_;
    std::vector<Mask> masks_;
    std::vector<double> gradient_sums_;
    double l_eff_ = 3.0;
    std::map<std::size_t, std::vector<ScenePoint>> points_;
};

/// One-shot helpers over a fresh Renderer.
Frame render_frame(std::size_t slot, const RenderJob& job, const Dataset& dataset, const RenderOptions& options = {});
RenderResult render_video(const RenderJob& job, const Dataset& dataset, const RenderOptions& options = {});

} // namespace scenespace
