// Copyright Contributors to the scenespace project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "scenespace/sampling.hpp"

#include <Eigen/Core>

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace scenespace {

/// Standard deviations of the diagonal sample-space Gaussian. An empty entry means the
/// dimension does not take part in the weighting.
struct Sigmas {
    std::optional<double> rgb;
    std::optional<double> xyz;
    std::optional<double> f;
    std::optional<double> area;
    std::optional<double> ord;

    /// Throws ConfigError if any present value is not positive and finite.
    void validate() const;
};

namespace shutter {

/// Regular exposure: open on [t0, t1].
struct Box {
    double t0 = 0.0;
    double t1 = 0.0;
};

/// Open within half_width frames of any instant.
struct ImpulseTrain {
    std::vector<double> instants;
    double half_width = 0.5;
};

/// Exponential falloff exp(-(t_peak - t) / tau) for t <= t_peak, closed after the peak.
struct DecayTail {
    double t_peak = 0.0;
    double tau = 1.0;
};

} // namespace shutter

using ShutterFunction = std::variant<shutter::Box, shutter::ImpulseTrain, shutter::DecayTail>;

void validate(const ShutterFunction& xi);

/// True if xi can be non-zero at frame time t.
bool shutter_open(const ShutterFunction& xi, double t);

/// Double-cone virtual aperture: radius a(z) = a0 + |z0 - z| * slope.
struct ApertureSpec {
    double a0 = 0.0;
    double z0 = 1.0;
    double slope = 0.0;

    double radius(double z) const { return a0 + std::abs(z0 - z) * slope; }
    void validate() const;
};

/// World-space viewing ray through an output pixel; `direction` is unit length.
struct ViewRay {
    Eigen::Vector3d origin = Eigen::Vector3d::Zero();
    Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();
};

/// Result of reducing a sample set to one color.
struct FilterResult {
    Eigen::Vector3d rgb = Eigen::Vector3d::Zero();
    double weight_sum = 0.0;
    /// weight_sum / |S|, 0 for an empty set.
    double weight_fraction = 0.0;
    bool used_fallback = false;
};

/// Below this total weight the filter returns its fallback color.
inline constexpr double kMinWeightSum = 1e-6;

/// Weighted mean of sample colors, accumulated in set order. `weights` pairs with `samples`.
FilterResult filter_set(std::span<const Sample> samples, std::span<const double> weights,
                        const Eigen::Vector3d& fallback);

template <typename WeightFn>
FilterResult filter_set(const SampleSet& set, WeightFn&& w, const Eigen::Vector3d& fallback) {
    std::vector<double> weights;
    weights.reserve(set.samples.size());
    for (const Sample& s : set.samples) {
        weights.push_back(w(s));
    }
    return filter_set(set.samples, weights, fallback);
}

/// Diagonal Gaussian about the reference over rgb (per channel), xyz (per axis) and f.
double w_denoise(const Sample& s, const Sample& ref, const Sigmas& sig);

/// Per-frame sharpness in [0, 1]: summed gradient magnitude normalized by the window maximum.
class SharpnessTable {
public:
    SharpnessTable() = default;
    /// `raw` maps frame index to summed gradient magnitude.
    explicit SharpnessTable(const std::map<int, double>& raw);

    /// Throws DataError if the frame is not covered.
    double at(double frame) const;
    bool contains(int frame) const { return values_.contains(frame); }

private:
    std::map<int, double> values_;
};

/// Sum over all pixels of the Euclidean norm of the six central-difference partials.
double frame_gradient_sum(const Frame& frame);

double w_deblur(const Sample& s, const Sample& ref, const Sigmas& sig, const SharpnessTable& sharpness);

/// Gaussian about the reference times exp(-area^2 / (2 sigma_area^2)). Throws DomainError
/// when the sample area has not been computed.
double w_superres(const Sample& s, const Sample& ref, const Sigmas& sig);

/// Component-wise mean over rgb, xyz and f. Throws DomainError for an empty set.
Sample mean_reference(std::span<const Sample> samples);

/// Gaussian about the reference for unmasked sources, 0 for masked ones.
double w_inpaint(const Sample& s, const Sample& ref, const Sigmas& sig, bool masked);

double w_shutter(const Sample& s, const ShutterFunction& xi);

/// Shutter weight times a Gaussian in depth order, computing the order against the set.
double w_action(const Sample& s, const ShutterFunction& xi, std::span<const Sample> set, const ScenePoint& cam_center,
                double sigma_ord);
/// Same with a precomputed depth order.
double w_action(const Sample& s, const ShutterFunction& xi, int ord, double sigma_ord);

/// s_area / (pi a(r)^2) inside the aperture cone, 0 outside or behind the camera.
/// Throws DomainError when the sample area has not been computed.
double w_aperture(const Sample& s, const ViewRay& ray, const ApertureSpec& ap);

/// Parameters of the iterated inpainting reduction.
struct InpaintParams {
    Sigmas sigmas;
    int iterations = 2;
    /// Semi-transparency: additionally weight by similarity to the input pixel's color.
    std::optional<Eigen::Vector3d> input_color;
    double input_sigma_rgb = 80.0;
};

/// Mean-shift reduction: starts from the mean of all samples, then `iterations` times
/// re-weights and moves the reference to the weighted mean. `masked[i]` tells whether
/// samples[i] comes from a masked source pixel. Falls back to the mean of all samples, or
/// black for an empty set.
FilterResult inpaint_filter(std::span<const Sample> samples, std::span<const std::uint8_t> masked,
                            const InpaintParams& params);

} // namespace scenespace
