// Copyright Contributors to the scenespace project
// SPDX-License-Identifier: Apache-2.0

#include "scenespace/filters.hpp"

#include "scenespace/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace scenespace {

namespace {

void check_sigma(const std::optional<double>& v, const char* name) {
    if (v && !(*v > 0.0 && std::isfinite(*v))) {
        throw ConfigError(std::string("sigma_") + name + " must be positive");
    }
}

double gaussian_exponent(const Sample& s, const Sample& ref, const Sigmas& sig) {
    double e = 0.0;
    if (sig.rgb) {
        e += (ref.rgb - s.rgb).squaredNorm() / (2.0 * *sig.rgb * *sig.rgb);
    }
    if (sig.xyz) {
        e += (ref.xyz - s.xyz).squaredNorm() / (2.0 * *sig.xyz * *sig.xyz);
    }
    if (sig.f) {
        const double d = ref.f - s.f;
        e += d * d / (2.0 * *sig.f * *sig.f);
    }
    return e;
}

} // namespace

void Sigmas::validate() const {
    check_sigma(rgb, "rgb");
    check_sigma(xyz, "xyz");
    check_sigma(f, "f");
    check_sigma(area, "area");
    check_sigma(ord, "ord");
}

void validate(const ShutterFunction& xi) {
    if (const auto* box = std::get_if<shutter::Box>(&xi); box != nullptr && !(box->t0 <= box->t1)) {
        throw ConfigError("box shutter requires t0 <= t1");
    }
    if (const auto* train = std::get_if<shutter::ImpulseTrain>(&xi)) {
        if (train->instants.empty() || !(train->half_width >= 0.0)) {
            throw ConfigError("impulse shutter requires at least one instant and half_width >= 0");
        }
    }
    if (const auto* tail = std::get_if<shutter::DecayTail>(&xi); tail != nullptr && !(tail->tau > 0.0)) {
        throw ConfigError("decay shutter requires tau > 0");
    }
}

bool shutter_open(const ShutterFunction& xi, double t) {
    Sample probe;
    probe.f = t;
    return w_shutter(probe, xi) > 0.0;
}

void ApertureSpec::validate() const {
    if (!(a0 >= 0.0) || !(slope >= 0.0) || !(z0 > 0.0) || !std::isfinite(a0 + slope + z0)) {
        throw ConfigError("aperture requires a0 >= 0, slope >= 0 and z0 > 0");
    }
}

FilterResult filter_set(std::span<const Sample> samples, std::span<const double> weights,
                        const Eigen::Vector3d& fallback) {
    FilterResult result;
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    double total = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        acc += weights[i] * samples[i].rgb;
        total += weights[i];
    }
    result.weight_sum = total;
    result.weight_fraction = samples.empty() ? 0.0 : total / static_cast<double>(samples.size());
    if (total < kMinWeightSum) {
        result.rgb = fallback;
        result.used_fallback = true;
    } else {
        result.rgb = acc / total;
    }
    return result;
}

double w_denoise(const Sample& s, const Sample& ref, const Sigmas& sig) {
    return std::exp(-gaussian_exponent(s, ref, sig));
}

SharpnessTable::SharpnessTable(const std::map<int, double>& raw) {
    double max_value = 0.0;
    for (const auto& [frame, v] : raw) {
        max_value = std::max(max_value, v);
    }
    for (const auto& [frame, v] : raw) {
        values_[frame] = max_value > 0.0 ? v / max_value : 0.0;
    }
}

double SharpnessTable::at(double frame) const {
    const auto it = values_.find(static_cast<int>(std::lround(frame)));
    if (it == values_.end()) {
        throw DataError("no sharpness entry for frame " + std::to_string(std::lround(frame)));
    }
    return it->second;
}

double frame_gradient_sum(const Frame& frame) {
    double total = 0.0;
    for (int y = 0; y < frame.height; ++y) {
        const int ym = std::max(y - 1, 0);
        const int yp = std::min(y + 1, frame.height - 1);
        for (int x = 0; x < frame.width; ++x) {
            const int xm = std::max(x - 1, 0);
            const int xp = std::min(x + 1, frame.width - 1);
            const Eigen::Vector3d gx = 0.5 * (frame.at(xp, y) - frame.at(xm, y)).cast<double>();
            const Eigen::Vector3d gy = 0.5 * (frame.at(x, yp) - frame.at(x, ym)).cast<double>();
            total += std::sqrt(gx.squaredNorm() + gy.squaredNorm());
        }
    }
    return total;
}

double w_deblur(const Sample& s, const Sample& ref, const Sigmas& sig, const SharpnessTable& sharpness) {
    return w_denoise(s, ref, sig) * sharpness.at(s.f);
}

double w_superres(const Sample& s, const Sample& ref, const Sigmas& sig) {
    if (!s.area) {
        throw DomainError("w_superres: sample area not computed");
    }
    double w = w_denoise(s, ref, sig);
    if (sig.area) {
        w *= std::exp(-(*s.area * *s.area) / (2.0 * *sig.area * *sig.area));
    }
    return w;
}

Sample mean_reference(std::span<const Sample> samples) {
    if (samples.empty()) {
        throw DomainError("mean_reference: empty sample set");
    }
    Sample mean;
    for (const Sample& s : samples) {
        mean.rgb += s.rgb;
        mean.xyz += s.xyz;
        mean.f += s.f;
    }
    const double n = static_cast<double>(samples.size());
    mean.rgb /= n;
    mean.xyz /= n;
    mean.f /= n;
    return mean;
}

double w_inpaint(const Sample& s, const Sample& ref, const Sigmas& sig, bool masked) {
    return masked ? 0.0 : w_denoise(s, ref, sig);
}

double w_shutter(const Sample& s, const ShutterFunction& xi) {
    const double t = s.f;
    return std::visit(
        [t](const auto& fn) -> double {
            using T = std::decay_t<decltype(fn)>;
            if constexpr (std::is_same_v<T, shutter::Box>) {
                return (t >= fn.t0 && t <= fn.t1) ? 1.0 : 0.0;
            } else if constexpr (std::is_same_v<T, shutter::ImpulseTrain>) {
                for (double instant : fn.instants) {
                    if (std::abs(t - instant) <= fn.half_width) {
                        return 1.0;
                    }
                }
                return 0.0;
            } else {
                return t <= fn.t_peak ? std::exp(-(fn.t_peak - t) / fn.tau) : 0.0;
            }
        },
        xi);
}

double w_action(const Sample& s, const ShutterFunction& xi, int ord, double sigma_ord) {
    const double o = static_cast<double>(ord);
    return w_shutter(s, xi) * std::exp(-(o * o) / (2.0 * sigma_ord * sigma_ord));
}

double w_action(const Sample& s, const ShutterFunction& xi, std::span<const Sample> set, const ScenePoint& cam_center,
                double sigma_ord) {
    return w_action(s, xi, depth_order(s, set, cam_center), sigma_ord);
}

double w_aperture(const Sample& s, const ViewRay& ray, const ApertureSpec& ap) {
    if (!s.area) {
        throw DomainError("w_aperture: sample area not computed");
    }
    const Eigen::Vector3d d = s.xyz - ray.origin;
    const double r = d.dot(ray.direction);
    if (!(r > 0.0)) {
        return 0.0;
    }
    const double q = (d - r * ray.direction).norm();
    const double a = ap.radius(r);
    if (!(a > 0.0) || !(q < a)) {
        return 0.0;
    }
    return *s.area / (std::numbers::pi * a * a);
}

FilterResult inpaint_filter(std::span<const Sample> samples, std::span<const std::uint8_t> masked,
                            const InpaintParams& params) {
    Eigen::Vector3d fallback = Eigen::Vector3d::Zero();
    for (const Sample& s : samples) {
        fallback += s.rgb;
    }
    if (samples.empty()) {
        FilterResult empty;
        empty.used_fallback = true;
        return empty;
    }

    Sigmas input_sig;
    input_sig.rgb = params.input_sigma_rgb;
    Sample input_ref;
    if (params.input_color) {
        input_ref.rgb = *params.input_color;
    }

    fallback /= static_cast<double>(samples.size());

    Sample ref = mean_reference(samples);
    std::vector<double> weights(samples.size());
    FilterResult result;
    for (int it = 0; it < std::max(params.iterations, 1); ++it) {
        for (std::size_t i = 0; i < samples.size(); ++i) {
            double w = w_inpaint(samples[i], ref, params.sigmas, masked[i] != 0);
            if (params.input_color) {
                w += w_denoise(samples[i], input_ref, input_sig);
            }
            weights[i] = w;
        }
        result = filter_set(samples, weights, fallback);
        if (result.used_fallback) {
            break;
        }
        // move the reference to the weighted mean in all seven dimensions
        Sample next;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            next.rgb += weights[i] * samples[i].rgb;
            next.xyz += weights[i] * samples[i].xyz;
            next.f += weights[i] * samples[i].f;
        }
        next.rgb /= result.weight_sum;
        next.xyz /= result.weight_sum;
        next.f /= result.weight_sum;
        ref = next;
    }
    return result;
}

} // namespace scenespace
