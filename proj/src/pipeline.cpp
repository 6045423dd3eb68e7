// Copyright Contributors to the scenespace project
// SPDX-License-Identifier: Apache-2.0

#include "scenespace/pipeline.hpp"

#include "scenespace/errors.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

namespace scenespace {

namespace {

constexpr std::array<std::pair<Application, std::string_view>, 8> kApplicationNames{{
    {Application::denoise, "denoise"},
    {Application::deblur, "deblur"},
    {Application::superres, "superres"},
    {Application::inpaint, "inpaint"},
    {Application::semitransparent, "semitransparent"},
    {Application::shutter, "shutter"},
    {Application::action, "action"},
    {Application::aperture, "aperture"},
}};

constexpr int kMaxWindowRadius = 60;

bool uses_masks(Application app) { return app == Application::inpaint || app == Application::semitransparent; }

bool uses_shutter(Application app) { return app == Application::shutter || app == Application::action; }

} // namespace

std::string_view to_string(Application app) {
    for (const auto& [value, name] : kApplicationNames) {
        if (value == app) {
            return name;
        }
    }
    return "unknown";
}

Application parse_application(std::string_view name) {
    for (const auto& [value, n] : kApplicationNames) {
        if (n == name) {
            return value;
        }
    }
    throw ConfigError("unknown application '" + std::string(name) + "'");
}

void Region3D::validate() const {
    if (!(min.array() <= max.array()).all()) {
        throw ConfigError("region: min must not exceed max on any axis");
    }
    if (frame_begin > frame_end) {
        throw ConfigError("region: empty frame interval");
    }
}

RenderJob RenderJob::defaults(Application app) {
    RenderJob job;
    job.application = app;
    switch (app) {
    case Application::denoise:
        job.sigmas.rgb = 40.0;
        job.sigmas.xyz = 10.0;
        job.sigmas.f = 6.0;
        break;
    case Application::deblur:
        job.sigmas.rgb = 200.0;
        job.sigmas.xyz = 10.0;
        job.sigmas.f = 20.0;
        break;
    case Application::superres:
        job.sigmas.rgb = 50.0;
        job.sigmas.area = 0.02;
        break;
    case Application::inpaint:
    case Application::semitransparent:
        job.sigmas.rgb = 55.0;
        break;
    case Application::action:
        job.sigmas.ord = 10.0;
        break;
    case Application::shutter:
    case Application::aperture:
        break;
    }
    return job;
}

void RenderJob::validate() const {
    sigmas.validate();
    if (!(l >= 1.0) || !std::isfinite(l)) {
        throw ConfigError("frustum size l must be >= 1");
    }
    if (window_radius && *window_radius < 0) {
        throw ConfigError("window radius must be >= 0");
    }
    if (region) {
        region->validate();
    }
    switch (application) {
    case Application::superres:
        if (superres_factor < 1) {
            throw ConfigError("super resolution factor must be >= 1");
        }
        break;
    case Application::action:
        if (!sigmas.ord) {
            throw ConfigError("action requires sigma_ord");
        }
        [[fallthrough]];
    case Application::shutter:
        if (!shutter) {
            throw ConfigError(std::string(to_string(application)) + " requires a shutter function");
        }
        scenespace::validate(*shutter);
        break;
    case Application::aperture:
        if (!aperture) {
            throw ConfigError("aperture requires an aperture specification");
        }
        aperture->validate();
        break;
    case Application::semitransparent:
        if (!(semitransparent_sigma_rgb > 0.0)) {
            throw ConfigError("semi-transparency sigma must be positive");
        }
        [[fallthrough]];
    case Application::inpaint:
        if (inpaint_iterations < 1) {
            throw ConfigError("inpainting needs at least one iteration");
        }
        break;
    case Application::denoise:
    case Application::deblur:
        break;
    }
}

int RenderJob::default_window_radius() const {
    if (sigmas.f) {
        return std::min(static_cast<int>(std::ceil(3.0 * *sigmas.f)), kMaxWindowRadius);
    }
    switch (application) {
    case Application::inpaint:
    case Application::semitransparent:
        return kMaxWindowRadius;
    case Application::shutter:
    case Application::action:
        return INT_MAX;
    default:
        return 10;
    }
}

std::vector<Mask> region_to_masks(const Region3D& region, std::span<const DepthMap> depths,
                                  std::span<const CameraPose> cams) {
    std::vector<Mask> masks;
    masks.reserve(depths.size());
    for (std::size_t i = 0; i < depths.size(); ++i) {
        const DepthMap& d = depths[i];
        Mask m(d.width, d.height, 0);
        for (int y = 0; y < d.height; ++y) {
            for (int x = 0; x < d.width; ++x) {
                if (d.valid(x, y) &&
                    region.contains(project_to_scene(cams[i], pixel_center({x, y}), d.at(x, y)), cams[i].frame_index)) {
                    m.at(x, y) = 1;
                }
            }
        }
        masks.push_back(std::move(m));
    }
    return masks;
}

Renderer::Renderer(RenderJob job, const Dataset& dataset, RenderOptions options)
    : job_(std::move(job)), data_(dataset), options_(options) {
    job_.validate();
    data_.validate(true);
    if (uses_masks(job_.application) && data_.masks.empty() && !job_.region) {
        throw ConfigError(std::string(to_string(job_.application)) + " requires masks or a scene-space region");
    }

    cams_ = data_.cameras;
    depths_ = data_.depths;
    scale_ = data_.scale ? *data_.scale : normalize_scene(depths_, cams_, options_.normalize_stride);
    apply_scene_scale(scale_, depths_, cams_);

    if (uses_masks(job_.application)) {
        masks_ = !data_.masks.empty() ? data_.masks : region_to_masks(*job_.region, depths_, cams_);
    }
    if (job_.application == Application::deblur) {
        for (const Frame& f : data_.frames) {
            gradient_sums_.push_back(frame_gradient_sum(f));
        }
    }

    l_eff_ = job_.l;
    if (job_.application == Application::aperture) {
        // widen the frustum so that its inscribed L1 ball covers the aperture cone
        double z_lo = std::numeric_limits<double>::infinity();
        double z_hi = 0.0;
        for (const DepthMap& d : depths_) {
            for (float v : d.depth) {
                if (DepthMap::is_valid(v)) {
                    z_lo = std::min(z_lo, static_cast<double>(v));
                    z_hi = std::max(z_hi, static_cast<double>(v));
                }
            }
        }
        const ApertureSpec& ap = *job_.aperture;
        double focal = 0.0;
        for (const CameraPose& c : cams_) {
            focal = std::max({focal, c.fx, c.fy});
        }
        double widest = 0.0;
        for (double z : {z_lo, z_hi, std::clamp(ap.z0, z_lo, z_hi)}) {
            if (z > 0.0 && std::isfinite(z)) {
                widest = std::max(widest, ap.radius(z) * focal / z);
            }
        }
        const Frame& f0 = data_.frames.front();
        const double diagonal = std::hypot(f0.width, f0.height);
        l_eff_ = std::min(std::max(job_.l, 2.0 * std::numbers::sqrt2 * widest + 1.0), 2.0 * diagonal);
    }
}

Renderer::~Renderer() = default;

std::size_t Renderer::slot_of_frame(int frame_index) const {
    const auto it = std::lower_bound(data_.frames.begin(), data_.frames.end(), frame_index,
                                     [](const Frame& f, int v) { return f.frame_index < v; });
    return static_cast<std::size_t>(it - data_.frames.begin());
}

std::vector<std::size_t> Renderer::window_slots(std::size_t slot) const {
    const int f_out = data_.frames[slot].frame_index;
    const int radius = job_.window_radius.value_or(job_.default_window_radius());
    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i < data_.frames.size(); ++i) {
        const int f = data_.frames[i].frame_index;
        const long long df = std::llabs(static_cast<long long>(f) - f_out);
        if (df > radius) {
            continue;
        }
        if (uses_shutter(job_.application)) {
            const bool own_frame = job_.region && f == f_out;
            if (!own_frame && !shutter_open(*job_.shutter, f)) {
                continue;
            }
        }
        slots.push_back(i);
    }
    return slots;
}

const std::vector<ScenePoint>& Renderer::points(std::size_t slot) {
    auto it = points_.find(slot);
    if (it == points_.end()) {
        it = points_.emplace(slot, unproject_depth_map(cams_[slot], depths_[slot])).first;
    }
    return it->second;
}

Frame Renderer::render_frame(std::size_t slot, FrameStats* stats) {
    const auto start = std::chrono::steady_clock::now();
    const Frame& input = data_.frames.at(slot);
    const int f_out = input.frame_index;
    const Application app = job_.application;

    const std::vector<std::size_t> slots = window_slots(slot);
    std::erase_if(points_, [&](const auto& entry) {
        return std::find(slots.begin(), slots.end(), entry.first) == slots.end();
    });
    std::vector<FrameView> views;
    views.reserve(slots.size());
    for (std::size_t s : slots) {
        views.push_back(FrameView{&data_.frames[s], &depths_[s], &cams_[s], &points(s)});
    }
    const std::vector<ScenePoint>& out_points = points(slot);

    const int factor = app == Application::superres ? job_.superres_factor : 1;
    const CameraPose cam_out = factor == 1 ? cams_[slot] : cams_[slot].with_grid_scale(factor);
    const GatherContext ctx(cam_out, views, factor == 1);
    const ScenePoint cam_center = cam_out.center();

    SharpnessTable sharpness;
    if (app == Application::deblur) {
        std::map<int, double> raw;
        for (std::size_t s : slots) {
            raw[data_.frames[s].frame_index] = gradient_sums_[s];
        }
        sharpness = SharpnessTable(raw);
    }

    Sigmas color_only = job_.sigmas;
    color_only.xyz.reset();

    const int width = input.width * factor;
    const int height = input.height * factor;
    Frame out(width, height, f_out);
    std::vector<double> counts(out.data.size(), -1.0);
    std::vector<double> fractions(out.data.size(), -1.0);

    const int num_threads = options_.threads > 0 ? options_.threads : omp_get_max_threads();
#pragma omp parallel num_threads(num_threads)
    {
        SampleSet set;
        std::vector<double> weights;
        std::vector<std::uint8_t> masked;
        std::vector<int> orders;

        const auto area_of = [&](Sample& s) {
            const std::size_t src_slot = slot_of_frame(static_cast<int>(s.f));
            s.area = sample_area(s, cams_[src_slot], depths_[src_slot].at(s.src.x, s.src.y));
        };

#pragma omp for schedule(dynamic, 1)
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                const std::size_t idx = out.index(x, y);
                const FrustumSpec spec = FrustumSpec::at({x, y}, l_eff_);

                // reference observation at the output pixel
                Sample ref;
                bool ref_has_xyz = false;
                if (factor == 1) {
                    ref.rgb = input.at(x, y).cast<double>();
                } else {
                    ref.rgb = input.sample_bilinear(spec.px.x() / factor, spec.px.y() / factor).cast<double>();
                }
                ref.f = f_out;
                const PixelIndex in_px{x / factor, y / factor};
                if (depths_[slot].valid(in_px.x, in_px.y)) {
                    ref.xyz = out_points[depths_[slot].index(in_px.x, in_px.y)];
                    ref_has_xyz = true;
                }
                const Eigen::Vector3d fallback = ref.rgb;

                if (uses_masks(app) && masks_[slot].at(x, y) == 0) {
                    out.at(x, y) = input.at(x, y);
                    continue;
                }

                ctx.gather(spec, set);
                if (set.ref) {
                    ref = *set.ref;
                    ref_has_xyz = true;
                }
                const Sigmas& sig = ref_has_xyz ? job_.sigmas : color_only;
                const std::size_t n = set.samples.size();
                weights.assign(n, 0.0);

                FilterResult result;
                switch (app) {
                case Application::denoise:
                    for (std::size_t i = 0; i < n; ++i) {
                        weights[i] = w_denoise(set.samples[i], ref, sig);
                    }
                    result = filter_set(set.samples, weights, fallback);
                    break;
                case Application::deblur:
                    for (std::size_t i = 0; i < n; ++i) {
                        weights[i] = w_deblur(set.samples[i], ref, sig, sharpness);
                    }
                    result = filter_set(set.samples, weights, fallback);
                    break;
                case Application::superres:
                    for (std::size_t i = 0; i < n; ++i) {
                        area_of(set.samples[i]);
                        weights[i] = w_superres(set.samples[i], ref, sig);
                    }
                    result = filter_set(set.samples, weights, fallback);
                    break;
                case Application::inpaint:
                case Application::semitransparent: {
                    masked.resize(n);
                    for (std::size_t i = 0; i < n; ++i) {
                        const Sample& s = set.samples[i];
                        masked[i] = masks_[slot_of_frame(static_cast<int>(s.f))].at(s.src.x, s.src.y);
                    }
                    InpaintParams params;
                    params.sigmas = job_.sigmas;
                    params.iterations = job_.inpaint_iterations;
                    if (app == Application::semitransparent) {
                        params.input_color = input.at(x, y).cast<double>();
                        params.input_sigma_rgb = job_.semitransparent_sigma_rgb;
                    }
                    result = inpaint_filter(set.samples, masked, params);
                    break;
                }
                case Application::shutter:
                case Application::action: {
                    if (app == Application::action) {
                        orders = depth_orders(set.samples, cam_center);
                    }
                    const ShutterFunction own_frame = shutter::Box{static_cast<double>(f_out), static_cast<double>(f_out)};
                    for (std::size_t i = 0; i < n; ++i) {
                        const Sample& s = set.samples[i];
                        const bool outside = job_.region && !job_.region->contains(s.xyz, static_cast<int>(s.f));
                        const ShutterFunction& xi = outside ? own_frame : *job_.shutter;
                        weights[i] = app == Application::action ? w_action(s, xi, orders[i], *job_.sigmas.ord)
                                                                : w_shutter(s, xi);
                    }
                    result = filter_set(set.samples, weights, fallback);
                    break;
                }
                case Application::aperture: {
                    const ViewRay ray{cam_center, cam_out.ray_direction(spec.px)};
                    for (std::size_t i = 0; i < n; ++i) {
                        area_of(set.samples[i]);
                        weights[i] = w_aperture(set.samples[i], ray, *job_.aperture);
                    }
                    result = filter_set(set.samples, weights, fallback);
                    break;
                }
                }
                out.at(x, y) = result.rgb.cast<float>();
                counts[idx] = static_cast<double>(n);
                if (n > 0) {
                    fractions[idx] = result.weight_fraction;
                }
            }
        }
    }

    if (stats != nullptr) {
        double count_sum = 0.0;
        double fraction_sum = 0.0;
        std::size_t gathered = 0;
        std::size_t nonempty = 0;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            if (counts[i] >= 0.0) {
                count_sum += counts[i];
                ++gathered;
            }
            if (fractions[i] >= 0.0) {
                fraction_sum += fractions[i];
                ++nonempty;
            }
        }
        stats->frame_index = f_out;
        stats->samples_per_pixel = gathered > 0 ? count_sum / static_cast<double>(gathered) : 0.0;
        stats->weight_fraction = nonempty > 0 ? fraction_sum / static_cast<double>(nonempty) : 0.0;
        stats->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    return out;
}

RenderResult Renderer::render_video(const std::function<void(const FrameStats&)>& progress) {
    RenderResult result;
    for (std::size_t slot = 0; slot < data_.frames.size(); ++slot) {
        FrameStats stats;
        result.frames.push_back(render_frame(slot, &stats));
        result.stats.push_back(stats);
        if (progress) {
            progress(stats);
        }
    }
    return result;
}

Frame render_frame(std::size_t slot, const RenderJob& job, const Dataset& dataset, const RenderOptions& options) {
    Renderer renderer(job, dataset, options);
    return renderer.render_frame(slot);
}

RenderResult render_video(const RenderJob& job, const Dataset& dataset, const RenderOptions& options) {
    Renderer renderer(job, dataset, options);
    return renderer.render_video();
}

} // namespace scenespace
