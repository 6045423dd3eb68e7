// Copyright Contributors to the scenespace project
// SPDX-License-Identifier: Apache-2.0

#include "scenespace/cli.hpp"

#include "scenespace/depth_estimation.hpp"
#include "scenespace/errors.hpp"
#include "scenespace/io.hpp"
#include "scenespace/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace scenespace::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<double> parse_numbers(std::string_view text, char sep, const std::string& what) {
    std::vector<double> values;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find(sep, pos), text.size());
        const std::string item(text.substr(pos, end - pos));
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (item.empty() || used != item.size() || !std::isfinite(v)) {
            throw ConfigError(what + ": '" + item + "' is not a number");
        }
        values.push_back(v);
        pos = end + 1;
    }
    return values;
}

std::optional<double> sigma_field(const json& value, const std::string& key) {
    if (value.is_null()) {
        return std::nullopt;
    }
    if (!value.is_number()) {
        throw ConfigError("config: sigmas." + key + " must be a number or null");
    }
    return value.get<double>();
}

template <typename T>
T typed(const json& value, const std::string& key) {
    try {
        return value.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: '" + key + "' has the wrong type");
    }
}

Eigen::Vector3d vec3(const json& value, const std::string& key) {
    const auto v = typed<std::vector<double>>(value, key);
    if (v.size() != 3) {
        throw ConfigError("config: '" + key + "' needs 3 numbers");
    }
    return {v[0], v[1], v[2]};
}

ShutterFunction shutter_from_json(const json& j) {
    if (!j.is_object() || !j.contains("type")) {
        throw ConfigError("config: shutter needs a 'type'");
    }
    const auto type = typed<std::string>(j["type"], "shutter.type");
    const auto allowed = [&](std::initializer_list<const char*> keys) {
        for (const auto& [key, _] : j.items()) {
            if (key != "type" && std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
                throw ConfigError("config: unknown shutter key '" + key + "'");
            }
        }
    };
    if (type == "box") {
        allowed({"t0", "t1"});
        return shutter::Box{typed<double>(j.at("t0"), "shutter.t0"), typed<double>(j.at("t1"), "shutter.t1")};
    }
    if (type == "impulse") {
        allowed({"instants", "half_width"});
        shutter::ImpulseTrain xi;
        xi.instants = typed<std::vector<double>>(j.at("instants"), "shutter.instants");
        if (j.contains("half_width")) {
            xi.half_width = typed<double>(j["half_width"], "shutter.half_width");
        }
        return xi;
    }
    if (type == "decay") {
        allowed({"t_peak", "tau"});
        return shutter::DecayTail{typed<double>(j.at("t_peak"), "shutter.t_peak"), typed<double>(j.at("tau"), "shutter.tau")};
    }
    throw ConfigError("config: unknown shutter type '" + type + "'");
}

RenderJob parse_job(std::string_view text, RenderJob job, std::optional<std::string>* mask_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("config: expected a JSON object");
    }
    try {
        for (const auto& [key, value] : doc.items()) {
            if (key == "application") {
                const Application app = parse_application(typed<std::string>(value, key));
                const bool inpaint_pair =
                    (app == Application::inpaint || app == Application::semitransparent) &&
                    (job.application == Application::inpaint || job.application == Application::semitransparent);
                if (app != job.application && !inpaint_pair) {
                    throw ConfigError("config: application '" + std::string(to_string(app)) +
                                      "' does not match subcommand '" + std::string(to_string(job.application)) + "'");
                }
                job.application = app;
            } else if (key == "window_radius") {
                job.window_radius = value.is_null() ? std::nullopt : std::optional<int>(typed<int>(value, key));
            } else if (key == "l") {
                job.l = typed<double>(value, key);
            } else if (key == "sigmas") {
                if (!value.is_object()) {
                    throw ConfigError("config: sigmas must be an object");
                }
                for (const auto& [name, s] : value.items()) {
                    if (name == "rgb") {
                        job.sigmas.rgb = sigma_field(s, name);
                    } else if (name == "xyz") {
                        job.sigmas.xyz = sigma_field(s, name);
                    } else if (name == "f") {
                        job.sigmas.f = sigma_field(s, name);
                    } else if (name == "area") {
                        job.sigmas.area = sigma_field(s, name);
                    } else if (name == "ord") {
                        job.sigmas.ord = sigma_field(s, name);
                    } else {
                        throw ConfigError("config: unknown sigma '" + name + "'");
                    }
                }
            } else if (key == "shutter") {
                job.shutter = shutter_from_json(value);
            } else if (key == "aperture") {
                ApertureSpec ap;
                for (const auto& [name, v] : value.items()) {
                    if (name == "a0") {
                        ap.a0 = typed<double>(v, "aperture.a0");
                    } else if (name == "z0") {
                        ap.z0 = typed<double>(v, "aperture.z0");
                    } else if (name == "slope") {
                        ap.slope = typed<double>(v, "aperture.slope");
                    } else {
                        throw ConfigError("config: unknown aperture key '" + name + "'");
                    }
                }
                job.aperture = ap;
            } else if (key == "region") {
                Region3D r;
                for (const auto& [name, v] : value.items()) {
                    if (name == "min") {
                        r.min = vec3(v, "region.min");
                    } else if (name == "max") {
                        r.max = vec3(v, "region.max");
                    } else if (name == "frame_begin") {
                        r.frame_begin = typed<int>(v, "region.frame_begin");
                    } else if (name == "frame_end") {
                        r.frame_end = typed<int>(v, "region.frame_end");
                    } else {
                        throw ConfigError("config: unknown region key '" + name + "'");
                    }
                }
                job.region = r;
            } else if (key == "mask_dir") {
                if (mask_dir == nullptr) {
                    throw ConfigError("config: 'mask_dir' is not accepted here");
                }
                *mask_dir = typed<std::string>(value, key);
            } else if (key == "superres_factor") {
                job.superres_factor = typed<int>(value, key);
            } else if (key == "semitransparent_sigma_rgb") {
                job.semitransparent_sigma_rgb = typed<double>(value, key);
            } else if (key == "inpaint_iterations") {
                job.inpaint_iterations = typed<int>(value, key);
            } else {
                throw ConfigError("config: unknown key '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return job;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read config file " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
}

struct RenderArgs {
    std::string input;
    std::string output;
    std::string config;
    int threads = 0;
    std::optional<int> window;
    std::optional<double> l;
    std::optional<double> sigma_rgb;
    std::optional<double> sigma_xyz;
    std::optional<double> sigma_f;
    std::optional<double> sigma_area;
    std::optional<double> sigma_ord;
    std::optional<std::string> masks;
    std::optional<std::string> region;
    std::optional<std::string> shutter;
    std::optional<int> factor;
    bool semi = false;
    std::optional<double> semi_sigma;
    std::optional<int> iterations;
    std::optional<double> a0;
    std::optional<double> z0;
    std::optional<double> slope;
};

CLI::App* add_render_command(CLI::App& app, Application which, RenderArgs& a) {
    const std::string name(to_string(which));
    CLI::App* sub = app.add_subcommand(name, "Render the " + name + " application over a dataset");
    sub->add_option("--input", a.input, "Dataset root directory")->required();
    sub->add_option("--output", a.output, "Directory for output frames and stats.json")->required();
    sub->add_option("--config", a.config, "JSON job file");
    sub->add_option("--threads", a.threads, "Worker threads (0 = all)")->check(CLI::NonNegativeNumber);
    sub->add_option("--window", a.window, "Temporal window radius in frames");
    sub->add_option("--l", a.l, "Frustum side length in output pixels");
    sub->add_option("--sigma-rgb", a.sigma_rgb, "Color deviation (8-bit units)");
    sub->add_option("--sigma-xyz", a.sigma_xyz, "Scene-space deviation");
    sub->add_option("--sigma-f", a.sigma_f, "Frame-time deviation");
    switch (which) {
    case Application::superres:
        sub->add_option("--sigma-area", a.sigma_area, "Sample area deviation");
        sub->add_option("--factor", a.factor, "Upscale factor per side");
        break;
    case Application::inpaint:
        sub->add_option("--masks", a.masks, "Mask directory (overrides dataset masks)");
        sub->add_option("--region", a.region, "Scene-space box X0,Y0,Z0,X1,Y1,Z1[:F0,F1]");
        sub->add_flag("--semi-transparent", a.semi, "Blend with the input color (semi-transparency)");
        sub->add_option("--semi-sigma", a.semi_sigma, "Color deviation of the input-pixel term");
        sub->add_option("--iterations", a.iterations, "Mean-shift iterations");
        break;
    case Application::action:
        sub->add_option("--sigma-ord", a.sigma_ord, "Depth-order deviation");
        [[fallthrough]];
    case Application::shutter:
        sub->add_option("--shutter", a.shutter, "box:T0,T1 | impulse:T1;T2;...[@HW] | decay:TPEAK,TAU");
        sub->add_option("--region", a.region, "Restrict the shutter to a scene-space box X0,Y0,Z0,X1,Y1,Z1[:F0,F1]");
        break;
    case Application::aperture:
        sub->add_option("--a0", a.a0, "Aperture radius at the focal depth");
        sub->add_option("--z0", a.z0, "Focal depth");
        sub->add_option("--slope", a.slope, "Aperture growth per unit depth");
        break;
    default:
        break;
    }
    return sub;
}

json stats_json(const RenderResult& result) {
    json per_frame = json::array();
    double seconds = 0.0;
    double spp = 0.0;
    double wf = 0.0;
    for (const FrameStats& s : result.stats) {
        per_frame.push_back({{"frame", s.frame_index},
                             {"seconds", s.seconds},
                             {"samples_per_pixel", s.samples_per_pixel},
                             {"weight_fraction", s.weight_fraction}});
        seconds += s.seconds;
        spp += s.samples_per_pixel;
        wf += s.weight_fraction;
    }
    const double n = std::max<double>(1.0, static_cast<double>(result.stats.size()));
    return {{"frames", result.frames.size()},
            {"sec_per_frame", seconds / n},
            {"samples_per_pixel", spp / n},
            {"weight_fraction", wf / n},
            {"per_frame", per_frame}};
}

int run_render(Application which, const RenderArgs& a, std::ostream& out, std::ostream& err) {
    Application app = which;
    if (which == Application::inpaint && a.semi) {
        app = Application::semitransparent;
    }
    RenderJob job = RenderJob::defaults(app);
    std::optional<std::string> mask_dir;
    if (!a.config.empty()) {
        job = parse_job(read_text(a.config), job, &mask_dir);
        if (a.semi) {
            job.application = Application::semitransparent;
        }
    }
    if (a.window) {
        job.window_radius = *a.window;
    }
    if (a.l) {
        job.l = *a.l;
    }
    for (const auto& [flag, slot] : {std::pair{&a.sigma_rgb, &job.sigmas.rgb}, std::pair{&a.sigma_xyz, &job.sigmas.xyz},
                                     std::pair{&a.sigma_f, &job.sigmas.f}, std::pair{&a.sigma_area, &job.sigmas.area},
                                     std::pair{&a.sigma_ord, &job.sigmas.ord}}) {
        if (*flag) {
            *slot = **flag;
        }
    }
    if (a.masks) {
        mask_dir = *a.masks;
    }
    if (a.region) {
        job.region = parse_region(*a.region);
    }
    if (a.shutter) {
        job.shutter = parse_shutter(*a.shutter);
    }
    if (a.factor) {
        job.superres_factor = *a.factor;
    }
    if (a.semi_sigma) {
        job.semitransparent_sigma_rgb = *a.semi_sigma;
    }
    if (a.iterations) {
        job.inpaint_iterations = *a.iterations;
    }
    if (a.a0 || a.z0 || a.slope) {
        ApertureSpec ap = job.aperture.value_or(ApertureSpec{});
        ap.a0 = a.a0.value_or(ap.a0);
        ap.z0 = a.z0.value_or(ap.z0);
        ap.slope = a.slope.value_or(ap.slope);
        job.aperture = ap;
    }
    job.validate();

    std::optional<fs::path> masks_path;
    if (mask_dir) {
        masks_path = fs::path(*mask_dir);
    }
    const Dataset ds = io::load_dataset(a.input, true, masks_path);
    Renderer renderer(job, ds, RenderOptions{a.threads, 4});
    const RenderResult result = renderer.render_video([&](const FrameStats& s) {
        err << to_string(job.application) << ": frame " << s.frame_index << " " << std::fixed << std::setprecision(2)
            << s.seconds << " s, " << std::setprecision(1) << s.samples_per_pixel << " samples/pixel\n";
    });
    fs::create_directories(a.output);
    io::write_png_sequence(a.output, result.frames);
    write_json(fs::path(a.output) / "stats.json", stats_json(result));
    out << "wrote " << result.frames.size() << " frames to " << a.output << '\n';
    return kExitOk;
}

struct SynthArgs {
    std::string output;
    std::string scene = "static";
    int width = 320;
    int height = 180;
    int frames = 60;
    std::uint64_t seed = 1;
    double noise = 0.0;
    int supersample = 1;
    bool no_depth = false;
    std::optional<std::string> clean;
    std::optional<std::size_t> mask_box;
    int threads = 0;
};

int run_synth(const SynthArgs& a, std::ostream& out) {
    const synth::Scene scene = synth::preset(a.scene, a.width, a.height, a.frames, a.seed);
    synth::Scene sampled = scene;
    sampled.supersample = a.supersample;
    Dataset ds = synth::render_scene(sampled, a.threads);
    if (a.clean) {
        io::write_png_sequence(*a.clean, ds.frames);
    }
    if (a.noise > 0.0) {
        ds = synth::add_noise(ds, a.noise, a.seed);
    }
    if (a.mask_box) {
        if (*a.mask_box >= scene.boxes.size()) {
            throw ConfigError("--mask-box: scene has " + std::to_string(scene.boxes.size()) + " boxes");
        }
        ds.masks = synth::render_box_mask(scene, *a.mask_box);
    }
    if (a.no_depth) {
        ds.depths.clear();
    }
    io::write_dataset(a.output, ds);
    out << "wrote " << ds.size() << " frames to " << a.output << '\n';
    return kExitOk;
}

struct DepthArgs {
    std::string input;
    std::string output;
    int threads = 0;
    int window = 3;
    int hypotheses = 64;
    std::optional<double> d_min;
    std::optional<double> d_max;
};

int run_depth(const DepthArgs& a, std::ostream& out, std::ostream& err) {
    const Dataset ds = io::load_dataset(a.input, false);
    SweepConfig cfg;
    cfg.window_radius = a.window;
    cfg.num_hypotheses = a.hypotheses;
    if (!a.d_min || !a.d_max) {
        const auto [lo, hi] = default_depth_range(ds.cameras);
        cfg.d_min = a.d_min.value_or(lo);
        cfg.d_max = a.d_max.value_or(hi);
    } else {
        cfg.d_min = *a.d_min;
        cfg.d_max = *a.d_max;
    }
    cfg.validate();
    const fs::path dir = a.output.empty() ? fs::path(a.input) / "depth" : fs::path(a.output);
    fs::create_directories(dir);
    for (const Frame& f : ds.frames) {
        const DepthMap d = estimate_depth(f.frame_index, ds.frames, ds.cameras, cfg, a.threads);
        io::write_pfm(dir / io::frame_filename(f.frame_index, ".pfm"), d);
        err << "depth: frame " << f.frame_index << '\n';
    }
    out << "wrote " << ds.size() << " depth maps to " << dir.string() << '\n';
    return kExitOk;
}

fs::path frames_dir(const fs::path& p) { return fs::is_directory(p / "frames") ? p / "frames" : p; }

struct PsnrArgs {
    std::string input;
    std::string reference;
    std::optional<std::string> masks;
};

int run_psnr(const PsnrArgs& a, std::ostream& out) {
    const std::vector<Image8> test = io::read_png_sequence(frames_dir(a.input));
    const std::vector<Image8> ref = io::read_png_sequence(frames_dir(a.reference));
    if (test.empty() || test.size() != ref.size()) {
        throw DataError("psnr: sequences hold " + std::to_string(test.size()) + " and " + std::to_string(ref.size()) +
                        " frames");
    }
    double db = 0.0;
    if (a.masks) {
        std::vector<Frame> ft;
        std::vector<Frame> fr;
        std::vector<Mask> masks;
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(*a.masks)) {
            if (entry.path().extension() == ".png") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        if (files.size() != test.size()) {
            throw DataError("psnr: expected " + std::to_string(test.size()) + " masks, found " +
                            std::to_string(files.size()));
        }
        for (std::size_t i = 0; i < test.size(); ++i) {
            ft.push_back(linearize(test[i]));
            fr.push_back(linearize(ref[i]));
            masks.push_back(io::read_mask(files[i]));
        }
        db = synth::psnr(ft, fr, masks);
    } else {
        db = synth::psnr(test, ref);
    }
    out << "psnr_db " << std::fixed << std::setprecision(4) << db << '\n';
    return kExitOk;
}

struct OracleArgs {
    std::string input;
    std::vector<double> ls{1.0, 3.0, 5.0};
    int window = 2;
    int threads = 0;
};

bool same_sample(const Sample& x, const Sample& y) {
    return x.f == y.f && x.src == y.src && x.rgb == y.rgb && x.xyz == y.xyz;
}

bool same_set(const SampleSet& a, const SampleSet& b) {
    if (a.samples.size() != b.samples.size() || a.ref.has_value() != b.ref.has_value()) {
        return false;
    }
    if (a.ref && !same_sample(*a.ref, *b.ref)) {
        return false;
    }
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        if (!same_sample(a.samples[i], b.samples[i])) {
            return false;
        }
    }
    return true;
}

int run_oracle(const OracleArgs& a, std::ostream& out) {
    const Dataset ds = io::load_dataset(a.input, true);
    RenderJob job = RenderJob::defaults(Application::denoise);
    job.window_radius = a.window;
    Renderer renderer(job, ds);
    std::size_t queries = 0;
    std::size_t mismatches = 0;
    for (std::size_t slot = 0; slot < ds.size(); ++slot) {
        std::vector<FrameView> views;
        for (std::size_t s : renderer.window_slots(slot)) {
            views.push_back(FrameView{&ds.frames[s], &renderer.depths()[s], &renderer.cameras()[s], nullptr});
        }
        const CameraPose& cam = renderer.cameras()[slot];
        const GatherContext ctx(cam, views);
        const Frame& f = ds.frames[slot];
        for (double l : a.ls) {
            std::vector<std::uint8_t> bad(static_cast<std::size_t>(f.width) * f.height, 0);
            const int num_threads = a.threads > 0 ? a.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(num_threads)
            for (int y = 0; y < f.height; ++y) {
                for (int x = 0; x < f.width; ++x) {
                    const FrustumSpec spec = FrustumSpec::at({x, y}, l);
                    bad[f.index(x, y)] = same_set(ctx.gather(spec), gather_bruteforce(cam, spec, views)) ? 0 : 1;
                }
            }
            queries += bad.size();
            mismatches += static_cast<std::size_t>(std::count(bad.begin(), bad.end(), 1));
        }
    }
    const bool pass = mismatches == 0;
    out << "oracle-check: " << queries << " pixel queries, " << mismatches << " discrepancies: "
        << (pass ? "PASS" : "FAIL") << '\n';
    return pass ? kExitOk : kExitCheckFailed;
}

ShutterFunction parse_shutter_text(std::string_view text) {
    const std::size_t colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw ConfigError("--shutter: expected KIND:PARAMS");
    }
    const std::string_view kind = text.substr(0, colon);
    std::string_view params = text.substr(colon + 1);
    if (kind == "box") {
        const auto v = parse_numbers(params, ',', "--shutter");
        if (v.size() != 2) {
            throw ConfigError("--shutter box needs T0,T1");
        }
        return shutter::Box{v[0], v[1]};
    }
    if (kind == "impulse") {
        shutter::ImpulseTrain xi;
        const std::size_t at = params.find('@');
        if (at != std::string_view::npos) {
            const auto hw = parse_numbers(params.substr(at + 1), ',', "--shutter");
            if (hw.size() != 1) {
                throw ConfigError("--shutter impulse: one half width after '@'");
            }
            xi.half_width = hw[0];
            params = params.substr(0, at);
        }
        xi.instants = parse_numbers(params, ';', "--shutter");
        return xi;
    }
    if (kind == "decay") {
        const auto v = parse_numbers(params, ',', "--shutter");
        if (v.size() != 2) {
            throw ConfigError("--shutter decay needs TPEAK,TAU");
        }
        return shutter::DecayTail{v[0], v[1]};
    }
    throw ConfigError("--shutter: unknown kind '" + std::string(kind) + "'");
}

} // namespace

ShutterFunction parse_shutter(std::string_view text) {
    const ShutterFunction xi = parse_shutter_text(text);
    validate(xi);
    return xi;
}

Region3D parse_region(std::string_view text) {
    const std::size_t colon = text.find(':');
    const auto box = parse_numbers(text.substr(0, colon), ',', "--region");
    if (box.size() != 6) {
        throw ConfigError("--region needs X0,Y0,Z0,X1,Y1,Z1");
    }
    Region3D r;
    r.min = {box[0], box[1], box[2]};
    r.max = {box[3], box[4], box[5]};
    if (colon != std::string_view::npos) {
        const auto frames = parse_numbers(text.substr(colon + 1), ',', "--region");
        if (frames.size() != 2) {
            throw ConfigError("--region frame interval needs F0,F1");
        }
        r.frame_begin = static_cast<int>(frames[0]);
        r.frame_end = static_cast<int>(frames[1]);
    }
    r.validate();
    return r;
}

RenderJob job_from_json(std::string_view text, RenderJob base) { return parse_job(text, std::move(base), nullptr); }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Scene-space video processing"};
    app.name("scenespace");
    app.require_subcommand(1);

    SynthArgs synth_args;
    CLI::App* synth_cmd = app.add_subcommand("synth", "Render a synthetic dataset with exact depth and poses");
    synth_cmd->add_option("--output", synth_args.output, "Dataset root to write")->required();
    synth_cmd->add_option("--scene", synth_args.scene, "static | plane | occlusion | moving");
    synth_cmd->add_option("--width", synth_args.width)->check(CLI::PositiveNumber);
    synth_cmd->add_option("--height", synth_args.height)->check(CLI::PositiveNumber);
    synth_cmd->add_option("--frames", synth_args.frames)->check(CLI::PositiveNumber);
    synth_cmd->add_option("--seed", synth_args.seed);
    synth_cmd->add_option("--noise", synth_args.noise, "Gaussian noise sigma in 8-bit units")
        ->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--supersample", synth_args.supersample, "Rays per pixel side")->check(CLI::PositiveNumber);
    synth_cmd->add_flag("--no-depth", synth_args.no_depth, "Omit depth maps");
    synth_cmd->add_option("--clean", synth_args.clean, "Also write noise-free frames to this directory");
    synth_cmd->add_option("--mask-box", synth_args.mask_box, "Write masks covering this box index");
    synth_cmd->add_option("--threads", synth_args.threads)->check(CLI::NonNegativeNumber);

    DepthArgs depth_args;
    CLI::App* depth_cmd = app.add_subcommand("depth", "Estimate per-frame depth by plane sweep");
    depth_cmd->add_option("--input", depth_args.input, "Dataset root")->required();
    depth_cmd->add_option("--output", depth_args.output, "Directory for PFM files (default: INPUT/depth)");
    depth_cmd->add_option("--threads", depth_args.threads)->check(CLI::NonNegativeNumber);
    depth_cmd->add_option("--window", depth_args.window, "Neighbor frames on each side")->check(CLI::PositiveNumber);
    depth_cmd->add_option("--hypotheses", depth_args.hypotheses)->check(CLI::Range(2, 4096));
    depth_cmd->add_option("--d-min", depth_args.d_min);
    depth_cmd->add_option("--d-max", depth_args.d_max);

    constexpr std::array kRenderApps{Application::denoise, Application::deblur,  Application::superres,
                                     Application::inpaint, Application::shutter, Application::action,
                                     Application::aperture};
    std::array<RenderArgs, kRenderApps.size()> render_args;
    std::array<CLI::App*, kRenderApps.size()> render_cmds{};
    for (std::size_t i = 0; i < kRenderApps.size(); ++i) {
        render_cmds[i] = add_render_command(app, kRenderApps[i], render_args[i]);
    }

    PsnrArgs psnr_args;
    CLI::App* psnr_cmd = app.add_subcommand("psnr", "PSNR between two PNG sequences");
    psnr_cmd->add_option("--input", psnr_args.input, "Test sequence directory or dataset root")->required();
    psnr_cmd->add_option("--reference", psnr_args.reference, "Reference sequence directory or dataset root")
        ->required();
    psnr_cmd->add_option("--masks", psnr_args.masks, "Only compare pixels inside these masks");

    OracleArgs oracle_args;
    CLI::App* oracle_cmd = app.add_subcommand("oracle-check", "Compare gathering against the brute-force oracle");
    oracle_cmd->add_option("--input", oracle_args.input, "Dataset root")->required();
    oracle_cmd->add_option("--l", oracle_args.ls, "Frustum sizes")->delimiter(',');
    oracle_cmd->add_option("--window", oracle_args.window)->check(CLI::NonNegativeNumber);
    oracle_cmd->add_option("--threads", oracle_args.threads)->check(CLI::NonNegativeNumber);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfigError;
    }

    try {
        if (synth_cmd->parsed()) {
            return run_synth(synth_args, out);
        }
        if (depth_cmd->parsed()) {
            return run_depth(depth_args, out, err);
        }
        if (psnr_cmd->parsed()) {
            return run_psnr(psnr_args, out);
        }
        if (oracle_cmd->parsed()) {
            return run_oracle(oracle_args, out);
        }
        for (std::size_t i = 0; i < kRenderApps.size(); ++i) {
            if (render_cmds[i]->parsed()) {
                return run_render(kRenderApps[i], render_args[i], out, err);
            }
        }
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kExitDataError;
    } catch (const DomainError& e) {
        err << "data error: " << e.what() << '\n';
        return kExitDataError;
    } catch (const fs::filesystem_error& e) {
        err << "data error: " << e.what() << '\n';
        return kExitDataError;
    }
    err << "error: no subcommand\n";
    return kExitConfigError;
}

} // namespace scenespace::cli
