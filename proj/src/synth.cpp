// Copyright Contributors to the scenespace project
// SPDX-License-Identifier: Apache-2.0

#include "scenespace/synth.hpp"

#include "scenespace/errors.hpp"

#include <Eigen/Geometry>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace scenespace::synth {

namespace {

std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double lattice(std::int64_t x, std::int64_t y, std::uint64_t seed) {
    const std::uint64_t h = mix(seed ^ mix(static_cast<std::uint64_t>(x) * 0x632BE59BD9B4E019ULL ^
                                           mix(static_cast<std::uint64_t>(y))));
    return static_cast<double>(h >> 11) / static_cast<double>(1ULL << 53) * 2.0 - 1.0;
}

/// Smooth value noise in [-1, 1].
double value_noise(double s, double t, std::uint64_t seed) {
    const double fs = std::floor(s);
    const double ft = std::floor(t);
    const auto x0 = static_cast<std::int64_t>(fs);
    const auto y0 = static_cast<std::int64_t>(ft);
    const auto smooth = [](double a) { return a * a * (3.0 - 2.0 * a); };
    const double a = smooth(s - fs);
    const double b = smooth(t - ft);
    const double top = lattice(x0, y0, seed) * (1 - a) + lattice(x0 + 1, y0, seed) * a;
    const double bottom = lattice(x0, y0 + 1, seed) * (1 - a) + lattice(x0 + 1, y0 + 1, seed) * a;
    return top * (1 - b) + bottom * b;
}

double fractal_noise(double s, double t, std::uint64_t seed) {
    double sum = 0.0;
    double amp = 0.5;
    double freq = 1.0;
    for (int octave = 0; octave < 3; ++octave) {
        sum += amp * value_noise(s * freq, t * freq, seed + static_cast<std::uint64_t>(octave));
        amp *= 0.5;
        freq *= 2.0;
    }
    return sum / 0.875;
}

struct Hit {
    double t = std::numeric_limits<double>::infinity();
    int box = -1;
    int axis = 0;
    Eigen::Vector3d normal = Eigen::Vector3d::Zero();
};

Hit intersect(const Scene& scene, int frame_offset, const Eigen::Vector3d& origin, const Eigen::Vector3d& dir) {
    Hit best;
    for (std::size_t i = 0; i < scene.boxes.size(); ++i) {
        const Box& box = scene.boxes[i];
        const Eigen::Vector3d lo = box.min + frame_offset * box.velocity;
        const Eigen::Vector3d hi = box.max + frame_offset * box.velocity;
        double t_near = -std::numeric_limits<double>::infinity();
        double t_far = std::numeric_limits<double>::infinity();
        int axis = -1;
        bool miss = false;
        for (int a = 0; a < 3; ++a) {
            if (dir[a] == 0.0) {
                if (origin[a] < lo[a] || origin[a] > hi[a]) {
                    miss = true;
                    break;
                }
                continue;
            }
            double t0 = (lo[a] - origin[a]) / dir[a];
            double t1 = (hi[a] - origin[a]) / dir[a];
            if (t0 > t1) {
                std::swap(t0, t1);
            }
            if (t0 > t_near) {
                t_near = t0;
                axis = a;
            }
            t_far = std::min(t_far, t1);
        }
        if (miss || axis < 0 || t_near > t_far || !(t_near > 1e-9) || t_near >= best.t) {
            continue;
        }
        best.t = t_near;
        best.box = static_cast<int>(i);
        best.axis = axis;
        best.normal = Eigen::Vector3d::Zero();
        best.normal[axis] = dir[axis] > 0.0 ? -1.0 : 1.0;
    }
    return best;
}

Eigen::Vector3d shade(const Scene& scene, int frame_offset, const Hit& hit, const Eigen::Vector3d& point) {
    const Box& box = scene.boxes[static_cast<std::size_t>(hit.box)];
    const Eigen::Vector3d local = point - (box.min + frame_offset * box.velocity);
    const int b = (hit.axis + 1) % 3;
    const int c = (hit.axis + 2) % 3;
    const double s = local[b];
    const double t = local[c];
    const std::uint64_t seed = mix(scene.seed * 131 + static_cast<std::uint64_t>(hit.box) * 7 +
                                   static_cast<std::uint64_t>(hit.axis));
    const double checker =
        (static_cast<std::int64_t>(std::floor(s / box.checker_period) + std::floor(t / box.checker_period)) & 1) != 0
            ? 1.0
            : -1.0;
    const double texture = 0.6 + box.checker_contrast * 0.5 * checker +
                           box.noise_amplitude * fractal_noise(s * box.noise_frequency, t * box.noise_frequency, seed);
    const Eigen::Vector3d light = -scene.light_dir.normalized();
    const double lambert = 0.4 + 0.6 * std::max(0.0, hit.normal.dot(light));
    return (255.0 * box.albedo * texture * lambert).cwiseMax(0.0).cwiseMin(255.0);
}

Eigen::Matrix3d look_rotation(const Eigen::Vector3d& forward) {
    const Eigen::Vector3d z = forward.normalized();
    const Eigen::Vector3d x = Eigen::Vector3d::UnitY().cross(z).normalized();
    const Eigen::Vector3d y = z.cross(x);
    Eigen::Matrix3d r;
    r.row(0) = x.transpose();
    r.row(1) = y.transpose();
    r.row(2) = z.transpose();
    return r;
}

std::mt19937_64 engine(std::uint64_t seed, std::uint64_t stream) { return std::mt19937_64(mix(seed) ^ mix(~stream)); }

} // namespace

CameraPose Scene::camera(int frame_offset) const {
    CameraPose cam;
    cam.fx = cam.fy = focal > 0.0 ? focal : 0.9 * width;
    cam.cx = 0.5 * width;
    cam.cy = 0.5 * height;
    cam.frame_index = first_frame + frame_offset;
    const Eigen::Vector3d position = trajectory.start + frame_offset * trajectory.step;
    const Eigen::Matrix3d r = trajectory.look_at ? look_rotation(*trajectory.look_at - position)
                                                 : Eigen::Matrix3d::Identity();
    cam.world_to_cam.setIdentity();
    cam.world_to_cam.topLeftCorner<3, 3>() = r;
    cam.world_to_cam.topRightCorner<3, 1>() = -r * position;
    return cam;
}

Dataset render_scene(const Scene& scene, int threads) {
    if (scene.width < 1 || scene.height < 1 || scene.frames < 1 || scene.supersample < 1) {
        throw ConfigError("synthetic scene needs positive size, frame count and supersampling");
    }
    Dataset ds;
    const int n = scene.supersample;
    const int num_threads = threads > 0 ? threads : omp_get_max_threads();
    for (int k = 0; k < scene.frames; ++k) {
        const CameraPose cam = scene.camera(k);
        const Eigen::Matrix3d rt = cam.rotation().transpose();
        const Eigen::Vector3d origin = cam.center();
        Image8 encoded(scene.width, scene.height);
        DepthMap depth(scene.width, scene.height);
#pragma omp parallel for schedule(dynamic, 1) num_threads(num_threads)
        for (int y = 0; y < scene.height; ++y) {
            for (int x = 0; x < scene.width; ++x) {
                Eigen::Vector3d color = Eigen::Vector3d::Zero();
                for (int j = 0; j < n; ++j) {
                    for (int i = 0; i < n; ++i) {
                        const double u = x + (i + 0.5) / n;
                        const double v = y + (j + 0.5) / n;
                        const Eigen::Vector3d dir = rt * Eigen::Vector3d((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
                        const Hit hit = intersect(scene, k, origin, dir);
                        if (hit.box >= 0) {
                            color += shade(scene, k, hit, origin + hit.t * dir);
                        }
                    }
                }
                color /= static_cast<double>(n * n);
                for (int c = 0; c < 3; ++c) {
                    encoded.at(x, y)[c] = quantize(delinearize(color[c]));
                }
                // camera-space direction has unit z, so the ray parameter is the z-depth
                const Eigen::Vector2d center = pixel_center({x, y});
                const Eigen::Vector3d dir =
                    rt * Eigen::Vector3d((center.x() - cam.cx) / cam.fx, (center.y() - cam.cy) / cam.fy, 1.0);
                const Hit hit = intersect(scene, k, origin, dir);
                if (hit.box >= 0) {
                    depth.at(x, y) = static_cast<float>(hit.t);
                }
            }
        }
        ds.frames.push_back(linearize(encoded, cam.frame_index));
        ds.depths.push_back(std::move(depth));
        ds.cameras.push_back(cam);
    }
    return ds;
}

std::vector<Mask> render_box_mask(const Scene& scene, std::size_t box_index) {
    std::vector<Mask> masks;
    for (int k = 0; k < scene.frames; ++k) {
        const CameraPose cam = scene.camera(k);
        const Eigen::Matrix3d rt = cam.rotation().transpose();
        Mask m(scene.width, scene.height, 0);
        for (int y = 0; y < scene.height; ++y) {
            for (int x = 0; x < scene.width; ++x) {
                const Eigen::Vector2d c = pixel_center({x, y});
                const Eigen::Vector3d dir = rt * Eigen::Vector3d((c.x() - cam.cx) / cam.fx, (c.y() - cam.cy) / cam.fy, 1.0);
                const Hit hit = intersect(scene, k, cam.center(), dir);
                m.at(x, y) = hit.box == static_cast<int>(box_index) ? 1 : 0;
            }
        }
        masks.push_back(std::move(m));
    }
    return masks;
}

Scene preset(const std::string& name, int width, int height, int frames, std::uint64_t seed) {
    Scene scene;
    scene.width = width;
    scene.height = height;
    scene.frames = frames;
    scene.seed = seed;

    Box wall;
    wall.min = {-40.0, -30.0, 12.0};
    wall.max = {40.0, 30.0, 12.5};
    wall.albedo = {0.75, 0.7, 0.6};
    wall.checker_period = 1.5;
    wall.noise_frequency = 1.2;

    if (name == "plane") {
        wall.min.z() = 6.0;
        wall.max.z() = 6.5;
        wall.checker_period = 0.4;
        wall.noise_frequency = 3.0;
        wall.noise_amplitude = 0.3;
        scene.boxes = {wall};
        scene.trajectory.step = {0.05, 0.0, 0.0};
    } else if (name == "occlusion") {
        wall.min.z() = 10.0;
        wall.max.z() = 10.5;
        Box pillar;
        pillar.min = {-0.3, -30.0, 4.0};
        pillar.max = {0.3, 30.0, 4.6};
        pillar.albedo = {0.85, 0.2, 0.15};
        pillar.checker_period = 0.5;
        pillar.noise_frequency = 2.0;
        scene.boxes = {wall, pillar};
        scene.trajectory.start = {-0.025 * frames, 0.0, 0.0};
        scene.trajectory.step = {0.05, 0.0, 0.0};
    } else if (name == "static" || name == "moving") {
        Box a;
        a.min = {-2.2, -0.5, 6.0};
        a.max = {-0.6, 1.6, 7.0};
        a.albedo = {0.8, 0.35, 0.3};
        a.checker_period = 0.6;
        Box b;
        b.min = {0.5, -1.8, 8.0};
        b.max = {2.5, 0.2, 9.0};
        b.albedo = {0.3, 0.55, 0.8};
        b.checker_period = 0.8;
        Box c;
        c.min = {-0.3, 0.4, 4.5};
        c.max = {0.9, 1.3, 5.3};
        c.albedo = {0.4, 0.75, 0.35};
        c.checker_period = 0.5;
        scene.boxes = {wall, a, b, c};
        if (name == "moving") {
            Box mover;
            mover.min = {-3.0, -1.0, 3.5};
            mover.max = {-2.4, -0.4, 4.1};
            mover.velocity = {0.06, 0.0, 0.0};
            mover.albedo = {0.9, 0.85, 0.2};
            scene.boxes.push_back(mover);
        }
        scene.trajectory.start = {-0.02 * frames, -0.005 * frames, 0.0};
        scene.trajectory.step = {0.04, 0.01, 0.0};
    } else {
        throw ConfigError("unknown synthetic scene '" + name + "'");
    }
    return scene;
}

Dataset add_noise(const Dataset& clean, double sigma, std::uint64_t seed) {
    Dataset noisy = clean;
    if (sigma == 0.0) {
        return noisy;
    }
    for (Frame& frame : noisy.frames) {
        std::mt19937_64 rng = engine(seed, static_cast<std::uint64_t>(frame.frame_index));
        std::normal_distribution<double> noise(0.0, sigma);
        Image8 encoded = delinearize(frame);
        for (std::size_t i = 0; i < frame.data.size(); ++i) {
            const double n = noise(rng);
            for (int c = 0; c < 3; ++c) {
                encoded.data[i * 3 + c] = quantize(encoded.data[i * 3 + c] + n);
            }
        }
        frame = linearize(encoded, frame.frame_index);
    }
    return noisy;
}

void corrupt_depth(std::span<DepthMap> depths, double fraction, double d_min, double d_max, std::uint64_t seed) {
    for (std::size_t i = 0; i < depths.size(); ++i) {
        std::mt19937_64 rng = engine(seed, i);
        std::bernoulli_distribution pick(fraction);
        std::bernoulli_distribution near(0.5);
        for (float& d : depths[i].depth) {
            if (DepthMap::is_valid(d) && pick(rng)) {
                d = static_cast<float>(near(rng) ? d_min : d_max);
            }
        }
    }
}

namespace {

double psnr_from_mse(double sum_sq, double count) {
    if (count == 0.0) {
        throw DataError("psnr: no pixels to compare");
    }
    const double mse = sum_sq / count;
    return mse == 0.0 ? 99.0 : 10.0 * std::log10(255.0 * 255.0 / mse);
}

} // namespace

double psnr(std::span<const Image8> a, std::span<const Image8> b) {
    if (a.size() != b.size()) {
        throw DataError("psnr: sequence lengths differ");
    }
    double sum = 0.0;
    double count = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].width != b[i].width || a[i].height != b[i].height) {
            throw DataError("psnr: image " + std::to_string(i) + " sizes differ");
        }
        for (std::size_t k = 0; k < a[i].data.size(); ++k) {
            const double d = static_cast<double>(a[i].data[k]) - static_cast<double>(b[i].data[k]);
            sum += d * d;
        }
        count += static_cast<double>(a[i].data.size());
    }
    return psnr_from_mse(sum, count);
}

double psnr(std::span<const Frame> a, std::span<const Frame> b) {
    std::vector<Image8> ea;
    std::vector<Image8> eb;
    for (const Frame& f : a) {
        ea.push_back(delinearize(f));
    }
    for (const Frame& f : b) {
        eb.push_back(delinearize(f));
    }
    return psnr(ea, eb);
}

double psnr(std::span<const Frame> a, std::span<const Frame> b, std::span<const Mask> masks) {
    if (a.size() != b.size() || a.size() != masks.size()) {
        throw DataError("psnr: sequence lengths differ");
    }
    double sum = 0.0;
    double count = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Image8 ea = delinearize(a[i]);
        const Image8 eb = delinearize(b[i]);
        for (std::size_t p = 0; p < masks[i].data.size(); ++p) {
            if (masks[i].data[p] == 0) {
                continue;
            }
            for (int c = 0; c < 3; ++c) {
                const double d = static_cast<double>(ea.data[p * 3 + c]) - static_cast<double>(eb.data[p * 3 + c]);
                sum += d * d;
            }
            count += 3.0;
        }
    }
    return psnr_from_mse(sum, count);
}

} // namespace scenespace::synth
