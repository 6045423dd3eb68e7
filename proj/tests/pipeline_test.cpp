// Copyright Contributors to the scenespace project
// SPDX-License-Identifier: Apache-2.0

#include "scenespace/errors.hpp"
#include "scenespace/pipeline.hpp"
#include "scenespace/synth.hpp"

#include "testing.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace scenespace {
namespace {

Dataset scene_dataset(const std::string& name, int w, int h, int frames, std::uint64_t seed = 1) {
    return synth::render_scene(synth::preset(name, w, h, frames, seed), 1);
}

std::vector<FrameView> views_of(const std::vector<Frame>& frames, const std::vector<DepthMap>& depths,
                                const std::vector<CameraPose>& cams, std::span<const std::size_t> slots) {
    std::vector<FrameView> v;
    for (std::size_t s : slots) {
        v.push_back(FrameView{&frames[s], &depths[s], &cams[s], nullptr});
    }
    return v;
}

TEST(RenderJob, PaperDefaults) {
    const RenderJob dn = RenderJob::defaults(Application::denoise);
    EXPECT_EQ(dn.sigmas.rgb, 40.0);
    EXPECT_EQ(dn.sigmas.xyz, 10.0);
    EXPECT_EQ(dn.sigmas.f, 6.0);
    EXPECT_EQ(dn.l, 3.0);
    const RenderJob db = RenderJob::defaults(Application::deblur);
    EXPECT_EQ(db.sigmas.rgb, 200.0);
    EXPECT_EQ(db.sigmas.xyz, 10.0);
    EXPECT_EQ(db.sigmas.f, 20.0);
    const RenderJob sr = RenderJob::defaults(Application::superres);
    EXPECT_EQ(sr.sigmas.rgb, 50.0);
    EXPECT_EQ(sr.sigmas.area, 0.02);
    EXPECT_EQ(sr.superres_factor, 3);
    EXPECT_EQ(RenderJob::defaults(Application::inpaint).sigmas.rgb, 55.0);
    EXPECT_EQ(RenderJob::defaults(Application::semitransparent).semitransparent_sigma_rgb, 80.0);
    EXPECT_EQ(RenderJob::defaults(Application::inpaint).inpaint_iterations, 2);
    EXPECT_EQ(RenderJob::defaults(Application::action).sigmas.ord, 10.0);
}

TEST(RenderJob, WindowRadiusFollowsSigmaF) {
    RenderJob job = RenderJob::defaults(Application::denoise);
    EXPECT_EQ(job.default_window_radius(), 18);
    job.sigmas.f = 30.0;
    EXPECT_EQ(job.default_window_radius(), 60);
    EXPECT_EQ(RenderJob::defaults(Application::deblur).default_window_radius(), 60);
}

TEST(RenderJob, MissingParametersAreConfigErrors) {
    EXPECT_THROW(RenderJob::defaults(Application::shutter).validate(), ConfigError);
    EXPECT_THROW(RenderJob::defaults(Application::action).validate(), ConfigError);
    EXPECT_THROW(RenderJob::defaults(Application::aperture).validate(), ConfigError);
    RenderJob action = RenderJob::defaults(Application::action);
    action.shutter = shutter::Box{0, 3};
    action.sigmas.ord.reset();
    EXPECT_THROW(action.validate(), ConfigError);
    RenderJob bad_l = RenderJob::defaults(Application::denoise);
    bad_l.l = 0.5;
    EXPECT_THROW(bad_l.validate(), ConfigError);
    RenderJob bad_region = RenderJob::defaults(Application::inpaint);
    bad_region.region = Region3D{Eigen::Vector3d::Ones(), Eigen::Vector3d::Zero()};
    EXPECT_THROW(bad_region.validate(), ConfigError);

    const Dataset ds = scene_dataset("static", 16, 12, 2);
    EXPECT_THROW(Renderer(RenderJob::defaults(Application::shutter), ds), ConfigError);
    EXPECT_THROW(Renderer(RenderJob::defaults(Application::inpaint), ds), ConfigError);
}

TEST(ApplicationNames, RoundTrip) {
    for (Application app : {Application::denoise, Application::deblur, Application::superres, Application::inpaint,
                            Application::semitransparent, Application::shutter, Application::action,
                            Application::aperture}) {
        EXPECT_EQ(parse_application(to_string(app)), app);
    }
    EXPECT_THROW(parse_application("sharpen"), ConfigError);
}

TEST(RegionToMasks, EmptyAndFullRegions) {
    const Dataset ds = scene_dataset("static", 24, 16, 3);
    Region3D empty{Eigen::Vector3d::Constant(1000.0), Eigen::Vector3d::Constant(1000.0)};
    for (const Mask& m : region_to_masks(empty, ds.depths, ds.cameras)) {
        EXPECT_EQ(std::count(m.data.begin(), m.data.end(), 1), 0);
    }
    Region3D all{Eigen::Vector3d::Constant(-1e6), Eigen::Vector3d::Constant(1e6)};
    for (const Mask& m : region_to_masks(all, ds.depths, ds.cameras)) {
        EXPECT_EQ(std::count(m.data.begin(), m.data.end(), 1), static_cast<long>(m.data.size()));
    }
    Region3D later = all;
    later.frame_begin = 2;
    const auto masks = region_to_masks(later, ds.depths, ds.cameras);
    EXPECT_EQ(std::count(masks[0].data.begin(), masks[0].data.end(), 1), 0);
    EXPECT_GT(std::count(masks[2].data.begin(), masks[2].data.end(), 1), 0);
}

TEST(RegionToMasks, BoxRegionMatchesRenderedObjectMask) {
    const synth::Scene scene = synth::preset("static", 96, 64, 4, 2);
    const Dataset ds = synth::render_scene(scene, 1);
    const std::size_t box = 3;
    Region3D region;
    region.min = scene.boxes[box].min.array() - 1e-4;
    region.max = scene.boxes[box].max.array() + 1e-4;
    const auto masks = region_to_masks(region, ds.depths, ds.cameras);
    const auto truth = synth::render_box_mask(scene, box);
    long inter = 0;
    long uni = 0;
    for (std::size_t f = 0; f < masks.size(); ++f) {
        for (std::size_t i = 0; i < masks[f].data.size(); ++i) {
            inter += masks[f].data[i] & truth[f].data[i];
            uni += masks[f].data[i] | truth[f].data[i];
        }
    }
    ASSERT_GT(uni, 0);
    EXPECT_GE(static_cast<double>(inter) / static_cast<double>(uni), 0.9);
}

TEST(Render, DenoiseOnCleanSceneKeepsTheInput) {
    const Dataset ds = scene_dataset("static", 160, 90, 9);
    RenderJob job = RenderJob::defaults(Application::denoise);
    Renderer r(job, ds, RenderOptions{1, 4});
    const Frame out = r.render_frame(4);
    const Image8 a = delinearize(out);
    const Image8 b = delinearize(ds.frames[4]);
    double mae = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        mae += std::abs(static_cast<int>(a.data[i]) - static_cast<int>(b.data[i]));
    }
    EXPECT_LE(mae / static_cast<double>(a.data.size()), 2.0);
}

TEST(Render, BoxShutterEqualsBruteForceMean) {
    const Dataset ds = scene_dataset("static", 32, 24, 6);
    RenderJob job = RenderJob::defaults(Application::shutter);
    job.shutter = shutter::Box{0.0, 5.0};
    Renderer r(job, ds, RenderOptions{1, 4});
    const std::vector<std::size_t> all{0, 1, 2, 3, 4, 5};
    for (std::size_t slot : {0u, 3u}) {
        const Frame out = r.render_frame(slot);
        const auto window = views_of(ds.frames, r.depths(), r.cameras(), all);
        for (int y = 0; y < 24; ++y) {
            for (int x = 0; x < 32; ++x) {
                const SampleSet s = gather_bruteforce(r.cameras()[slot], FrustumSpec::at({x, y}), window);
                Eigen::Vector3d mean = Eigen::Vector3d::Zero();
                for (const Sample& smp : s.samples) {
                    mean += smp.rgb;
                }
                if (s.samples.empty()) {
                    mean = ds.frames[slot].at(x, y).cast<double>();
                } else {
                    mean /= static_cast<double>(s.samples.size());
                }
                for (int c = 0; c < 3; ++c) {
                    ASSERT_NEAR(out.at(x, y)[c], mean[c], 1e-4);
                }
            }
        }
    }
}

TEST(Render, SingleImpulseProjectsOneFrame) {
    const Dataset ds = scene_dataset("static", 32, 24, 6);
    RenderJob job = RenderJob::defaults(Application::shutter);
    job.shutter = shutter::ImpulseTrain{{4.0}, 0.5};
    Renderer r(job, ds, RenderOptions{1, 4});
    const std::vector<std::size_t> only{4};
    const Frame out = r.render_frame(1);
    const auto window = views_of(ds.frames, r.depths(), r.cameras(), only);
    for (int y = 0; y < 24; ++y) {
        for (int x = 0; x < 32; ++x) {
            const SampleSet s = gather_bruteforce(r.cameras()[1], FrustumSpec::at({x, y}), window);
            if (s.samples.empty()) {
                continue;
            }
            Eigen::Vector3d mean = Eigen::Vector3d::Zero();
            for (const Sample& smp : s.samples) {
                mean += smp.rgb;
            }
            mean /= static_cast<double>(s.samples.size());
            for (int c = 0; c < 3; ++c) {
                ASSERT_NEAR(out.at(x, y)[c], mean[c], 1e-4);
            }
        }
    }
}

TEST(Render, InpaintWithEverythingMaskedIsThePlainMean) {
    Dataset ds = scene_dataset("static", 24, 16, 3);
    for (const Frame& f : ds.frames) {
        ds.masks.emplace_back(f.width, f.height, 1);
    }
    const RenderResult res = render_video(RenderJob::defaults(Application::inpaint), ds, RenderOptions{1, 4});
    RenderJob mean_job = RenderJob::defaults(Application::shutter);
    mean_job.shutter = shutter::Box{0.0, 2.0};
    const RenderResult mean = render_video(mean_job, ds, RenderOptions{1, 4});
    ASSERT_EQ(res.frames.size(), mean.frames.size());
    for (std::size_t k = 0; k < res.frames.size(); ++k) {
        for (std::size_t i = 0; i < res.frames[k].data.size(); ++i) {
            EXPECT_LE((res.frames[k].data[i] - mean.frames[k].data[i]).cwiseAbs().maxCoeff(), 1e-3f);
        }
    }
}

TEST(Render, UnmaskedPixelsKeepTheirInput) {
    Dataset ds = scene_dataset("static", 24, 16, 3);
    for (const Frame& f : ds.frames) {
        Mask m(f.width, f.height, 0);
        m.at(5, 5) = 1;
        ds.masks.push_back(m);
    }
    const RenderResult res = render_video(RenderJob::defaults(Application::inpaint), ds, RenderOptions{1, 4});
    for (std::size_t f = 0; f < ds.size(); ++f) {
        for (int y = 0; y < 16; ++y) {
            for (int x = 0; x < 24; ++x) {
                if (x != 5 || y != 5) {
                    EXPECT_EQ(res.frames[f].at(x, y), ds.frames[f].at(x, y));
                }
            }
        }
    }
}

TEST(Render, OneFrameVideoEqualsRenderFrame) {
    Dataset ds = scene_dataset("static", 24, 16, 1);
    const RenderJob job = RenderJob::defaults(Application::denoise);
    const RenderResult v = render_video(job, ds, RenderOptions{1, 4});
    ASSERT_EQ(v.frames.size(), 1u);
    EXPECT_EQ(v.frames[0], render_frame(0, job, ds, RenderOptions{1, 4}));
}

TEST(Render, FramesOutsideTheWindowDoNotMatter) {
    Dataset ds = scene_dataset("static", 24, 16, 8);
    ds.scale = SceneScale{1.0};
    RenderJob job = RenderJob::defaults(Application::denoise);
    job.window_radius = 2;
    const Frame before = render_frame(1, job, ds, RenderOptions{1, 4});
    Dataset changed = ds;
    for (std::size_t f = 4; f < 8; ++f) {
        for (Rgb& c : changed.frames[f].data) {
            c = Rgb(255.0f, 0.0f, 0.0f);
        }
        for (float& d : changed.depths[f].depth) {
            d *= 0.5f;
        }
    }
    EXPECT_EQ(render_frame(1, job, changed, RenderOptions{1, 4}), before);
    const Frame inside = render_frame(3, job, ds, RenderOptions{1, 4});
    EXPECT_NE(render_frame(3, job, changed, RenderOptions{1, 4}), inside);
}

TEST(Render, ThreadCountNeverChangesOutput) {
    const Dataset ds = scene_dataset("moving", 32, 24, 5);
    std::vector<RenderJob> jobs;
    jobs.push_back(RenderJob::defaults(Application::denoise));
    jobs.push_back(RenderJob::defaults(Application::deblur));
    jobs.push_back(RenderJob::defaults(Application::superres));
    RenderJob action = RenderJob::defaults(Application::action);
    action.shutter = shutter::DecayTail{4.0, 2.0};
    jobs.push_back(action);
    RenderJob aperture = RenderJob::defaults(Application::aperture);
    aperture.aperture = ApertureSpec{0.05, 6.0, 0.05};
    jobs.push_back(aperture);
    RenderJob inpaint = RenderJob::defaults(Application::semitransparent);
    inpaint.region = Region3D{Eigen::Vector3d(-100, -100, 0), Eigen::Vector3d(100, 100, 7)};
    jobs.push_back(inpaint);
    for (const RenderJob& job : jobs) {
        const RenderResult a = render_video(job, ds, RenderOptions{1, 4});
        const RenderResult b = render_video(job, ds, RenderOptions{3, 4});
        EXPECT_EQ(a.frames, b.frames) << to_string(job.application);
        ASSERT_EQ(a.stats.size(), b.stats.size());
        for (std::size_t i = 0; i < a.stats.size(); ++i) {
            EXPECT_EQ(a.stats[i].samples_per_pixel, b.stats[i].samples_per_pixel);
            EXPECT_EQ(a.stats[i].weight_fraction, b.stats[i].weight_fraction);
        }
    }
}

TEST(Render, SuperresFactorOneIsDenoising) {
    const Dataset ds = scene_dataset("static", 24, 16, 4);
    RenderJob sr = RenderJob::defaults(Application::superres);
    sr.superres_factor = 1;
    sr.sigmas.area.reset();
    sr.sigmas.xyz = 10.0;
    sr.sigmas.f = 6.0;
    RenderJob dn = RenderJob::defaults(Application::denoise);
    dn.sigmas = sr.sigmas;
    dn.window_radius = sr.window_radius;
    EXPECT_EQ(render_video(sr, ds, RenderOptions{1, 4}).frames, render_video(dn, ds, RenderOptions{1, 4}).frames);
}

TEST(Render, SuperresOutputHasTheUpscaledSize) {
    const Dataset ds = scene_dataset("static", 12, 8, 3);
    const Frame out = render_frame(1, RenderJob::defaults(Application::superres), ds, RenderOptions{1, 4});
    EXPECT_EQ(out.width, 36);
    EXPECT_EQ(out.height, 24);
    EXPECT_EQ(out.frame_index, 1);
}

TEST(Render, SamplesPerPixelIsInTheExpectedRange) {
    const Dataset ds = scene_dataset("static", 64, 36, 40);
    Renderer r(RenderJob::defaults(Application::denoise), ds, RenderOptions{1, 4});
    FrameStats stats;
    r.render_frame(20, &stats);
    EXPECT_GE(stats.samples_per_pixel, 50.0);
    EXPECT_LE(stats.samples_per_pixel, 5000.0);
    EXPECT_GT(stats.weight_fraction, 0.0);
    EXPECT_LE(stats.weight_fraction, 1.0);
}

TEST(Render, ShutterWindowUsesOpenFramesOnly) {
    const Dataset ds = scene_dataset("static", 16, 12, 10);
    RenderJob job = RenderJob::defaults(Application::shutter);
    job.shutter = shutter::ImpulseTrain{{2.0, 7.0}, 0.5};
    Renderer r(job, ds);
    EXPECT_EQ(r.window_slots(0), (std::vector<std::size_t>{2, 7}));
    job.region = Region3D{Eigen::Vector3d::Constant(-1.0), Eigen::Vector3d::Constant(1.0)};
    Renderer with_region(job, ds);
    EXPECT_EQ(with_region.window_slots(0), (std::vector<std::size_t>{0, 2, 7}));
}

TEST(Render, ApertureWidensTheFrustum) {
    const Dataset ds = scene_dataset("static", 24, 16, 3);
    RenderJob job = RenderJob::defaults(Application::aperture);
    job.aperture = ApertureSpec{0.2, 5.0, 0.1};
    Renderer r(job, ds);
    EXPECT_GT(r.effective_l(), job.l);
    EXPECT_LE(r.effective_l(), 2.0 * std::hypot(24.0, 16.0));
}

} // namespace
} // namespace scenespace
