// Copyright Contributors to the scenespace project
// SPDX-License-Identifier: Apache-2.0

#include "scenespace/errors.hpp"
#include "scenespace/filters.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace scenespace {
namespace {

Sample make(double r, double g, double b, Eigen::Vector3d xyz = Eigen::Vector3d::Zero(), double f = 0.0) {
    Sample s;
    s.rgb = {r, g, b};
    s.xyz = xyz;
    s.f = f;
    return s;
}

Sigmas denoise_sigmas() {
    Sigmas s;
    s.rgb = 40.0;
    s.xyz = 10.0;
    s.f = 6.0;
    return s;
}

std::vector<Sample> random_set(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> c(0.0, 255.0);
    std::uniform_real_distribution<double> p(-5.0, 5.0);
    std::uniform_int_distribution<int> f(0, 30);
    std::vector<Sample> set(n);
    for (Sample& s : set) {
        s = make(c(rng), c(rng), c(rng), {p(rng), p(rng), p(rng)}, f(rng));
    }
    return set;
}

TEST(FilterSet, UnitWeightsGiveTheMean) {
    std::mt19937_64 rng(1);
    const auto set = random_set(rng, 17);
    const std::vector<double> w(set.size(), 1.0);
    const FilterResult r = filter_set(set, w, Eigen::Vector3d::Zero());
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const Sample& s : set) {
        mean += s.rgb;
    }
    mean /= static_cast<double>(set.size());
    EXPECT_TRUE(r.rgb.isApprox(mean, 1e-12));
    EXPECT_DOUBLE_EQ(r.weight_sum, 17.0);
    EXPECT_DOUBLE_EQ(r.weight_fraction, 1.0);
    EXPECT_FALSE(r.used_fallback);
}

TEST(FilterSet, IndicatorWeightSelectsOneSample) {
    std::mt19937_64 rng(2);
    const auto set = random_set(rng, 9);
    std::vector<double> w(set.size(), 0.0);
    w[4] = 0.3;
    EXPECT_EQ(filter_set(set, w, Eigen::Vector3d::Zero()).rgb, set[4].rgb);
}

TEST(FilterSet, EmptyOrZeroWeightsFallBack) {
    const Eigen::Vector3d fb(1.0, 2.0, 3.0);
    const FilterResult empty = filter_set({}, {}, fb);
    EXPECT_EQ(empty.rgb, fb);
    EXPECT_TRUE(empty.used_fallback);
    EXPECT_EQ(empty.weight_fraction, 0.0);
    std::mt19937_64 rng(3);
    const auto set = random_set(rng, 5);
    const std::vector<double> tiny(set.size(), 1e-8);
    EXPECT_EQ(filter_set(set, tiny, fb).rgb, fb);
}

TEST(FilterSet, ScalingWeightsLeavesOutputUnchanged) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const auto set = random_set(rng, 12);
        std::vector<double> w(set.size());
        for (double& x : w) {
            x = u(rng);
        }
        std::vector<double> scaled = w;
        for (double& x : scaled) {
            x *= 1000.0;
        }
        EXPECT_TRUE(filter_set(set, w, {}).rgb.isApprox(filter_set(set, scaled, {}).rgb, 1e-12));
    }
}

TEST(FilterSet, TemplateFormMatchesSpanForm) {
    std::mt19937_64 rng(5);
    SampleSet set;
    set.samples = random_set(rng, 8);
    const auto fn = [](const Sample& s) { return s.f + 1.0; };
    std::vector<double> w;
    for (const Sample& s : set.samples) {
        w.push_back(fn(s));
    }
    EXPECT_EQ(filter_set(set, fn, {}).rgb, filter_set(set.samples, w, {}).rgb);
}

TEST(WDenoise, PeakAndClosedForm) {
    const Sigmas sig = denoise_sigmas();
    const Sample ref = make(100, 100, 100, {1, 2, 3}, 5);
    EXPECT_EQ(w_denoise(ref, ref, sig), 1.0);
    Sample s = ref;
    s.rgb.x() += 40.0;
    EXPECT_NEAR(w_denoise(s, ref, sig), std::exp(-0.5), 1e-15);
    EXPECT_NEAR(std::exp(-0.5), 0.6065, 1e-4);
}

TEST(WDenoise, AbsentDimensionsAreIgnored) {
    Sigmas sig;
    sig.rgb = 10.0;
    const Sample ref = make(1, 2, 3, {0, 0, 0}, 0);
    const Sample s = make(1, 2, 3, {100, 100, 100}, 100);
    EXPECT_EQ(w_denoise(s, ref, sig), 1.0);
}

TEST(WDenoise, SymmetricAndChannelPermutationInvariant) {
    std::mt19937_64 rng(6);
    const Sigmas sig = denoise_sigmas();
    for (int i = 0; i < 1000; ++i) {
        const auto two = random_set(rng, 2);
        EXPECT_DOUBLE_EQ(w_denoise(two[0], two[1], sig), w_denoise(two[1], two[0], sig));
        Sample a = two[0];
        Sample b = two[1];
        std::swap(a.rgb.x(), a.rgb.z());
        std::swap(b.rgb.x(), b.rgb.z());
        EXPECT_NEAR(w_denoise(a, b, sig), w_denoise(two[0], two[1], sig), 1e-15);
    }
}

TEST(Sigmas, RejectsNonPositive) {
    Sigmas s;
    s.rgb = 0.0;
    EXPECT_THROW(s.validate(), ConfigError);
    s.rgb = -1.0;
    EXPECT_THROW(s.validate(), ConfigError);
    s.rgb = std::numeric_limits<double>::infinity();
    EXPECT_THROW(s.validate(), ConfigError);
    s = {};
    EXPECT_NO_THROW(s.validate());
}

TEST(Sharpness, NormalizedToWindowMaximum) {
    const SharpnessTable t({{0, 5.0}, {1, 10.0}, {2, 0.0}});
    EXPECT_EQ(t.at(1), 1.0);
    EXPECT_EQ(t.at(0), 0.5);
    EXPECT_EQ(t.at(2), 0.0);
    EXPECT_THROW(t.at(3), DataError);
}

TEST(Sharpness, GradientSumOracle) {
    Frame flat(6, 5);
    for (Rgb& c : flat.data) {
        c = Rgb(7.0f, 7.0f, 7.0f);
    }
    EXPECT_EQ(frame_gradient_sum(flat), 0.0);
    // horizontal ramp in red: interior central difference 1, border one-sided halves
    Frame ramp(5, 1);
    for (int x = 0; x < 5; ++x) {
        ramp.at(x, 0) = Rgb(static_cast<float>(2 * x), 0.0f, 0.0f);
    }
    EXPECT_NEAR(frame_gradient_sum(ramp), 1.0 + 2.0 + 2.0 + 2.0 + 1.0, 1e-12);
}

TEST(WDeblur, SharpestFrameAtReferenceIsOne) {
    Sigmas sig;
    sig.rgb = 200.0;
    sig.xyz = 10.0;
    sig.f = 20.0;
    const SharpnessTable t({{0, 5.0}, {1, 10.0}, {2, 0.0}});
    const Sample ref = make(10, 20, 30, {0, 0, 1}, 1);
    EXPECT_EQ(w_deblur(ref, ref, sig, t), 1.0);
    Sample blurred = ref;
    blurred.f = 2.0;
    EXPECT_EQ(w_deblur(blurred, ref, sig, t), 0.0);
    blurred.f = 7.0;
    EXPECT_THROW(w_deblur(blurred, ref, sig, t), DataError);
}

TEST(WSuperres, AreaPenalty) {
    Sigmas sig;
    sig.rgb = 50.0;
    sig.area = 0.02;
    Sample s = make(1, 2, 3);
    EXPECT_THROW(w_superres(s, s, sig), DomainError);
    s.area = 0.0;
    EXPECT_EQ(w_superres(s, s, sig), 1.0);
    s.area = 0.02;
    EXPECT_NEAR(w_superres(s, s, sig), std::exp(-0.5), 1e-15);
}

TEST(MeanReference, Averages) {
    EXPECT_THROW(mean_reference({}), DomainError);
    const Sample a = make(1, 2, 3, {4, 5, 6}, 7);
    const Sample one = mean_reference(std::vector<Sample>{a});
    EXPECT_EQ(one.rgb, a.rgb);
    EXPECT_EQ(one.xyz, a.xyz);
    EXPECT_EQ(one.f, a.f);
    const Sample b = make(3, 4, 5, {6, 7, 8}, 9);
    const Sample mid = mean_reference(std::vector<Sample>{a, b});
    EXPECT_EQ(mid.rgb, Eigen::Vector3d(2, 3, 4));
    EXPECT_EQ(mid.xyz, Eigen::Vector3d(5, 6, 7));
    EXPECT_EQ(mid.f, 8.0);
}

TEST(MeanReference, MatchesPerDimensionOracle) {
    std::mt19937_64 rng(7);
    const auto set = random_set(rng, 37);
    const Sample m = mean_reference(set);
    for (int d = 0; d < 7; ++d) {
        double sum = 0.0;
        for (const Sample& s : set) {
            sum += d < 3 ? s.rgb[d] : d < 6 ? s.xyz[d - 3] : s.f;
        }
        const double got = d < 3 ? m.rgb[d] : d < 6 ? m.xyz[d - 3] : m.f;
        EXPECT_NEAR(got, sum / 37.0, 1e-12 * (1.0 + std::abs(sum)));
    }
}

TEST(WInpaint, MaskedIsZero) {
    Sigmas sig;
    sig.rgb = 55.0;
    const Sample s = make(5, 5, 5);
    EXPECT_EQ(w_inpaint(s, s, sig, true), 0.0);
    EXPECT_EQ(w_inpaint(s, s, sig, false), 1.0);
}

TEST(InpaintFilter, IgnoresMaskedOutliers) {
    Sigmas sig;
    sig.rgb = 55.0;
    std::vector<Sample> set;
    std::vector<std::uint8_t> masked;
    for (int i = 0; i < 6; ++i) {
        set.push_back(make(200, 200, 200));
        masked.push_back(1);
    }
    for (int i = 0; i < 4; ++i) {
        set.push_back(make(50 + i, 60, 70));
        masked.push_back(0);
    }
    InpaintParams params;
    params.sigmas = sig;
    const FilterResult r = inpaint_filter(set, masked, params);
    // mean shift from the mean of all samples, unmasked samples only
    double ref = 0.0;
    for (const Sample& s : set) {
        ref += s.rgb.x() / static_cast<double>(set.size());
    }
    for (int it = 0; it < params.iterations; ++it) {
        double num = 0.0;
        double den = 0.0;
        for (int i = 0; i < 4; ++i) {
            const double c = 50.0 + i;
            const double dr = c - ref;
            const double dg = 60.0 - (6 * 200.0 + 4 * 60.0) / 10.0;
            const double db = 70.0 - (6 * 200.0 + 4 * 70.0) / 10.0;
            const double w = it == 0 ? std::exp(-(dr * dr + dg * dg + db * db) / (2.0 * 55.0 * 55.0))
                                     : std::exp(-dr * dr / (2.0 * 55.0 * 55.0));
            num += w * c;
            den += w;
        }
        ref = num / den;
    }
    EXPECT_NEAR(r.rgb.x(), ref, 1e-9);
    EXPECT_NEAR(r.rgb.x(), 51.5, 1e-3);
    EXPECT_NEAR(r.rgb.y(), 60.0, 1e-9);
}

TEST(InpaintFilter, MeanShiftPicksTheDominantMode) {
    Sigmas sig;
    sig.rgb = 55.0;
    std::vector<Sample> set;
    for (int i = 0; i < 8; ++i) {
        set.push_back(make(20, 20, 20));
    }
    for (int i = 0; i < 2; ++i) {
        set.push_back(make(220, 220, 220));
    }
    const std::vector<std::uint8_t> masked(set.size(), 0);
    InpaintParams params;
    params.sigmas = sig;
    params.iterations = 2;
    const FilterResult two = inpaint_filter(set, masked, params);
    const double plain_mean = (8 * 20.0 + 2 * 220.0) / 10.0;
    EXPECT_LT(two.rgb.x(), plain_mean);
    EXPECT_LT(two.rgb.x(), 25.0);
}

TEST(InpaintFilter, FallbackBehaviour) {
    InpaintParams params;
    params.sigmas.rgb = 55.0;
    const FilterResult empty = inpaint_filter({}, {}, params);
    EXPECT_TRUE(empty.used_fallback);
    EXPECT_EQ(empty.rgb, Eigen::Vector3d::Zero());
    const std::vector<Sample> set{make(100, 100, 100), make(50, 50, 50)};
    const std::vector<std::uint8_t> all_masked{1, 1};
    const FilterResult mean = inpaint_filter(set, all_masked, params);
    EXPECT_TRUE(mean.used_fallback);
    EXPECT_EQ(mean.rgb, Eigen::Vector3d::Constant(75.0));
}

TEST(InpaintFilter, SemiTransparencyPullsTowardTheInput) {
    Sigmas sig;
    sig.rgb = 55.0;
    std::vector<Sample> set;
    std::vector<std::uint8_t> masked;
    for (int i = 0; i < 5; ++i) {
        set.push_back(make(200, 30, 30));
        masked.push_back(1);
        set.push_back(make(30, 30, 200));
        masked.push_back(0);
    }
    InpaintParams params;
    params.sigmas = sig;
    const double opaque = inpaint_filter(set, masked, params).rgb.x();
    params.input_color = Eigen::Vector3d(200, 30, 30);
    const double semi = inpaint_filter(set, masked, params).rgb.x();
    EXPECT_NEAR(opaque, 30.0, 1e-9);
    EXPECT_GT(semi, opaque + 10.0);
    EXPECT_LT(semi, 200.0);
}

TEST(WShutter, Variants) {
    Sample s;
    s.f = 15.0;
    EXPECT_EQ(w_shutter(s, shutter::Box{0, 100}), 1.0);
    EXPECT_EQ(w_shutter(s, shutter::Box{16, 100}), 0.0);
    EXPECT_EQ(w_shutter(s, shutter::ImpulseTrain{{10, 20}, 0.5}), 0.0);
    EXPECT_EQ(w_shutter(s, shutter::ImpulseTrain{{10, 15.5}, 0.5}), 1.0);
    const shutter::DecayTail tail{25.0, 10.0};
    EXPECT_NEAR(w_shutter(s, tail), std::exp(-1.0), 1e-15);
    s.f = 25.0;
    EXPECT_EQ(w_shutter(s, tail), 1.0);
    s.f = 26.0;
    EXPECT_EQ(w_shutter(s, tail), 0.0);
    EXPECT_TRUE(shutter_open(tail, 3.0));
    EXPECT_FALSE(shutter_open(shutter::Box{4, 6}, 3.0));
}

TEST(WShutter, ValidateRejectsMalformedShutters) {
    EXPECT_THROW(validate(ShutterFunction{shutter::Box{2, 1}}), ConfigError);
    EXPECT_THROW(validate(ShutterFunction{shutter::ImpulseTrain{{}, 0.5}}), ConfigError);
    EXPECT_THROW(validate(ShutterFunction{shutter::DecayTail{1, 0}}), ConfigError);
    EXPECT_NO_THROW(validate(ShutterFunction{shutter::Box{1, 1}}));
}

TEST(WAction, OrderGaussian) {
    Sample s;
    s.f = 10.0;
    const ShutterFunction xi = shutter::ImpulseTrain{{10}, 0.5};
    EXPECT_EQ(w_action(s, xi, 0, 10.0), 1.0);
    EXPECT_NEAR(w_action(s, xi, 10, 10.0), std::exp(-0.5), 1e-15);
    std::vector<Sample> set(3);
    for (int i = 0; i < 3; ++i) {
        set[i].f = 10.0;
        set[i].xyz = ScenePoint(0, 0, 1.0 + i);
    }
    EXPECT_EQ(w_action(set[0], xi, set, ScenePoint::Zero(), 10.0), 1.0);
    EXPECT_NEAR(w_action(set[2], xi, set, ScenePoint::Zero(), 1.0), std::exp(-2.0), 1e-15);
}

TEST(WAperture, ConeGeometry) {
    const ViewRay ray{Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitZ()};
    const ApertureSpec ap{0.1, 5.0, 0.2};
    Sample s;
    s.xyz = ScenePoint(0, 0, 5);
    EXPECT_THROW(w_aperture(s, ray, ap), DomainError);
    s.area = 0.003;
    EXPECT_NEAR(w_aperture(s, ray, ap), 0.003 / (std::numbers::pi * 0.01), 1e-15);
    EXPECT_NEAR(ap.radius(5.5) - ap.radius(5.0), 0.5 * 0.2, 1e-15);
    EXPECT_NEAR(ap.radius(4.5) - ap.radius(5.0), 0.5 * 0.2, 1e-15);
    s.xyz = ScenePoint(0.1, 0, 5); // q == a(r)
    EXPECT_EQ(w_aperture(s, ray, ap), 0.0);
    s.xyz = ScenePoint(0.25, 0, 6); // a(6) = 0.3
    EXPECT_NEAR(w_aperture(s, ray, ap), 0.003 / (std::numbers::pi * 0.09), 1e-15);
    s.xyz = ScenePoint(0, 0, -1);
    EXPECT_EQ(w_aperture(s, ray, ap), 0.0);
    const ApertureSpec pinhole{0.0, 5.0, 0.0};
    s.xyz = ScenePoint(0, 0, 5);
    EXPECT_EQ(w_aperture(s, ray, pinhole), 0.0);
}

TEST(WAperture, ValidateRejectsBadSpecs) {
    EXPECT_THROW((ApertureSpec{-0.1, 1.0, 0.0}.validate()), ConfigError);
    EXPECT_THROW((ApertureSpec{0.1, 0.0, 0.0}.validate()), ConfigError);
    EXPECT_THROW((ApertureSpec{0.1, 1.0, -1.0}.validate()), ConfigError);
}

// Every weighting yields finite non-negative weights and a convex combination of its inputs.
TEST(ConvexCombination, AllWeightingsOnRandomSets) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Sigmas sig = denoise_sigmas();
    Sigmas sr;
    sr.rgb = 50.0;
    sr.area = 0.02;
    const SharpnessTable sharp([&] {
        std::map<int, double> m;
        for (int f = 0; f <= 30; ++f) {
            m[f] = u(rng);
        }
        return m;
    }());
    const ApertureSpec ap{0.3, 3.0, 0.5};
    const ViewRay ray{Eigen::Vector3d(0, 0, -6), Eigen::Vector3d::UnitZ()};
    const std::vector<ShutterFunction> shutters{shutter::Box{5, 20}, shutter::ImpulseTrain{{3, 17}, 0.5},
                                                shutter::DecayTail{25, 4}};
    for (int trial = 0; trial < 2000; ++trial) {
        auto set = random_set(rng, 1 + rng() % 40);
        for (Sample& s : set) {
            s.area = 0.05 * u(rng);
        }
        const Sample ref = set[rng() % set.size()];
        std::vector<std::uint8_t> masked(set.size());
        for (auto& m : masked) {
            m = u(rng) < 0.5 ? 1 : 0;
        }
        const auto orders = depth_orders(set, ray.origin);
        Eigen::Vector3d lo = Eigen::Vector3d::Constant(1e300);
        Eigen::Vector3d hi = -lo;
        for (const Sample& s : set) {
            lo = lo.cwiseMin(s.rgb);
            hi = hi.cwiseMax(s.rgb);
        }
        std::vector<std::function<double(std::size_t)>> fns{
            [&](std::size_t i) { return w_denoise(set[i], ref, sig); },
            [&](std::size_t i) { return w_deblur(set[i], ref, sig, sharp); },
            [&](std::size_t i) { return w_superres(set[i], ref, sr); },
            [&](std::size_t i) { return w_inpaint(set[i], ref, sig, masked[i] != 0); },
            [&](std::size_t i) { return w_shutter(set[i], shutters[i % 3]); },
            [&](std::size_t i) { return w_action(set[i], shutters[0], orders[i], 10.0); },
            [&](std::size_t i) { return w_aperture(set[i], ray, ap); },
        };
        for (const auto& fn : fns) {
            std::vector<double> w(set.size());
            for (std::size_t i = 0; i < set.size(); ++i) {
                w[i] = fn(i);
                ASSERT_TRUE(std::isfinite(w[i]) && w[i] >= 0.0);
            }
            const FilterResult r = filter_set(set, w, ref.rgb);
            if (!r.used_fallback) {
                for (int c = 0; c < 3; ++c) {
                    ASSERT_GE(r.rgb[c], lo[c] - 1e-9);
                    ASSERT_LE(r.rgb[c], hi[c] + 1e-9);
                }
            }
        }
        InpaintParams params;
        params.sigmas.rgb = 55.0;
        if (trial % 2 == 0) {
            params.input_color = ref.rgb;
        }
        const FilterResult r = inpaint_filter(set, masked, params);
        ASSERT_TRUE(r.rgb.allFinite());
        for (int c = 0; c < 3; ++c) {
            ASSERT_GE(r.rgb[c], lo[c] - 1e-9);
            ASSERT_LE(r.rgb[c], hi[c] + 1e-9);
        }
    }
}

} // namespace
} // namespace scenespace
