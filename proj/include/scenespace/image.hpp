// Copyright Contributors to the scenespace project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace scenespace {

using Rgb = Eigen::Vector3f;

/// Integer pixel index. The pixel covers [x, x+1) x [y, y+1); its center is at (x+0.5, y+0.5).
struct PixelIndex {
    int x = 0;
    int y = 0;

    friend bool operator==(const PixelIndex&, const PixelIndex&) = default;
};

inline Eigen::Vector2d pixel_center(PixelIndex p) { return {p.x + 0.5, p.y + 0.5}; }

/// 8-bit interleaved RGB image, gamma encoded (what lives on disk).
struct Image8 {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data; // width * height * 3

    Image8() = default;
    Image8(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}

    std::uint8_t* at(int x, int y) { return &data[(static_cast<std::size_t>(y) * width + x) * 3]; }
    const std::uint8_t* at(int x, int y) const { return &data[(static_cast<std::size_t>(y) * width + x) * 3]; }

    friend bool operator==(const Image8&, const Image8&) = default;
};

/// Linear-RGB frame with channels in [0, 255].
struct Frame {
    int width = 0;
    int height = 0;
    int frame_index = 0;
    std::vector<Rgb> data;

    Frame() = default;
    Frame(int w, int h, int index = 0)
        : width(w), height(h), frame_index(index), data(static_cast<std::size_t>(w) * h, Rgb::Zero()) {}

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
    Rgb& at(int x, int y) { return data[index(x, y)]; }
    const Rgb& at(int x, int y) const { return data[index(x, y)]; }
    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }

    /// Bilinear lookup at continuous coordinates (pixel centers at integer + 0.5), clamped at borders.
    Rgb sample_bilinear(double u, double v) const;

    friend bool operator==(const Frame& a, const Frame& b) {
        return a.width == b.width && a.height == b.height && a.frame_index == b.frame_index && a.data == b.data;
    }
};

/// Camera-space z per pixel. INVALID pixels hold +infinity in memory and -1 on disk.
struct DepthMap {
    static constexpr float kInvalid = std::numeric_limits<float>::infinity();

    int width = 0;
    int height = 0;
    std::vector<float> depth;

    DepthMap() = default;
    DepthMap(int w, int h, float fill = kInvalid)
        : width(w), height(h), depth(static_cast<std::size_t>(w) * h, fill) {}

    static bool is_valid(float d) { return std::isfinite(d) && d > 0.0f; }

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
    float& at(int x, int y) { return depth[index(x, y)]; }
    float at(int x, int y) const { return depth[index(x, y)]; }
    bool valid(int x, int y) const { return is_valid(at(x, y)); }

    friend bool operator==(const DepthMap& a, const DepthMap& b) {
        if (a.width != b.width || a.height != b.height || a.depth.size() != b.depth.size()) {
            return false;
        }
        // bitwise so that INVALID compares equal to itself
        for (std::size_t i = 0; i < a.depth.size(); ++i) {
            if (std::bit_cast<std::uint32_t>(a.depth[i]) != std::bit_cast<std::uint32_t>(b.depth[i])) {
                return false;
            }
        }
        return true;
    }
};

/// Binary per-pixel mask, 1 = pixel is to be removed.
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    Mask() = default;
    Mask(int w, int h, std::uint8_t fill = 0) : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }

    friend bool operator==(const Mask&, const Mask&) = default;
};

} // namespace scenespace
