// Copyright Contributors to the scenespace project
// SPDX-License-Identifier: Apache-2.0

#include "scenespace/dataset.hpp"

#include "scenespace/errors.hpp"

#include <cmath>
#include <string>

namespace scenespace {

std::optional<std::size_t> Dataset::slot_of(int frame_index) const {
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (frames[i].frame_index == frame_index) {
            return i;
        }
    }
    return std::nullopt;
}

void Dataset::validate(bool require_depth) const {
    if (frames.empty()) {
        throw DataError("dataset has no frames");
    }
    if (frames.size() != cameras.size()) {
        throw DataError("frame count (" + std::to_string(frames.size()) + ") differs from camera count (" +
                        std::to_string(cameras.size()) + ")");
    }
    if (require_depth && depths.size() != frames.size()) {
        throw DataError("depth map count differs from frame count");
    }
    if (!masks.empty() && masks.size() != frames.size()) {
        throw DataError("mask count differs from frame count");
    }
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const Frame& f = frames[i];
        const std::string name = "frame " + std::to_string(f.frame_index);
        if (f.width != frames[0].width || f.height != frames[0].height) {
            throw DataError(name + ": resolution differs from the first frame");
        }
        if (f.data.size() != static_cast<std::size_t>(f.width) * f.height) {
            throw DataError(name + ": pixel buffer size mismatch");
        }
        if (i > 0 && f.frame_index <= frames[i - 1].frame_index) {
            throw DataError(name + ": frame indices must be strictly increasing");
        }
        if (cameras[i].frame_index != f.frame_index) {
            throw DataError(name + ": camera frame index mismatch");
        }
        cameras[i].validate();
        if (i < depths.size()) {
            const DepthMap& d = depths[i];
            if (d.width != f.width || d.height != f.height || d.depth.size() != f.data.size()) {
                throw DataError(name + ": depth dimensions do not match the frame");
            }
            for (float v : d.depth) {
                if (std::isnan(v)) {
                    throw DataError(name + ": depth contains NaN");
                }
            }
        }
        if (i < masks.size() && (masks[i].width != f.width || masks[i].height != f.height)) {
            throw DataError(name + ": mask dimensions do not match the frame");
        }
    }
}

} // namespace scenespace
