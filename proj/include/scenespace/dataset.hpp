// Copyright Contributors to the scenespace project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "scenespace/geometry.hpp"
#include "scenespace/image.hpp"

#include <optional>
#include <vector>

namespace scenespace {

/// One video with everything needed to render it. Frames are linear RGB.
/// `depths` may be empty before depth estimation; `masks` is empty unless provided.
struct Dataset {
    std::vector<Frame> frames;
    std::vector<CameraPose> cameras;
    std::vector<DepthMap> depths;
    std::vector<Mask> masks;
    std::optional<SceneScale> scale;

    std::size_t size() const { return frames.size(); }

    /// Position of the frame with the given frame index, or nullopt.
    std::optional<std::size_t> slot_of(int frame_index) const;

    /// Throws DataError naming the offending frame on any inconsistency.
    void validate(bool require_depth) const;
};

} // namespace scenespace
