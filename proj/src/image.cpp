// Copyright Contributors to the scenespace project
// SPDX-License-Identifier: Apache-2.0

#include "scenespace/image.hpp"

#include <algorithm>
#include <cmath>

namespace scenespace {

Rgb Frame::sample_bilinear(double u, double v) const {
    const double x = u - 0.5;
    const double y = v - 0.5;
    const double fx = std::floor(x);
    const double fy = std::floor(y);
    const auto tx = static_cast<float>(x - fx);
    const auto ty = static_cast<float>(y - fy);
    const int x0 = std::clamp(static_cast<int>(fx), 0, width - 1);
    const int y0 = std::clamp(static_cast<int>(fy), 0, height - 1);
    const int x1 = std::clamp(static_cast<int>(fx) + 1, 0, width - 1);
    const int y1 = std::clamp(static_cast<int>(fy) + 1, 0, height - 1);
    const Rgb top = at(x0, y0) * (1.0f - tx) + at(x1, y0) * tx;
    const Rgb bottom = at(x0, y1) * (1.0f - tx) + at(x1, y1) * tx;
    return top * (1.0f - ty) + bottom * ty;
}

} // namespace scenespace
