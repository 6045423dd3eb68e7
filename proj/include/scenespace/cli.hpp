// Copyright Contributors to the scenespace project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "scenespace/pipeline.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace scenespace::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDataError = 3;

/// Runs one invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Applies a JSON job document on top of `base`. Unknown keys, wrong types and an
/// application that differs from base.application throw ConfigError.
RenderJob job_from_json(std::string_view text, RenderJob base);

/// "box:T0,T1", "impulse:T1;T2;...[@HALF_WIDTH]" or "decay:T_PEAK,TAU".
ShutterFunction parse_shutter(std::string_view text);

/// "X0,Y0,Z0,X1,Y1,Z1" with an optional ":F0,F1" frame interval.
Region3D parse_region(std::string_view text);

} // namespace scenespace::cli
