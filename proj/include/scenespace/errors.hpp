// Copyright Contributors to the scenespace project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace scenespace {

/// Invalid or incomplete job configuration. Mapped to CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed, missing or inconsistent input data. Mapped to CLI exit code 3.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A function was called outside of its mathematical domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

} // namespace scenespace
