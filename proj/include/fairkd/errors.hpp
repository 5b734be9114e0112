// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace fairkd {

/// Shape or dimensionality violation in a tensor operation.
class DimensionError : public std::runtime_error {
public:
    explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

/// An operation's calling contract was broken (non-scalar loss, missing
/// labels, non-one-hot input, ...).
class ContractError : public std::runtime_error {
public:
    explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid run configuration. The message names the offending key path.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed on-disk artifact (dataset manifest, tensor file, checkpoint).
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Training aborted at runtime (non-finite loss). Message names epoch/batch.
class TrainingError : public std::runtime_error {
public:
    explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

/// AUC is undefined because only one class is present.
class UndefinedAucError : public std::runtime_error {
public:
    explicit UndefinedAucError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace fairkd
