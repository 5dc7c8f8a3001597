#pragma once

#include <stdexcept>
#include <string>

namespace hadeq {

/// Two arguments live on different manifolds (or tangent bases disagree).
class DomainMismatchError : public std::invalid_argument {
public:
    explicit DomainMismatchError(const std::string& what) : std::invalid_argument(what) {}
};

/// Input is degenerate for the requested operation (e.g. coincident triangle vertices).
class DegenerateInputError : public std::invalid_argument {
public:
    explicit DegenerateInputError(const std::string& what) : std::invalid_argument(what) {}
};

/// The combination of set descriptor / manifold / method is not supported.
class CapabilityError : public std::runtime_error {
public:
    explicit CapabilityError(const std::string& what) : std::runtime_error(what) {}
};

/// A sampling-based check could not gather enough evidence to decide.
class InsufficientEvidenceError : public std::runtime_error {
public:
    explicit InsufficientEvidenceError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed experiment configuration; message carries the offending field.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hadeq
