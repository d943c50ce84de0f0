#pragma once

#include <stdexcept>
#include <string>

namespace idla {

/// Caller broke a documented precondition (bad dimension, bad range,
/// mismatched fields, corrupt input file, ...).  CLI exit code 2.
class ContractError : public std::invalid_argument {
public:
    explicit ContractError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// A configured memory or size budget would be exceeded.  CLI exit code 3.
class ResourceError : public std::runtime_error {
public:
    explicit ResourceError(const std::string& msg) : std::runtime_error(msg) {}
};

/// An iterative solve failed to reach its residual target.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Snapshot / cache file is unreadable: bad magic, bad version, short
/// read, or checksum mismatch.
class CorruptSnapshotError : public ContractError {
public:
    explicit CorruptSnapshotError(const std::string& msg) : ContractError(msg) {}
};

}  // namespace idla
