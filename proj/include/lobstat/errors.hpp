#pragma once

#include <stdexcept>
#include <string>

namespace lobstat {

// Bad flags or missing required arguments. CLI exit code 1.
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// Corrupt or inconsistent input data (stream desync, unknown cancel ref,
// malformed config). CLI exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// A broken internal invariant: the engine itself is at fault. CLI exit code 3.
class InvariantError : public std::logic_error {
public:
    explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace lobstat
