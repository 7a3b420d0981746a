#pragma once

#include <stdexcept>
#include <string>

namespace stargaze {

/// Base class for every failure raised by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid user-supplied configuration. The CLI maps this to a usage error
/// (exit code 2) instead of a runtime failure (exit code 1).
struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace stargaze
