#pragma once

#include <stdexcept>
#include <string>

namespace apsk {

/// Invalid or inconsistent configuration / input data.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// File system / stream failure.
struct io_error : std::runtime_error {
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace apsk
