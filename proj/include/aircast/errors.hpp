#pragma once

#include <stdexcept>
#include <string>

namespace aircast {

// Error taxonomy mirrored by the CLI exit codes:
// config_error -> 2, data_error -> 3, numeric_error -> 4, artifact_error -> 5.

struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

struct data_error : std::runtime_error {
    explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

struct artifact_error : std::runtime_error {
    explicit artifact_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace aircast
