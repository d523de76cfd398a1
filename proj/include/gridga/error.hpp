#pragma once

#include <stdexcept>
#include <string>

namespace gridga {

enum class ErrorKind {
    usage,             // bad argument to an API call
    config,            // invalid configuration or CLI override
    schema,            // CSV header mismatch, malformed file
    label,             // label value not covered by the label map
    manifest,          // column missing from the feature manifest
    stratification,    // class too small to split
    training,          // degenerate training data (e.g. single class)
    divergence,        // optimizer produced a non-finite loss
    metric_undefined,  // metric needs both classes present
    io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` drives CLI exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace gridga
