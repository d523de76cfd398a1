#include "gridga/error.hpp"

namespace gridga {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::usage: return "usage error";
        case ErrorKind::config: return "config error";
        case ErrorKind::schema: return "schema error";
        case ErrorKind::label: return "label error";
        case ErrorKind::manifest: return "manifest error";
        case ErrorKind::stratification: return "stratification error";
        case ErrorKind::training: return "training error";
        case ErrorKind::divergence: return "divergence error";
        case ErrorKind::metric_undefined: return "undefined metric";
        case ErrorKind::io: return "i/o error";
    }
    return "error";
}

}  // namespace gridga
