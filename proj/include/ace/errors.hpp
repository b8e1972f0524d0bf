#pragma once

#include <stdexcept>
#include <string>

namespace ace {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input shape disagrees with what the callee was built for.
struct DimensionError : Error {
    using Error::Error;
};

// Kernel matrix not positive definite even after jitter escalation.
struct FactorizationError : Error {
    using Error::Error;
};

// Malformed model output or file content.
struct ParseError : Error {
    using Error::Error;
};

// Well-formed content that violates a pipeline contract (counts, duplicates,
// missing fields).
struct ValidationError : Error {
    using Error::Error;
};

// Key not present in a table or fixture.
struct LookupError : Error {
    using Error::Error;
};

struct HttpError : Error {
    HttpError(int status, const std::string& what) : Error(what), status(status) {}
    int status;
};

// Bad flags, missing environment, unusable configuration.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace ace
