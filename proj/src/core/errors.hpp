#pragma once

#include <stdexcept>
#include <string>

namespace bvoc {

// Error taxonomy shared by the whole library. Each type maps 1:1 to a
// status code at the C boundary (see include/bvocsr.h).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : Error {
    using Error::Error;
};
struct FormatError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};
struct ShapeError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct StateError : Error {
    using Error::Error;
};
struct InsufficientDataError : Error {
    using Error::Error;
};
struct DegenerateInputError : Error {
    using Error::Error;
};
struct DegenerateSplitError : Error {
    using Error::Error;
};
struct NumericsError : Error {
    using Error::Error;
};

} // namespace bvoc
