#pragma once

#include <stdexcept>
#include <string>

namespace score {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A violated precondition or shape contract (a caller bug).
struct ContractError : Error {
    using Error::Error;
};

/// A malformed or inconsistent input file.
struct DataError : Error {
    using Error::Error;
};

/// A non-finite value where finiteness is guaranteed.
struct NumericError : Error {
    using Error::Error;
};

} // namespace score
