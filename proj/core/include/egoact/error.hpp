#pragma once

#include <stdexcept>
#include <string>

namespace egoact {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller supplied data or configuration that violates a contract.
// The CLI maps this to exit code 2.
class InvalidInput : public Error {
public:
    using Error::Error;
};

} // namespace egoact
