#pragma once

#include <stdexcept>
#include <string>

namespace continuum {

class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InvalidState : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Malformed document. `path` is a JSON-pointer-like location such as
// "/nodes/3/geometry/size".
class ParseError : public std::runtime_error {
public:
    ParseError(std::string path, const std::string& message)
        : std::runtime_error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

// Well-formed document that violates a semantic invariant.
class ValidationError : public ParseError {
public:
    using ParseError::ParseError;
};

} // namespace continuum
