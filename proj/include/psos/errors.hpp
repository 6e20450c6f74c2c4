#pragma once

#include <stdexcept>
#include <string>

namespace psos {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Array lengths or sizes disagree with the model.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Input does not have the shape an operation requires (non-grid, bad covering, ...).
class StructureError : public Error {
public:
    using Error::Error;
};

// Requested problem exceeds a hard enumeration limit.
class LimitError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, int line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

class DivergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace psos
