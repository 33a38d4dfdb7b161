#pragma once

#include <stdexcept>
#include <string>

namespace dmad {

// Base for every error raised on bad user input or bad data. The CLI maps
// these to exit code 1; anything else escaping a command is exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace dmad
