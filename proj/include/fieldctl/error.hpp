#pragma once

#include <stdexcept>
#include <string>

namespace fieldctl {

// Every failure the library reports derives from Error; the CLI maps the
// concrete kind onto its exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GeometryError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace fieldctl
