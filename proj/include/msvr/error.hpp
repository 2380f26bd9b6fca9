#pragma once

#include <stdexcept>
#include <string>

namespace msvr {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad shapes, empty data, out-of-range parameters.
class InputError : public Error {
public:
    using Error::Error;
};

// Non-finite values produced or consumed by a numeric routine.
class NumericError : public Error {
public:
    using Error::Error;
};

// Linear system could not be solved even after regularization.
class SolverError : public Error {
public:
    using Error::Error;
};

class SimulatorError : public Error {
public:
    using Error::Error;
};

class PreprocessingError : public Error {
public:
    using Error::Error;
};

// Tukey HSD requested although the ANOVA gate did not reject.
class PostHocGateError : public Error {
public:
    using Error::Error;
};

} // namespace msvr
