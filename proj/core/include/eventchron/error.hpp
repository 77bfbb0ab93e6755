#ifndef EVENTCHRON_ERROR_HPP
#define EVENTCHRON_ERROR_HPP

#include <stdexcept>
#include <string>

namespace eventchron {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: bad files, unknown labels, violated preconditions.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Conditioning on an event the model assigns probability zero.
class ZeroProbabilityEvidence : public Error {
public:
    using Error::Error;
};

/// A numerical routine did not reach its stopping criterion.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace eventchron

#endif  // EVENTCHRON_ERROR_HPP
