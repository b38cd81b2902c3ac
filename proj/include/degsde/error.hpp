#pragma once

#include <stdexcept>
#include <string>

namespace degsde {

// Every failure raised by the library derives from Error, so callers that only
// care about "did it work" can catch one type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class InvalidModulus : public Error {
public:
    using Error::Error;
};

/// A structural assumption on the linear part (H1..H4 in the model report) does
/// not hold. `label()` names the assumption so front ends can cite it.
class HypothesisViolation : public Error {
public:
    HypothesisViolation(std::string label, const std::string& what)
        : Error("(" + label + ") " + what), label_(std::move(label)) {}
    const std::string& label() const noexcept { return label_; }

private:
    std::string label_;
};

/// The requested method cannot handle this input (dimension too large for
/// tensor quadrature, non-spectral model where a spectral one is required, ...).
class CapabilityError : public Error {
public:
    using Error::Error;
};

class SingularGramian : public Error {
public:
    SingularGramian(double condition, const std::string& what)
        : Error(what), condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

class NotInvertible : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class LambdaTooSmall : public Error {
public:
    LambdaTooSmall(double lambda, const std::string& what)
        : Error(what), suggested_(2.0 * lambda) {}
    double suggested_lambda() const noexcept { return suggested_; }

private:
    double suggested_;
};

class CoverageError : public Error {
public:
    CoverageError(double time, const std::string& what) : Error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace degsde
