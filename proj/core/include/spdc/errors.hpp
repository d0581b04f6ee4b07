#pragma once

#include <stdexcept>
#include <string>

namespace spdc {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A wavelength or frequency lies outside the tabulated/valid range of a material or fiber.
class DomainError : public Error {
public:
    using Error::Error;
};

/// No cut angle in (0, pi/2) phase-matches the requested process.
class InfeasiblePhaseMatching : public Error {
public:
    using Error::Error;
};

/// Caller violated a documented precondition.
class ContractError : public Error {
public:
    using Error::Error;
};

/// Input carries no usable content (all-zero amplitude, empty window, ...).
class DegenerateInput : public Error {
public:
    using Error::Error;
};

/// Non-finite or otherwise corrupt numerical data.
class DataError : public Error {
public:
    using Error::Error;
};

/// Analytic result requested outside its domain of validity.
class NotApplicable : public Error {
public:
    using Error::Error;
};

/// Peaks of a multi-peak model overlap, so the analytic Schmidt structure does not hold.
class NotDisjoint : public NotApplicable {
public:
    using NotApplicable::NotApplicable;
};

/// Configuration rejected before any computation; carries the offending field path.
class ValidationError : public Error {
public:
    ValidationError(std::string path, const std::string& message)
        : Error(path + ": " + message), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace spdc
