#pragma once

#include <stdexcept>
#include <string>

namespace srd {

enum class ErrorKind {
    ConstraintViolation,
    DomainError,
    LinearSolveFailure,
    IterateBelowFloor,
    ParseError,
    SimulationFailed,
    IoError,
};

/// Base of every exception thrown by the library. The kind is what the C
/// layer maps onto status codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ConstraintViolation : Error {
    explicit ConstraintViolation(const std::string& what) : Error(ErrorKind::ConstraintViolation, what) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error(ErrorKind::DomainError, what) {}
};

struct LinearSolveFailure : Error {
    explicit LinearSolveFailure(const std::string& what) : Error(ErrorKind::LinearSolveFailure, what) {}
};

struct IterateBelowFloor : Error {
    explicit IterateBelowFloor(const std::string& what) : Error(ErrorKind::IterateBelowFloor, what) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& what) : Error(ErrorKind::ParseError, what) {}
};

struct SimulationFailed : Error {
    explicit SimulationFailed(const std::string& what) : Error(ErrorKind::SimulationFailed, what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error(ErrorKind::IoError, what) {}
};

}  // namespace srd
