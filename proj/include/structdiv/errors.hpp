#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace structdiv {

// Base class for all toolkit errors. CLI maps these to exit code 1.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// count_supports pre-flight estimate exceeded the enumeration budget.
class BudgetExceededError : public Error {
public:
    BudgetExceededError(const std::string& msg, std::uint64_t estimated)
        : Error(msg), estimated_combos(estimated) {}
    std::uint64_t estimated_combos;
};

class EmptySetError : public Error {
public:
    using Error::Error;
};

// Pairwise metric requested on a pair domain with fewer than 2 combos.
class PairDomainError : public Error {
public:
    using Error::Error;
};

class PairBudgetError : public Error {
public:
    PairBudgetError(const std::string& msg, std::uint64_t required)
        : Error(msg), required_pairs(required) {}
    std::uint64_t required_pairs;
};

class DimensionMismatchError : public Error {
public:
    using Error::Error;
};

class GatewayError : public Error {
public:
    using Error::Error;
};

class AuthError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class RetriesExhaustedError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class MalformedResponseError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

// Stub table has no entry for a request.
class StubMissError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class TemplateError : public Error {
public:
    using Error::Error;
};

class DegenerateInputError : public Error {
public:
    using Error::Error;
};

class SchemaMismatchError : public Error {
public:
    using Error::Error;
};

}  // namespace structdiv
