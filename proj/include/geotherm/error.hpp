#pragma once

#include <stdexcept>
#include <string>

namespace geotherm {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Expression front-end.
struct SyntaxError : Error {
    SyntaxError(const std::string& what, std::size_t position)
        : Error(what + " (at position " + std::to_string(position) + ")"), pos(position) {}
    std::size_t pos;
};
struct UnknownVariable : Error {
    explicit UnknownVariable(const std::string& name)
        : Error("unknown variable '" + name + "'"), variable(name) {}
    std::string variable;
};

// Evaluation.
struct MissingVariable : Error {
    explicit MissingVariable(const std::string& name)
        : Error("no value supplied for variable '" + name + "'"), variable(name) {}
    std::string variable;
};
struct NonPositiveBase : Error {
    using Error::Error;
};
struct DomainError : Error {
    using Error::Error;
};

// Rational expressions.
struct DivisionByZeroExpression : Error {
    DivisionByZeroExpression() : Error("division by an identically zero expression") {}
};

// Term-count guard; operations fail loudly instead of thrashing.
struct ExpressionBlowup : Error {
    explicit ExpressionBlowup(std::size_t count, std::size_t limit)
        : Error("expression grew to " + std::to_string(count) + " terms (limit " +
                std::to_string(limit) + ")") {}
};

// Geometry.
struct DegenerateMetric : Error {
    using Error::Error;
};
struct StencilOutOfDomain : Error {
    using Error::Error;
};

// Models.
struct InvalidParameter : Error {
    using Error::Error;
};
struct NonPositiveEntropy : Error {
    NonPositiveEntropy() : Error("entropy must be strictly positive") {}
};

// Configuration front end.
struct ConfigError : Error {
    ConfigError(const std::string& key, const std::string& reason)
        : Error("config error at '" + key + "': " + reason), key_path(key) {}
    std::string key_path;
};

}  // namespace geotherm
