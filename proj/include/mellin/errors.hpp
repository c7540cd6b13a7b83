#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace mellin {

// Base for all library errors; carries a stable machine-readable code.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

// Mathematically invalid input or unsupported domain; the CLI maps these to exit code 1.
class DomainError : public Error {
public:
    using Error::Error;
};

// Malformed textual input; the CLI maps these to exit code 2.
class ParseError : public Error {
public:
    ParseError(std::string code, const std::string& what, std::size_t position)
        : Error(std::move(code), what + " (at position " + std::to_string(position) + ")"),
          position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

#define MELLIN_DOMAIN_ERROR(NAME)                                        \
    class NAME : public DomainError {                                    \
    public:                                                              \
        explicit NAME(const std::string& what) : DomainError(#NAME, what) {} \
    }

MELLIN_DOMAIN_ERROR(NoExactRoot);
MELLIN_DOMAIN_ERROR(ZeroRoot);
MELLIN_DOMAIN_ERROR(VarMismatch);
MELLIN_DOMAIN_ERROR(ZeroLeading);
MELLIN_DOMAIN_ERROR(ZeroOrder);
MELLIN_DOMAIN_ERROR(DivergentComposition);
MELLIN_DOMAIN_ERROR(RamMismatch);
MELLIN_DOMAIN_ERROR(KindMismatch);
MELLIN_DOMAIN_ERROR(HorizontalSection);
MELLIN_DOMAIN_ERROR(SlopeNotPositive);
MELLIN_DOMAIN_ERROR(OrderNotPositive);
MELLIN_DOMAIN_ERROR(DomainMismatch);
MELLIN_DOMAIN_ERROR(SingularLeading);
MELLIN_DOMAIN_ERROR(HypothesisViolated);
// Input series does not carry enough certified terms to decide the canonical window.
MELLIN_DOMAIN_ERROR(InsufficientTruncation);

#undef MELLIN_DOMAIN_ERROR

class SyntaxError : public ParseError {
public:
    SyntaxError(const std::string& what, std::size_t position)
        : ParseError("SyntaxError", what, position) {}
};

class MixedVariables : public ParseError {
public:
    MixedVariables(const std::string& what, std::size_t position)
        : ParseError("MixedVariables", what, position) {}
};

}  // namespace mellin
