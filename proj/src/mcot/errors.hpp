#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace mcot {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input text or document. Carries a byte offset when one is known.
class ParseFailure : public Error {
public:
    explicit ParseFailure(const std::string& what, std::optional<std::size_t> byte_offset = std::nullopt)
        : Error(what), byte_offset_(byte_offset) {}
    std::optional<std::size_t> byte_offset() const { return byte_offset_; }

private:
    std::optional<std::size_t> byte_offset_;
};

/// Structurally readable data that breaks a stated invariant. Carries the rule.
class InvariantViolation : public Error {
public:
    InvariantViolation(const std::string& rule, const std::string& detail)
        : Error(rule + ": " + detail), rule_(rule) {}
    const std::string& rule() const { return rule_; }

private:
    std::string rule_;
};

/// Caller broke a precondition (bad argument, inconsistent counts).
class ContractViolation : public Error {
public:
    explicit ContractViolation(const std::string& what) : Error(what) {}
};

class DivisionByZero : public Error {
public:
    explicit DivisionByZero(const std::string& what) : Error(what) {}
};

/// Annotated judging was requested but the data carries no labels.
class MissingAnnotation : public Error {
public:
    explicit MissingAnnotation(const std::string& what) : Error(what) {}
};

class IoFailure : public Error {
public:
    explicit IoFailure(const std::string& what) : Error(what) {}
};

/// Backend call failure. Kinds are distinct so retry policy can discriminate.
class BackendFailure : public Error {
public:
    enum class Kind { timeout, transport, refusal, missing_recording };

    BackendFailure(Kind kind, const std::string& what, bool retryable)
        : Error(what), kind_(kind), retryable_(retryable) {}

    Kind kind() const { return kind_; }
    bool retryable() const { return retryable_; }

private:
    Kind kind_;
    bool retryable_;
};

} // namespace mcot
