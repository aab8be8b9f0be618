#pragma once

#include <stdexcept>
#include <string>

namespace reflecta {

/// Raised when an input violates a documented precondition of an operation:
/// malformed data, dependent generators where independence is required,
/// out-of-range parameters, and so on.  The `code` is a stable,
/// machine-readable identifier; `what()` carries the human-readable detail.
class validation_error : public std::runtime_error {
public:
    validation_error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// Raised when an exhaustive computation would exceed its configured size
/// budget.  Callers that can degrade gracefully catch this and report an
/// "undecided" verdict instead of an answer.
class budget_error : public std::runtime_error {
public:
    explicit budget_error(const std::string& message)
        : std::runtime_error(message) {}
};

}  // namespace reflecta
