#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace fsvm {

enum class ErrorKind {
    structural,          // mismatched grids, wrong lengths
    data,                // non-finite values, degenerate functions
    configuration,       // invalid parameters or infeasible settings
    degenerate_training, // single-class training set
    convergence,         // solver iteration cap reached
    parse,               // malformed input files
    integrity,           // corrupted or truncated model files
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message,
          std::optional<std::size_t> index = std::nullopt)
        : std::runtime_error(message), kind_(kind), index_(index) {}

    ErrorKind kind() const noexcept { return kind_; }

    /// Index of the offending input when the error arose in a batch operation.
    std::optional<std::size_t> index() const noexcept { return index_; }

private:
    ErrorKind kind_;
    std::optional<std::size_t> index_;
};

/// Re-throws `e` annotated with a batch index, preserving its kind.
[[noreturn]] void rethrow_with_index(const Error& e, std::size_t index);

} // namespace fsvm
