#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sqsolve {

/// Rejected input: malformed arguments, non-finite data, out-of-range
/// parameters. The CLI maps this to a usage error.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerically degenerate state, e.g. sampling from a solution whose
/// norm has cancelled to zero.
class DegenerateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Rejection sampling did not accept within its round budget.
class SamplingCapExceeded : public DegenerateError {
public:
    SamplingCapExceeded(std::size_t rounds, double phi)
        : DegenerateError("rejection sampling exceeded " + std::to_string(rounds) +
                          " rounds (phi = " + std::to_string(phi) + ")"),
          rounds_(rounds), phi_(phi) {}

    std::size_t rounds() const noexcept { return rounds_; }
    double phi() const noexcept { return phi_; }

private:
    std::size_t rounds_;
    double phi_;
};

/// File could not be read, written, or parsed.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace sqsolve
