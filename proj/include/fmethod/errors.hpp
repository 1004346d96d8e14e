#pragma once

#include <stdexcept>
#include <string>

namespace fmethod {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad parameters, bad files, bad flag combinations.  CLI exit code 1.
struct ConfigError : Error {
    using Error::Error;
};

// Parse failure in a structured text document; carries the offending
// line (1-based) and field name.
struct ParseError : ConfigError {
    ParseError(const std::string& what, int line_, std::string field_)
        : ConfigError(what + " (line " + std::to_string(line_) + ", field '" + field_ + "')"),
          line(line_),
          field(std::move(field_)) {}
    int line;
    std::string field;
};

// A configured resource budget was exhausted (factoring, candidate caps,
// summation ranges).
struct BudgetError : Error {
    using Error::Error;
};

// Strict-policy synthesis found an interval with no admissible prime.
// CLI exit code 2.
struct SynthesisError : Error {
    SynthesisError(const std::string& what, unsigned long n_) : Error(what), n(n_) {}
    unsigned long n;
};

}  // namespace fmethod
