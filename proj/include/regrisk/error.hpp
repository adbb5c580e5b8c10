#pragma once

#include <stdexcept>
#include <string>

namespace regrisk {

// Bad input or configuration. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical failure (divergent moment, quadrature non-convergence, singular
// matrix...). The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public ConfigError {
public:
    ParseError(const std::string& msg, int line, int column)
        : ConfigError(msg + " (line " + std::to_string(line) + ", column " +
                      std::to_string(column) + ")"),
          line_(line), column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

}  // namespace regrisk
