#pragma once

#include <stdexcept>
#include <string>

namespace sldf {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class LabelingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class WiringError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RoutingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PatternError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by the engine when credit or buffer accounting breaks. Always fatal.
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace sldf
