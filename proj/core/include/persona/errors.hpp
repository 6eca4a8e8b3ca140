#pragma once

#include <stdexcept>
#include <string>

namespace persona {

// Malformed input text. Carries the 1-based line and 0-based character
// offset within that line.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, int line, int offset)
        : std::runtime_error("parse error at line " + std::to_string(line) +
                             ", offset " + std::to_string(offset) + ": " + message),
          line_(line),
          offset_(offset) {}

    int line() const { return line_; }
    int offset() const { return offset_; }

private:
    int line_;
    int offset_;
};

// Missing files, degenerate corpora, bad shapes: anything wrong with the
// data rather than with the caller's arguments.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& message) : std::runtime_error(message) {}
};

}  // namespace persona
