#pragma once

#include <stdexcept>
#include <string>

namespace give {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line = 0)
        : Error(line ? msg + " (line " + std::to_string(line) + ")" : msg), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Input file yielded no usable records at all.
class EmptyGraphError : public Error {
public:
    using Error::Error;
};

// Argument outside its documented domain.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Dataset line violates the item schema.
class SchemaError : public ParseError {
public:
    using ParseError::ParseError;
};

// Remote endpoint unreachable or persistently failing.
class TransportError : public Error {
public:
    using Error::Error;
};

// Stored or returned vectors disagree on dimension.
class IntegrityError : public Error {
public:
    using Error::Error;
};

// Backend text could not be parsed into the expected structure.
// Keeps the raw response for diagnosis.
class ExtractionError : public Error {
public:
    ExtractionError(const std::string& msg, std::string raw)
        : Error(msg), raw_response_(std::move(raw)) {}
    const std::string& raw_response() const { return raw_response_; }

private:
    std::string raw_response_;
};

}  // namespace give
