#pragma once

#include <stdexcept>
#include <string>

namespace autofill_sim {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Structural problems in an input file (scene, association file, golden).
class SchemaError : public Error {
public:
    using Error::Error;
};

// A value violates a documented type invariant (bad fingerprint, bad label...).
class InvariantError : public Error {
public:
    using Error::Error;
};

// A reference points at something the scene does not contain.
class ReferenceError : public Error {
public:
    using Error::Error;
};

class EmptyLabelError : public Error {
public:
    using Error::Error;
};

// Markup errors carry the position that broke the parser.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line, int column)
        : Error(msg + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
          line_(line),
          column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_ = 0;
    int column_ = 0;
};

class UnsupportedTagError : public ParseError {
public:
    using ParseError::ParseError;
};

class BadFingerprintError : public InvariantError {
public:
    using InvariantError::InvariantError;
};

class BadFormIndexError : public Error {
public:
    using Error::Error;
};

class MissingSubstitutionError : public Error {
public:
    using Error::Error;
};

class UnsupportedContextError : public Error {
public:
    using Error::Error;
};

class GateBypassError : public Error {
public:
    using Error::Error;
};

class UnsquattableSchemeError : public Error {
public:
    using Error::Error;
};

class FixtureMissingError : public Error {
public:
    using Error::Error;
};

class GoldenParseError : public Error {
public:
    using Error::Error;
};

}  // namespace autofill_sim
