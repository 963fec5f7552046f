#pragma once

#include <stdexcept>
#include <string>

namespace incdec {

/// Malformed input text (NNet, VNN-LIB, solver answers). Carries the
/// 1-based line number when the source is line-oriented, 0 otherwise.
class ParseError : public std::runtime_error
{
public:
    ParseError( const std::string &message, std::size_t line = 0 )
        : std::runtime_error( line ? "line " + std::to_string( line ) + ": " + message : message )
        , _line( line )
    {
    }

    std::size_t line() const { return _line; }

private:
    std::size_t _line;
};

/// A structurally valid input that violates a semantic precondition
/// (dimension mismatch, empty box, index out of range).
class InvalidArgument : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// The external solver misbehaved: spawn failure, garbage on stdout, or a
/// model that fails the internal re-check.
class SolverProcessError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace incdec
