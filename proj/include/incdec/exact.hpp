#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace incdec {

using Rational = mpq_class;

/// Shortest decimal text that round-trips to `value`, in plain positional
/// notation (no exponent), e.g. 1e-05 -> "0.00001". Throws on non-finite.
std::string shortest_decimal( double value );

/// Exact rational for the shortest round-trip decimal of `value`. This is the
/// rational the encoder emits for a double, so 0.1 maps to 1/10 rather than
/// to the binary expansion of the nearest double.
Rational to_rational( double value );

/// Parses an unsigned or signed decimal literal ("12", "-0.5", "1.25e-3").
/// Throws ParseError on anything else.
Rational parse_decimal( std::string_view text );

/// Nearest double, ties to even.
double to_double( const Rational &value );

/// SMT-LIB2 literal for `value`: a plain decimal when the denominator is of
/// the form 2^a 5^b, otherwise (/ p q). Negative values become (- c).
std::string smt_literal( const Rational &value );

/// Plain decimal text when the value has a terminating expansion, otherwise
/// "p/q".
std::string to_string( const Rational &value );

} // namespace incdec
