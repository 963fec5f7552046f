#include "incdec/exact.hpp"

#include "incdec/error.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <system_error>

namespace incdec {

namespace {

mpz_class pow10( unsigned long exponent )
{
    mpz_class result;
    mpz_ui_pow_ui( result.get_mpz_t(), 10, exponent );
    return result;
}

// Splits a shortest scientific rendering "d.ddde±x" into its digit string and
// the decimal exponent of the first digit.
void split_scientific( std::string_view text, std::string &digits, long &exponent )
{
    auto e = text.find( 'e' );
    std::string_view mantissa = text.substr( 0, e );
    exponent = std::strtol( std::string( text.substr( e + 1 ) ).c_str(), nullptr, 10 );
    digits.clear();
    for ( char c : mantissa )
        if ( c != '.' )
            digits.push_back( c );
    while ( digits.size() > 1 && digits.back() == '0' )
        digits.pop_back();
}

} // namespace

std::string shortest_decimal( double value )
{
    if ( !std::isfinite( value ) )
        throw InvalidArgument( "non-finite value has no decimal form" );
    if ( value == 0.0 )
        return "0";

    char buffer[64];
    auto [end, ec] = std::to_chars( buffer, buffer + sizeof( buffer ), std::fabs( value ),
                                    std::chars_format::scientific );
    if ( ec != std::errc() )
        throw std::runtime_error( "to_chars failed" );

    std::string digits;
    long exponent = 0;
    split_scientific( std::string_view( buffer, end - buffer ), digits, exponent );

    std::string out = value < 0 ? "-" : "";
    long point = exponent + 1; // digits before the decimal point
    if ( point <= 0 )
    {
        out += "0.";
        out.append( static_cast<std::size_t>( -point ), '0' );
        out += digits;
    }
    else if ( point >= static_cast<long>( digits.size() ) )
    {
        out += digits;
        out.append( static_cast<std::size_t>( point ) - digits.size(), '0' );
    }
    else
    {
        out += digits.substr( 0, point );
        out += '.';
        out += digits.substr( point );
    }
    return out;
}

Rational to_rational( double value )
{
    return parse_decimal( shortest_decimal( value ) );
}

Rational parse_decimal( std::string_view text )
{
    std::size_t pos = 0;
    bool negative = false;
    if ( pos < text.size() && ( text[pos] == '-' || text[pos] == '+' ) )
    {
        negative = text[pos] == '-';
        ++pos;
    }

    std::string digits;
    long fraction_digits = 0;
    bool seen_point = false;
    bool seen_digit = false;
    for ( ; pos < text.size(); ++pos )
    {
        char c = text[pos];
        if ( c >= '0' && c <= '9' )
        {
            digits.push_back( c );
            seen_digit = true;
            if ( seen_point )
                ++fraction_digits;
        }
        else if ( c == '.' && !seen_point )
            seen_point = true;
        else
            break;
    }
    if ( !seen_digit )
        throw ParseError( "not a decimal literal: '" + std::string( text ) + "'" );

    long exponent = 0;
    if ( pos < text.size() && ( text[pos] == 'e' || text[pos] == 'E' ) )
    {
        ++pos;
        std::string exp_text( text.substr( pos ) );
        char *end = nullptr;
        exponent = std::strtol( exp_text.c_str(), &end, 10 );
        if ( end == exp_text.c_str() || *end != '\0' )
            throw ParseError( "bad exponent in decimal literal: '" + std::string( text ) + "'" );
        pos = text.size();
    }
    if ( pos != text.size() )
        throw ParseError( "not a decimal literal: '" + std::string( text ) + "'" );

    mpz_class numerator( digits, 10 );
    long scale = exponent - fraction_digits;
    Rational result;
    if ( scale >= 0 )
        result = Rational( numerator * pow10( static_cast<unsigned long>( scale ) ) );
    else
        result = Rational( numerator, pow10( static_cast<unsigned long>( -scale ) ) );
    result.canonicalize();
    return negative ? Rational( -result ) : result;
}

double to_double( const Rational &value )
{
    // mpq_get_d truncates toward zero; step one ulp away from zero when the
    // neighbour is closer (ties go to the even mantissa).
    double truncated = value.get_d();
    if ( sgn( value ) == 0 || std::isinf( truncated ) )
        return truncated;
    double away = std::nextafter( truncated, sgn( value ) > 0 ? HUGE_VAL : -HUGE_VAL );
    if ( std::isinf( away ) )
        return truncated;

    Rational low_gap = abs( value - Rational( truncated ) );
    Rational high_gap = abs( Rational( away ) - value );
    if ( low_gap < high_gap )
        return truncated;
    if ( high_gap < low_gap )
        return away;
    return ( std::bit_cast<std::uint64_t>( truncated ) & 1u ) == 0 ? truncated : away;
}

namespace {

// Returns true and sets `decimal_places` when the canonical denominator has
// only factors 2 and 5.
bool terminating( const mpz_class &denominator, unsigned long &decimal_places )
{
    mpz_class rest = denominator;
    unsigned long twos = mpz_remove( rest.get_mpz_t(), rest.get_mpz_t(), mpz_class( 2 ).get_mpz_t() );
    unsigned long fives = mpz_remove( rest.get_mpz_t(), rest.get_mpz_t(), mpz_class( 5 ).get_mpz_t() );
    decimal_places = std::max( twos, fives );
    return rest == 1;
}

std::string positional( const Rational &magnitude, unsigned long places )
{
    mpz_class scaled = magnitude.get_num() * pow10( places ) / magnitude.get_den();
    std::string digits = scaled.get_str();
    if ( places == 0 )
        return digits + ".0";
    if ( digits.size() <= places )
        digits.insert( 0, places - digits.size() + 1, '0' );
    digits.insert( digits.size() - places, "." );
    return digits;
}

} // namespace

std::string smt_literal( const Rational &value )
{
    Rational magnitude = abs( value );
    unsigned long places = 0;
    std::string body;
    if ( terminating( magnitude.get_den(), places ) )
        body = positional( magnitude, places );
    else
        body = "(/ " + magnitude.get_num().get_str() + ".0 " + magnitude.get_den().get_str() + ".0)";
    return sgn( value ) < 0 ? "(- " + body + ")" : body;
}

std::string to_string( const Rational &value )
{
    Rational magnitude = abs( value );
    unsigned long places = 0;
    std::string body;
    if ( terminating( magnitude.get_den(), places ) )
    {
        body = positional( magnitude, places );
        if ( places == 0 )
            body.resize( body.size() - 2 );
    }
    else
        body = magnitude.get_str();
    return sgn( value ) < 0 ? "-" + body : body;
}

} // namespace incdec
