#include "incdec/network.hpp"

#include "incdec/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace incdec {

Dnn::Dnn( std::vector<std::size_t> layer_sizes, const std::vector<std::vector<double>> &weights,
          std::vector<std::vector<double>> biases, std::optional<Normalization> normalization )
    : _sizes( std::move( layer_sizes ) )
    , _biases( std::move( biases ) )
    , _normalization( std::move( normalization ) )
{
    if ( _sizes.size() < 2 )
        throw InvalidArgument( "a network needs an input and an output layer" );
    for ( std::size_t size : _sizes )
        if ( size == 0 )
            throw InvalidArgument( "layer sizes must be at least 1" );
    std::size_t transitions = _sizes.size() - 1;
    if ( weights.size() != transitions || _biases.size() != transitions )
        throw InvalidArgument( "expected " + std::to_string( transitions ) + " weight matrices and bias vectors" );

    _weights.resize( transitions );
    _exact_weights.resize( transitions );
    _exact_biases.resize( transitions );
    for ( std::size_t l = 1; l <= transitions; ++l )
    {
        std::size_t rows = _sizes[l];
        std::size_t cols = _sizes[l - 1];
        const auto &matrix = weights[l - 1];
        if ( matrix.size() != rows * cols )
            throw InvalidArgument( "weight matrix into layer " + std::to_string( l ) + " must have " +
                                   std::to_string( rows ) + "x" + std::to_string( cols ) + " entries" );
        if ( _biases[l - 1].size() != rows )
            throw InvalidArgument( "bias vector of layer " + std::to_string( l ) + " must have " +
                                   std::to_string( rows ) + " entries" );

        auto &packed = _weights[l - 1];
        packed.resize( rows * cols );
        for ( std::size_t r = 0; r < rows; ++r )
            for ( std::size_t c = 0; c < cols; ++c )
                packed[c * rows + r] = matrix[r * cols + c];

        for ( double w : packed )
        {
            if ( !std::isfinite( w ) )
                throw InvalidArgument( "non-finite weight" );
            _exact_weights[l - 1].push_back( to_rational( w ) );
        }
        for ( double b : _biases[l - 1] )
        {
            if ( !std::isfinite( b ) )
                throw InvalidArgument( "non-finite bias" );
            _exact_biases[l - 1].push_back( to_rational( b ) );
        }
    }
}

EvalTrace evaluate( const Dnn &dnn, std::span<const double> input )
{
    if ( input.size() != dnn.input_size() )
        throw InvalidArgument( "input has " + std::to_string( input.size() ) + " entries, network expects " +
                               std::to_string( dnn.input_size() ) );

    const kernels::KernelTable &table = kernels::active();
    EvalTrace trace;
    trace.pre.reserve( dnn.layer_count() );
    trace.post.reserve( dnn.layer_count() );
    trace.pre.emplace_back( input.begin(), input.end() );
    trace.post.emplace_back( input.begin(), input.end() );
    for ( std::size_t l = 1; l < dnn.layer_count(); ++l )
    {
        std::size_t rows = dnn.layer_size( l );
        std::vector<double> pre( rows );
        table.affine( dnn.packed_weights( l ).data(), dnn.biases( l ).data(), trace.post.back().data(),
                      pre.data(), rows, dnn.layer_size( l - 1 ) );
        std::vector<double> post( rows );
        if ( dnn.activation( l ) == Activation::Relu )
            table.relu( pre.data(), post.data(), rows );
        else
            post = pre;
        trace.pre.push_back( std::move( pre ) );
        trace.post.push_back( std::move( post ) );
    }
    return trace;
}

ExactTrace evaluate_exact( const Dnn &dnn, std::span<const Rational> input )
{
    if ( input.size() != dnn.input_size() )
        throw InvalidArgument( "input has " + std::to_string( input.size() ) + " entries, network expects " +
                               std::to_string( dnn.input_size() ) );

    ExactTrace trace;
    trace.pre.emplace_back( input.begin(), input.end() );
    trace.post.emplace_back( input.begin(), input.end() );
    for ( std::size_t l = 1; l < dnn.layer_count(); ++l )
    {
        const auto &previous = trace.post.back();
        std::vector<Rational> pre( dnn.layer_size( l ) );
        std::vector<Rational> post( dnn.layer_size( l ) );
        for ( std::size_t r = 0; r < pre.size(); ++r )
        {
            Rational acc = dnn.exact_bias( l, r );
            for ( std::size_t c = 0; c < previous.size(); ++c )
                acc += dnn.exact_weight( l, r, c ) * previous[c];
            pre[r] = acc;
            post[r] = ( dnn.activation( l ) == Activation::Relu && sgn( acc ) < 0 ) ? Rational( 0 ) : acc;
        }
        trace.pre.push_back( std::move( pre ) );
        trace.post.push_back( std::move( post ) );
    }
    return trace;
}

std::size_t winning_class( std::span<const double> output )
{
    if ( output.empty() )
        throw InvalidArgument( "winning_class of an empty vector" );
    std::size_t best = 0;
    for ( std::size_t i = 1; i < output.size(); ++i )
        if ( output[i] > output[best] )
            best = i;
    return best;
}

Evaluator::Evaluator( const Dnn &dnn, const kernels::KernelTable &table )
    : _dnn( dnn )
    , _table( table )
{
    std::size_t widest = *std::max_element( dnn.layer_sizes().begin(), dnn.layer_sizes().end() );
    _a.resize( widest );
    _b.resize( widest );
}

std::span<const double> Evaluator::output( std::span<const double> input )
{
    if ( input.size() != _dnn.input_size() )
        throw InvalidArgument( "input dimension mismatch" );
    std::copy( input.begin(), input.end(), _a.begin() );
    for ( std::size_t l = 1; l < _dnn.layer_count(); ++l )
    {
        std::size_t rows = _dnn.layer_size( l );
        _table.affine( _dnn.packed_weights( l ).data(), _dnn.biases( l ).data(), _a.data(), _b.data(), rows,
                       _dnn.layer_size( l - 1 ) );
        if ( _dnn.activation( l ) == Activation::Relu )
            _table.relu( _b.data(), _b.data(), rows );
        std::swap( _a, _b );
    }
    return std::span<const double>( _a.data(), _dnn.output_size() );
}

namespace {

struct Line
{
    std::size_t number;
    std::string text;
};

std::vector<double> parse_row( const Line &line )
{
    std::vector<double> values;
    std::stringstream stream( line.text );
    std::string token;
    while ( std::getline( stream, token, ',' ) )
    {
        auto begin = token.find_first_not_of( " \t\r" );
        if ( begin == std::string::npos )
            continue; // trailing comma
        auto end = token.find_last_not_of( " \t\r" );
        std::string field = token.substr( begin, end - begin + 1 );
        char *stop = nullptr;
        double value = std::strtod( field.c_str(), &stop );
        if ( stop == field.c_str() || *stop != '\0' || !std::isfinite( value ) )
            throw ParseError( "non-numeric token '" + field + "'", line.number );
        values.push_back( value );
    }
    return values;
}

std::vector<double> expect_row( const std::vector<Line> &lines, std::size_t &cursor, std::size_t count,
                                const char *what )
{
    if ( cursor >= lines.size() )
        throw ParseError( std::string( "unexpected end of file, expected " ) + what,
                          lines.empty() ? 0 : lines.back().number );
    const Line &line = lines[cursor++];
    std::vector<double> row = parse_row( line );
    if ( row.size() != count )
        throw ParseError( std::string( what ) + ": expected " + std::to_string( count ) + " entries, found " +
                              std::to_string( row.size() ),
                          line.number );
    return row;
}

std::size_t as_count( double value, std::size_t line, const char *what )
{
    if ( value < 1 || value != std::floor( value ) )
        throw ParseError( std::string( "malformed header: " ) + what + " must be a positive integer", line );
    return static_cast<std::size_t>( value );
}

} // namespace

Dnn parse_nnet( std::string_view text )
{
    std::vector<Line> lines;
    {
        std::size_t number = 0;
        std::size_t start = 0;
        while ( start <= text.size() )
        {
            std::size_t end = text.find( '\n', start );
            if ( end == std::string_view::npos )
                end = text.size();
            ++number;
            std::string content( text.substr( start, end - start ) );
            auto first = content.find_first_not_of( " \t\r" );
            if ( first != std::string::npos && content.compare( first, 2, "//" ) != 0 )
                lines.push_back( { number, content } );
            start = end + 1;
        }
    }

    std::size_t cursor = 0;
    if ( lines.empty() )
        throw ParseError( "malformed header: empty document" );

    const Line &header_line = lines[cursor];
    std::vector<double> header = parse_row( lines[cursor++] );
    if ( header.size() != 4 )
        throw ParseError( "malformed header: expected numLayers,inputSize,outputSize,maxLayerSize",
                          header_line.number );
    std::size_t transitions = as_count( header[0], header_line.number, "numLayers" );
    std::size_t input_size = as_count( header[1], header_line.number, "inputSize" );
    std::size_t output_size = as_count( header[2], header_line.number, "outputSize" );

    std::size_t sizes_line = cursor < lines.size() ? lines[cursor].number : header_line.number;
    std::vector<double> raw_sizes = expect_row( lines, cursor, transitions + 1, "layer sizes" );
    std::vector<std::size_t> sizes;
    for ( double s : raw_sizes )
        sizes.push_back( as_count( s, sizes_line, "layer size" ) );
    if ( sizes.front() != input_size || sizes.back() != output_size )
        throw ParseError( "malformed header: layer sizes disagree with inputSize/outputSize", sizes_line );

    if ( cursor >= lines.size() )
        throw ParseError( "unexpected end of file, expected legacy flag line", lines.back().number );
    ++cursor; // legacy symmetric flag

    Normalization normalization;
    normalization.mins = expect_row( lines, cursor, input_size, "input minimums" );
    normalization.maxes = expect_row( lines, cursor, input_size, "input maximums" );
    normalization.means = expect_row( lines, cursor, input_size + 1, "input means" );
    normalization.ranges = expect_row( lines, cursor, input_size + 1, "input ranges" );

    std::vector<std::vector<double>> weights( transitions );
    std::vector<std::vector<double>> biases( transitions );
    for ( std::size_t l = 1; l <= transitions; ++l )
    {
        std::size_t rows = sizes[l];
        std::size_t cols = sizes[l - 1];
        auto &matrix = weights[l - 1];
        matrix.reserve( rows * cols );
        for ( std::size_t r = 0; r < rows; ++r )
        {
            std::vector<double> row = expect_row( lines, cursor, cols, "weight row" );
            matrix.insert( matrix.end(), row.begin(), row.end() );
        }
        for ( std::size_t r = 0; r < rows; ++r )
            biases[l - 1].push_back( expect_row( lines, cursor, 1, "bias" ).front() );
    }
    if ( cursor != lines.size() )
        throw ParseError( "trailing content after the last bias", lines[cursor].number );

    return Dnn( std::move( sizes ), weights, std::move( biases ), std::move( normalization ) );
}

Dnn load_nnet( const std::filesystem::path &path )
{
    std::ifstream in( path );
    if ( !in )
        throw InvalidArgument( "cannot open network file " + path.string() );
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_nnet( buffer.str() );
}

std::string write_nnet( const Dnn &dnn )
{
    std::ostringstream out;
    auto row = [&out] ( const std::vector<double> &values ) {
        for ( double v : values )
            out << shortest_decimal( v ) << ',';
        out << '\n';
    };

    std::size_t widest = *std::max_element( dnn.layer_sizes().begin(), dnn.layer_sizes().end() );
    out << "// Feed-forward ReLU network\n";
    out << dnn.layer_count() - 1 << ',' << dnn.input_size() << ',' << dnn.output_size() << ',' << widest
        << ",\n";
    for ( std::size_t s : dnn.layer_sizes() )
        out << s << ',';
    out << "\n0,\n";

    Normalization norm;
    if ( dnn.normalization() )
        norm = *dnn.normalization();
    else
    {
        norm.mins.assign( dnn.input_size(), -1e9 );
        norm.maxes.assign( dnn.input_size(), 1e9 );
        norm.means.assign( dnn.input_size() + 1, 0.0 );
        norm.ranges.assign( dnn.input_size() + 1, 1.0 );
    }
    row( norm.mins );
    row( norm.maxes );
    row( norm.means );
    row( norm.ranges );

    for ( std::size_t l = 1; l < dnn.layer_count(); ++l )
    {
        for ( std::size_t r = 0; r < dnn.layer_size( l ); ++r )
        {
            std::vector<double> weights;
            for ( std::size_t c = 0; c < dnn.layer_size( l - 1 ); ++c )
                weights.push_back( dnn.weight( l, r, c ) );
            row( weights );
        }
        for ( std::size_t r = 0; r < dnn.layer_size( l ); ++r )
            row( { dnn.bias( l, r ) } );
    }
    return out.str();
}

} // namespace incdec
