#pragma once

#include "incdec/exact.hpp"
#include "incdec/labeling.hpp"
#include "incdec/network.hpp"
#include "incdec/property.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace incdec::test {

inline Dnn fig1()
{
    return Dnn( { 4, 4, 2 },
                { { 1, -2.5, 0, 1, 2, -1, 0, -1, 2, 0, -1, 2, 0, 1, 2, -1 }, { 2, -1, 2, -1, -1, 1, -1, 1 } },
                { { 0, 0, 0, 0 }, { 0, 0 } } );
}

inline const std::vector<double> fig1_x = { 0.6, -1.9, -0.7, -1 };

inline std::filesystem::path data_dir()
{
    return INCDEC_TEST_DATA;
}

inline bool have_z3()
{
    return std::system( "z3 -version > /dev/null 2>&1" ) == 0;
}

/// Fresh directory under the system temp dir, removed by the destructor.
class TempDir
{
public:
    TempDir()
    {
        std::random_device rd;
        _path = std::filesystem::temp_directory_path() / ( "incdec-test-" + std::to_string( rd() ) );
        std::filesystem::create_directories( _path );
    }
    ~TempDir() { std::filesystem::remove_all( _path ); }
    TempDir( const TempDir & ) = delete;
    TempDir &operator=( const TempDir & ) = delete;

    const std::filesystem::path &path() const { return _path; }
    std::filesystem::path operator/( const std::string &name ) const { return _path / name; }

private:
    std::filesystem::path _path;
};

/// Weights on a 1/8 grid in [-2, 2] (about one in six zero), biases on a 1/8
/// grid in [-1, 1]; short decimals keep solver queries small and exact.
inline Dnn random_network( std::mt19937_64 &rng, const std::vector<std::size_t> &sizes )
{
    std::uniform_int_distribution<int> weight( -16, 16 );
    std::uniform_int_distribution<int> bias( -8, 8 );
    std::bernoulli_distribution zero( 1.0 / 6.0 );
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
    for ( std::size_t l = 1; l < sizes.size(); ++l )
    {
        std::vector<double> w( sizes[l] * sizes[l - 1] );
        for ( auto &v : w )
            v = zero( rng ) ? 0.0 : weight( rng ) / 8.0;
        std::vector<double> b( sizes[l] );
        for ( auto &v : b )
            v = bias( rng ) / 8.0;
        weights.push_back( std::move( w ) );
        biases.push_back( std::move( b ) );
    }
    return Dnn( sizes, weights, biases );
}

/// Random layer sizes: `inputs` inputs, 2-3 hidden layers of 2..max_width,
/// `outputs` outputs.
inline std::vector<std::size_t> random_sizes( std::mt19937_64 &rng, std::size_t inputs, std::size_t outputs,
                                              std::size_t max_width )
{
    std::uniform_int_distribution<std::size_t> depth( 2, 3 );
    std::uniform_int_distribution<std::size_t> width( 2, max_width );
    std::vector<std::size_t> sizes = { inputs };
    std::size_t hidden = depth( rng );
    for ( std::size_t h = 0; h < hidden; ++h )
        sizes.push_back( width( rng ) );
    sizes.push_back( outputs );
    return sizes;
}

/// Random box on a 1/16 grid inside [-1, 1]^n, each side between 1/16 and
/// max_width / 16 wide.
inline InputRegion random_box( std::mt19937_64 &rng, std::size_t n, int max_width = 8 )
{
    std::uniform_int_distribution<int> width( 1, max_width );
    InputRegion region;
    for ( std::size_t i = 0; i < n; ++i )
    {
        int w = width( rng );
        int l = std::uniform_int_distribution<int>( -16, 16 - w )( rng );
        region.lower.push_back( l / 16.0 );
        region.upper.push_back( ( l + w ) / 16.0 );
    }
    return region;
}

/// Class-change condition at the box center: some other output reaches the
/// center's winning output.
inline Property class_change_property( const Dnn &dnn, const InputRegion &region, std::size_t target_offset )
{
    std::vector<double> center;
    for ( std::size_t i = 0; i < region.size(); ++i )
        center.push_back( ( region.lower[i] + region.upper[i] ) / 2 );
    std::size_t original = winning_class( evaluate( dnn, center ).output() );
    std::size_t n = dnn.output_size();
    std::size_t target = ( original + 1 + target_offset % ( n - 1 ) ) % n;
    OutputAtom atom{ { { original, -1.0 }, { target, 1.0 } }, Relation::GreaterEqual, 0.0 };
    std::sort( atom.terms.begin(), atom.terms.end() );
    Property property;
    property.region = region;
    property.output_count = n;
    property.condition.disjuncts = { { atom } };
    return property;
}

/// Independent labeling: each neuron records whether raising it can help
/// (up) or hurt (down) the seeded outputs, computed by recursion over paths.
inline LabelMap reference_labels( const Dnn &dnn, const std::vector<Label> &seed )
{
    struct Effect
    {
        bool up = false;
        bool down = false;
    };
    std::size_t y = dnn.output_layer();
    std::vector<std::vector<Effect>> effect( dnn.layer_count() );
    for ( std::size_t j = 0; j < dnn.output_size(); ++j )
    {
        Label s = seed[j];
        effect[y].push_back( { s == Label::Inc || s == Label::Mixed, s == Label::Dec || s == Label::Mixed } );
    }
    for ( std::size_t l = y; l-- > 0; )
    {
        effect[l].resize( dnn.layer_size( l ) );
        for ( std::size_t s = 0; s < dnn.layer_size( l ); ++s )
            for ( std::size_t t = 0; t < dnn.layer_size( l + 1 ); ++t )
            {
                double w = dnn.weight( l + 1, t, s );
                const Effect &e = effect[l + 1][t];
                if ( w > 0 )
                {
                    effect[l][s].up |= e.up;
                    effect[l][s].down |= e.down;
                }
                else if ( w < 0 )
                {
                    effect[l][s].up |= e.down;
                    effect[l][s].down |= e.up;
                }
            }
    }
    LabelMap map;
    for ( const auto &layer : effect )
    {
        std::vector<Label> labels;
        for ( const auto &e : layer )
            labels.push_back( e.up && e.down ? Label::Mixed : e.up ? Label::Inc : e.down ? Label::Dec : Label::Inert );
        map.layers.push_back( labels );
    }
    return map;
}

/// Brute-force optimum of the layer-1 objective over the free box: the
/// objective is affine in the inputs there, so some vertex attains it.
struct VertexOptimum
{
    Rational value;
    std::vector<std::vector<Rational>> maximizers; // free-input values per optimal vertex
};

inline VertexOptimum first_layer_optimum( const Dnn &dnn, const LabelMap &labels, const InputRegion &region,
                                          const std::vector<std::optional<double>> &pinned )
{
    std::vector<std::size_t> free;
    for ( std::size_t i = 0; i < pinned.size(); ++i )
        if ( !pinned[i] )
            free.push_back( i );
    VertexOptimum best;
    bool first = true;
    for ( std::size_t mask = 0; mask < ( std::size_t( 1 ) << free.size() ); ++mask )
    {
        std::vector<Rational> x( pinned.size() );
        std::vector<Rational> chosen;
        for ( std::size_t i = 0; i < pinned.size(); ++i )
            if ( pinned[i] )
                x[i] = to_rational( *pinned[i] );
        for ( std::size_t k = 0; k < free.size(); ++k )
        {
            x[free[k]] = to_rational( ( mask >> k ) & 1 ? region.upper[free[k]] : region.lower[free[k]] );
            chosen.push_back( x[free[k]] );
        }
        Rational q = 0;
        for ( std::size_t j = 0; j < dnn.layer_size( 1 ); ++j )
        {
            Label label = labels.at( 1, j );
            if ( label != Label::Inc && label != Label::Dec )
                continue;
            Rational z = to_rational( dnn.bias( 1, j ) );
            for ( std::size_t i = 0; i < x.size(); ++i )
                z += to_rational( dnn.weight( 1, j, i ) ) * x[i];
            q += label == Label::Inc ? z : Rational( -z );
        }
        if ( first || q > best.value )
        {
            best.value = q;
            best.maximizers = { chosen };
            first = false;
        }
        else if ( q == best.value )
            best.maximizers.push_back( chosen );
    }
    return best;
}

} // namespace incdec::test
