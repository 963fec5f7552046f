#include "incdec/labeling.hpp"
#include "incdec/solver.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace incdec;

namespace {

const std::vector<Label> fig1_seed = { Label::Dec, Label::Inc };

OutputSeed seed_of( std::vector<Label> labels )
{
    return OutputSeed{ std::move( labels ), 0 };
}

std::vector<Label> random_seed( std::mt19937_64 &rng, std::size_t n, bool allow_mixed )
{
    std::uniform_int_distribution<int> pick( 0, allow_mixed ? 3 : 2 );
    std::vector<Label> seed;
    for ( std::size_t j = 0; j < n; ++j )
    {
        int v = pick( rng );
        seed.push_back( v == 0 ? Label::Inc : v == 1 ? Label::Dec : v == 2 ? Label::Inert : Label::Mixed );
    }
    return seed;
}

} // namespace

TEST( Labeling, WorkedExample )
{
    LabelMap map = propagate_labels( test::fig1(), seed_of( fig1_seed ) );
    ASSERT_EQ( map.layers.size(), 3u );
    EXPECT_EQ( map.layers[2], fig1_seed );
    EXPECT_EQ( map.layers[1], ( std::vector<Label>{ Label::Dec, Label::Inc, Label::Dec, Label::Inc } ) );
    EXPECT_EQ( map.layers[0], ( std::vector<Label>{ Label::Mixed, Label::Mixed, Label::Inc, Label::Dec } ) );

    InputPartition partition = partition_inputs( map );
    EXPECT_EQ( partition.labeled, ( std::vector<std::size_t>{ 2, 3 } ) );
    EXPECT_EQ( partition.mixed, ( std::vector<std::size_t>{ 0, 1 } ) );
}

TEST( Labeling, PinsOfWorkedExample )
{
    LabelMap map = propagate_labels( test::fig1(), seed_of( fig1_seed ) );
    Property p = robustness_query( test::fig1_x, 0.5, 0, 1, 2 );
    PartialAssignment a = fix_labeled_inputs( p.region, map, test::fig1_x );
    EXPECT_FALSE( a.pinned[0] );
    EXPECT_FALSE( a.pinned[1] );
    EXPECT_EQ( *a.pinned[2], -0.2 );
    EXPECT_EQ( *a.pinned[3], -1.5 );
    EXPECT_EQ( a.free_inputs(), ( std::vector<std::size_t>{ 0, 1 } ) );

    Property point = robustness_query( test::fig1_x, 0.0, 0, 1, 2 );
    PartialAssignment b = fix_labeled_inputs( point.region, map, test::fig1_x );
    EXPECT_EQ( *b.pinned[2], -0.7 );
    EXPECT_EQ( *b.pinned[3], -1.0 );
}

TEST( Labeling, AsymmetricBoxWithoutCenter )
{
    Dnn dnn( { 3, 1 }, { { 1.0, -1.0, 0.0 } }, { { 0.0 } } );
    LabelMap map = propagate_labels( dnn, seed_of( { Label::Inc } ) );
    EXPECT_EQ( map.inputs(), ( std::vector<Label>{ Label::Inc, Label::Dec, Label::Inert } ) );
    InputRegion region{ { -1.0, 0.25, 2.0 }, { 3.0, 0.5, 4.0 } };
    PartialAssignment a = fix_labeled_inputs( region, map );
    EXPECT_EQ( *a.pinned[0], 3.0 );
    EXPECT_EQ( *a.pinned[1], 0.25 );
    EXPECT_EQ( *a.pinned[2], 3.0 ); // midpoint
    EXPECT_TRUE( a.free_inputs().empty() );
}

TEST( Labeling, PositiveChainIsAllInc )
{
    Dnn chain( { 1, 1, 1, 1 }, { { 2.0 }, { 0.5 }, { 3.0 } }, { { 0.0 }, { -1.0 }, { 1.0 } } );
    LabelMap map = propagate_labels( chain, seed_of( { Label::Inc } ) );
    for ( const auto &layer : map.layers )
        EXPECT_EQ( layer, std::vector<Label>{ Label::Inc } );
}

TEST( Labeling, NegatedLayerFlipsUpstream )
{
    std::mt19937_64 rng( 17 );
    std::uniform_int_distribution<int> magnitude( 1, 8 );
    auto positive = [&] ( std::size_t n ) {
        std::vector<double> w( n );
        for ( auto &v : w )
            v = magnitude( rng ) / 4.0;
        return w;
    };
    std::vector<std::size_t> sizes = { 3, 4, 3, 2 };
    std::vector<std::vector<double>> weights = { positive( 12 ), positive( 12 ), positive( 6 ) };
    std::vector<std::vector<double>> biases = { { 0, 0, 0, 0 }, { 0, 0, 0 }, { 0, 0 } };
    Dnn base( sizes, weights, biases );
    LabelMap before = propagate_labels( base, seed_of( { Label::Inc, Label::Inert } ) );
    for ( const auto &layer : before.layers )
        for ( std::size_t j = 0; j < layer.size(); ++j )
            if ( &layer != &before.layers.back() || j == 0 )
            {
                EXPECT_EQ( layer[j], Label::Inc );
            }

    auto flipped_weights = weights;
    for ( auto &w : flipped_weights[1] )
        w = -w;
    Dnn flipped( sizes, flipped_weights, biases );
    LabelMap after = propagate_labels( flipped, seed_of( { Label::Inc, Label::Inert } ) );
    EXPECT_EQ( after.layers[3], before.layers[3] );
    EXPECT_EQ( after.layers[2], before.layers[2] );
    EXPECT_EQ( after.layers[1], std::vector<Label>( 4, Label::Dec ) );
    EXPECT_EQ( after.layers[0], std::vector<Label>( 3, Label::Dec ) );
    EXPECT_EQ( after, test::reference_labels( flipped, { Label::Inc, Label::Inert } ) );
}

TEST( Labeling, AgreesWithReferenceAndIsLocallyConsistent )
{
    std::mt19937_64 rng( 23 );
    for ( int trial = 0; trial < 300; ++trial )
    {
        Dnn dnn = test::random_network( rng, test::random_sizes( rng, 4, 3, 6 ) );
        std::vector<Label> seed = random_seed( rng, 3, true );
        LabelMap map = propagate_labels( dnn, seed_of( seed ) );
        ASSERT_EQ( map, test::reference_labels( dnn, seed ) );
        EXPECT_EQ( map.layers.back(), seed );
        for ( std::size_t l = 0; l < dnn.output_layer(); ++l )
            for ( std::size_t j = 0; j < dnn.layer_size( l ); ++j )
                EXPECT_EQ( label_from_successors( dnn, map, l, j ), map.at( l, j ) );
    }
}

TEST( Labeling, PositiveRescalingKeepsLabels )
{
    std::mt19937_64 rng( 29 );
    std::uniform_real_distribution<double> scale( 0.1, 10.0 );
    for ( int trial = 0; trial < 50; ++trial )
    {
        std::vector<std::size_t> sizes = test::random_sizes( rng, 3, 2, 5 );
        Dnn dnn = test::random_network( rng, sizes );
        std::vector<std::vector<double>> weights, biases;
        for ( std::size_t l = 1; l < dnn.layer_count(); ++l )
        {
            std::vector<double> w;
            for ( std::size_t t = 0; t < sizes[l]; ++t )
                for ( std::size_t s = 0; s < sizes[l - 1]; ++s )
                    w.push_back( dnn.weight( l, t, s ) );
            weights.push_back( w );
            auto b = dnn.biases( l );
            biases.emplace_back( b.begin(), b.end() );
        }
        std::size_t layer = trial % weights.size();
        double factor = scale( rng );
        for ( auto &w : weights[layer] )
            w *= factor;
        Dnn scaled( sizes, weights, biases );
        std::vector<Label> seed = random_seed( rng, 2, true );
        EXPECT_EQ( propagate_labels( dnn, seed_of( seed ) ), propagate_labels( scaled, seed_of( seed ) ) );
    }
}

TEST( Labeling, PartitionEdgeCases )
{
    LabelMap all_mixed{ { { Label::Mixed, Label::Mixed } } };
    EXPECT_TRUE( partition_inputs( all_mixed ).labeled.empty() );
    LabelMap all_labeled{ { { Label::Inc, Label::Inert } } };
    EXPECT_TRUE( partition_inputs( all_labeled ).mixed.empty() );
    EXPECT_EQ( partition_inputs( all_labeled ).labeled.size(), 2u );
}

TEST( Labeling, MonotoneInfluenceBySampling )
{
    // Inc/Dec inputs whose influence reaches the output only through
    // non-Mixed neurons move the seeded outputs in the labeled direction.
    std::mt19937_64 rng( 31 );
    std::uniform_real_distribution<double> unit( -1.0, 1.0 );
    std::uniform_real_distribution<double> step( 1e-3, 0.5 );
    std::size_t checked = 0;
    for ( int trial = 0; trial < 2000 && checked < 300; ++trial )
    {
        Dnn dnn = test::random_network( rng, test::random_sizes( rng, 4, 2, 5 ) );
        std::vector<Label> seed = random_seed( rng, 2, false );
        LabelMap map = propagate_labels( dnn, seed_of( seed ) );
        for ( std::size_t k = 0; k < dnn.input_size(); ++k )
        {
            Label label = map.at( 0, k );
            if ( label != Label::Inc && label != Label::Dec )
                continue;
            std::vector<double> x( dnn.input_size() );
            for ( auto &v : x )
                v = unit( rng );
            std::vector<double> moved = x;
            moved[k] += step( rng );
            auto before = evaluate( dnn, x ).output();
            auto after = evaluate( dnn, moved ).output();
            for ( std::size_t j = 0; j < seed.size(); ++j )
            {
                bool helps = ( label == Label::Inc ) == ( seed[j] == Label::Inc );
                if ( seed[j] == Label::Inert )
                    continue;
                if ( helps )
                    EXPECT_GE( after[j], before[j] - 1e-12 );
                else
                    EXPECT_LE( after[j], before[j] + 1e-12 );
            }
            ++checked;
        }
    }
    EXPECT_GE( checked, 100u );
}

TEST( Labeling, PinningKeepsViolations )
{
    // Moving a labeled input to its pin only helps the condition, so a grid
    // violation anywhere in the box survives on the pinned sub-grid.
    std::mt19937_64 rng( 37 );
    std::size_t violable = 0;
    for ( int trial = 0; trial < 150; ++trial )
    {
        Dnn dnn = test::random_network( rng, test::random_sizes( rng, 3, 2, 5 ) );
        Property p = test::class_change_property( dnn, test::random_box( rng, 3, 24 ), 0 );
        if ( !grid_oracle( dnn, p.region, p.condition, 9 ) )
            continue;
        ++violable;
        LabelMap map = propagate_labels( dnn, seed_output_labels( p.condition.disjuncts[0], 2 ) );
        PartialAssignment a = fix_labeled_inputs( p.region, map );
        InputRegion pinned = p.region;
        for ( std::size_t i = 0; i < pinned.size(); ++i )
            if ( a.pinned[i] )
                pinned.lower[i] = pinned.upper[i] = *a.pinned[i];
        EXPECT_TRUE( grid_oracle( dnn, pinned, p.condition, 9 ) ) << trial;
    }
    EXPECT_GT( violable, 10u );
}

TEST( Labeling, CsvDump )
{
    LabelMap map = propagate_labels( test::fig1(), seed_of( fig1_seed ) );
    EXPECT_EQ( labels_csv( map ), "layer,index,label\n0,0,mixed\n0,1,mixed\n0,2,inc\n0,3,dec\n1,0,dec\n1,1,inc\n1,2,dec\n"
                                  "1,3,inc\n2,0,dec\n2,1,inc\n" );
}
