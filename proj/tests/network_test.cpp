#include "incdec/error.hpp"
#include "incdec/network.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace incdec;

TEST( Network, WorkedExampleForwardPass )
{
    Dnn dnn = test::fig1();
    EvalTrace trace = evaluate( dnn, test::fig1_x );
    EXPECT_NEAR( trace.output()[0], 4.6, 1e-9 );
    EXPECT_NEAR( trace.output()[1], -0.25, 1e-9 );
    EXPECT_EQ( winning_class( trace.output() ), 0u );

    EvalTrace first = evaluate( dnn, std::vector<double>{ 0.1, -1.4, -0.2, -1.5 } );
    std::vector<double> pre = { 2.1, 3.1, -2.6, -0.3 };
    for ( std::size_t j = 0; j < 4; ++j )
        EXPECT_NEAR( first.pre[1][j], pre[j], 1e-12 );
    EXPECT_NEAR( first.output()[0], 1.1, 1e-12 );
    EXPECT_NEAR( first.output()[1], 1.0, 1e-12 );

    EvalTrace second = evaluate( dnn, std::vector<double>{ 0.85, -1.4, -0.2, -1.5 } );
    EXPECT_NEAR( second.output()[0], 1.1, 1e-12 );
    EXPECT_NEAR( second.output()[1], 1.75, 1e-12 );
    EXPECT_EQ( winning_class( second.output() ), 1u );
}

TEST( Network, ExactEvaluationIsExact )
{
    Dnn dnn = test::fig1();
    std::vector<Rational> x = { Rational( 3, 5 ), Rational( -19, 10 ), Rational( -7, 10 ), Rational( -1 ) };
    ExactTrace trace = evaluate_exact( dnn, x );
    EXPECT_EQ( trace.output()[0], Rational( 23, 5 ) );
    EXPECT_EQ( trace.output()[1], Rational( -1, 4 ) );
    EXPECT_EQ( trace.post[1][2], 0 ); // n13 is clipped
}

TEST( Network, WinningClassTiesGoLow )
{
    EXPECT_EQ( winning_class( std::vector<double>{ 1.0, 1.0 } ), 0u );
    EXPECT_EQ( winning_class( std::vector<double>{ 0.0, 2.0, 2.0 } ), 1u );
}

TEST( Network, ShapeErrors )
{
    EXPECT_THROW( Dnn( { 2 }, {}, {} ), InvalidArgument );
    EXPECT_THROW( Dnn( { 2, 1 }, { { 1.0 } }, { { 0.0 } } ), InvalidArgument );
    EXPECT_THROW( Dnn( { 2, 1 }, { { 1.0, 2.0 } }, { { 0.0, 1.0 } } ), InvalidArgument );
    Dnn dnn = test::fig1();
    EXPECT_THROW( evaluate( dnn, std::vector<double>{ 1.0 } ), InvalidArgument );
}

TEST( Network, ParsesWorkedExampleFile )
{
    Dnn dnn = load_nnet( test::data_dir() / "fig1.nnet" );
    Dnn expected = test::fig1();
    ASSERT_EQ( dnn.layer_sizes(), expected.layer_sizes() );
    for ( std::size_t l = 1; l < dnn.layer_count(); ++l )
        for ( std::size_t t = 0; t < dnn.layer_size( l ); ++t )
        {
            EXPECT_EQ( dnn.bias( l, t ), expected.bias( l, t ) );
            for ( std::size_t s = 0; s < dnn.layer_size( l - 1 ); ++s )
                EXPECT_EQ( dnn.weight( l, t, s ), expected.weight( l, t, s ) );
        }
    ASSERT_TRUE( dnn.normalization().has_value() );
    EXPECT_EQ( dnn.normalization()->means.size(), 5u );
    EXPECT_EQ( dnn.activation( 1 ), Activation::Relu );
    EXPECT_EQ( dnn.activation( 2 ), Activation::Identity );
}

TEST( Network, IdentityNetworkWithoutHiddenLayer )
{
    Dnn dnn = parse_nnet( "1,1,1,1,\n1,1,\n0,\n-1,\n1,\n0,0,\n1,1,\n1.0,\n0.0,\n" );
    EXPECT_EQ( dnn.layer_count(), 2u );
    EXPECT_EQ( evaluate( dnn, std::vector<double>{ -0.5 } ).output()[0], -0.5 );
}

TEST( Network, WriteParseRoundTrip )
{
    std::mt19937_64 rng( 3 );
    for ( int trial = 0; trial < 10; ++trial )
    {
        Dnn dnn = test::random_network( rng, test::random_sizes( rng, 3, 2, 6 ) );
        Dnn back = parse_nnet( write_nnet( dnn ) );
        ASSERT_EQ( back.layer_sizes(), dnn.layer_sizes() );
        for ( std::size_t l = 1; l < dnn.layer_count(); ++l )
        {
            auto a = dnn.packed_weights( l ), b = back.packed_weights( l );
            EXPECT_TRUE( std::equal( a.begin(), a.end(), b.begin(), b.end() ) );
            auto c = dnn.biases( l ), d = back.biases( l );
            EXPECT_TRUE( std::equal( c.begin(), c.end(), d.begin(), d.end() ) );
        }
        EXPECT_EQ( write_nnet( back ), write_nnet( dnn ) );
    }
}

TEST( Network, ParseErrorsCarryLineNumbers )
{
    std::ifstream in( test::data_dir() / "fig1.nnet" );
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string good = buffer.str();

    // Line 9 of the file is the first weight row; drop one entry.
    std::string bad = good;
    bad.replace( bad.find( "1,-2.5,0,1," ), 11, "1,-2.5,0," );
    try
    {
        parse_nnet( bad );
        FAIL() << "expected ParseError";
    }
    catch ( const ParseError &e )
    {
        EXPECT_EQ( e.line(), 9u ) << e.what();
    }

    std::string word = good;
    word.replace( word.find( "2,-1,0,-1," ), 10, "2,-1,zero,-1," );
    try
    {
        parse_nnet( word );
        FAIL() << "expected ParseError";
    }
    catch ( const ParseError &e )
    {
        EXPECT_EQ( e.line(), 10u ) << e.what();
    }

    EXPECT_THROW( parse_nnet( good.substr( 0, good.size() - 3 ) ), ParseError );
    EXPECT_THROW( parse_nnet( "" ), ParseError );
    EXPECT_THROW( parse_nnet( "2,4,2\n" ), ParseError );
    EXPECT_THROW( parse_nnet( good + "5,\n" ), ParseError );
    EXPECT_THROW( load_nnet( test::data_dir() / "missing.nnet" ), InvalidArgument );
}
