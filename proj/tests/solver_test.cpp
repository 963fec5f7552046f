#include "incdec/encoder.hpp"
#include "incdec/error.hpp"
#include "incdec/search.hpp"
#include "incdec/solver.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <fstream>

using namespace incdec;

namespace {

std::vector<std::string> names( std::initializer_list<const char *> list )
{
    return { list.begin(), list.end() };
}

// Executable shell script standing in for a solver.
std::string fake_solver( const test::TempDir &dir, const std::string &name, const std::string &body )
{
    auto path = dir / name;
    std::ofstream( path ) << "#!/bin/sh\n" << body << "\n";
    std::filesystem::permissions( path, std::filesystem::perms::owner_all );
    return path.string();
}

SolverConfig config_for( const std::string &executable, double timeout = 10.0 )
{
    SolverConfig config;
    config.executable = executable;
    config.arguments = {};
    config.timeout_s = timeout;
    return config;
}

} // namespace

TEST( Solver, ParseModelValueForms )
{
    auto wanted = names( { "x_0", "x_1", "x_2" } );
    Assignment a = parse_model( "((x_0 (/ 5.0 2.0))\n (x_1 (- (/ 141.0 100.0)))\n (x_2 0.25))", wanted );
    EXPECT_EQ( a.at( "x_0" ), Rational( 5, 2 ) );
    EXPECT_EQ( a.at( "x_1" ), Rational( -141, 100 ) );
    EXPECT_EQ( a.at( "x_2" ), Rational( 1, 4 ) );

    Assignment b = parse_model( "((x_0 (- 2.0)) (x_1 3) (x_2 (- 1.0 0.5)))", wanted );
    EXPECT_EQ( b.at( "x_0" ), -2 );
    EXPECT_EQ( b.at( "x_1" ), 3 );
    EXPECT_EQ( b.at( "x_2" ), Rational( 1, 2 ) );

    EXPECT_THROW( parse_model( "((x_0 1.0) (x_1 2.0))", wanted ), ParseError );
    EXPECT_THROW( parse_model( "((x_0 (root-obj (+ (^ x 2) (- 2)) 1)) (x_1 1.0) (x_2 1.0))", wanted ), ParseError );
    EXPECT_THROW( parse_model( "((x_0 1.0) (x_1 2.0) (x_2 abc))", wanted ), ParseError );
    EXPECT_THROW( parse_model( "((x_0 1.0", wanted ), ParseError );
}

TEST( Solver, ConfigValidation )
{
    SolverConfig config;
    EXPECT_NO_THROW( config.validate() );
    config.timeout_s = 0;
    EXPECT_THROW( config.validate(), InvalidArgument );
    config.timeout_s = 1;
    config.executable = "";
    EXPECT_THROW( config.validate(), InvalidArgument );
}

TEST( Solver, MissingExecutableIsProcessError )
{
    SolverOutcome outcome = solve( config_for( "/nonexistent/solver-binary" ), "(check-sat)\n", {} );
    EXPECT_EQ( outcome.kind, SolverOutcome::Kind::ProcessError );
    EXPECT_FALSE( outcome.detail.empty() );
}

TEST( Solver, ScriptedAnswers )
{
    test::TempDir dir;
    auto wanted = names( { "x_0" } );

    SolverOutcome sat = solve( config_for( fake_solver( dir, "sat", "cat > /dev/null\necho sat\necho '((x_0 (/ 1.0 3.0)))'" ) ),
                               "(check-sat)\n", wanted );
    ASSERT_EQ( sat.kind, SolverOutcome::Kind::Sat ) << sat.detail;
    EXPECT_EQ( sat.assignment.at( "x_0" ), Rational( 1, 3 ) );

    SolverOutcome unsat = solve( config_for( fake_solver( dir, "unsat", "cat > /dev/null\necho unsat" ) ), "", wanted );
    EXPECT_EQ( unsat.kind, SolverOutcome::Kind::Unsat );

    SolverOutcome unknown = solve( config_for( fake_solver( dir, "unknown", "echo unknown" ) ), "", wanted );
    EXPECT_EQ( unknown.kind, SolverOutcome::Kind::Unknown );

    SolverOutcome garbage = solve( config_for( fake_solver( dir, "garbage", "echo hello" ) ), "", wanted );
    EXPECT_EQ( garbage.kind, SolverOutcome::Kind::ProcessError );

    SolverOutcome broken = solve( config_for( fake_solver( dir, "broken", "echo sat\necho '((x_1 2.0))'" ) ), "", wanted );
    EXPECT_EQ( broken.kind, SolverOutcome::Kind::ProcessError );

    SolverOutcome silent = solve( config_for( fake_solver( dir, "silent", "exit 3" ) ), "", wanted );
    EXPECT_EQ( silent.kind, SolverOutcome::Kind::ProcessError );
}

TEST( Solver, TimeoutKillsTheChild )
{
    test::TempDir dir;
    auto start = std::chrono::steady_clock::now();
    SolverOutcome outcome = solve( config_for( fake_solver( dir, "slow", "exec sleep 30" ), 0.001 ), "", {} );
    double seconds = std::chrono::duration<double>( std::chrono::steady_clock::now() - start ).count();
    EXPECT_EQ( outcome.kind, SolverOutcome::Kind::Timeout );
    EXPECT_LT( seconds, 5.0 );
}

TEST( Solver, FileInputModeAndArtifacts )
{
    test::TempDir dir;
    SolverConfig config = config_for( fake_solver( dir, "reader", "grep -q check-sat \"$1\" && echo unsat" ) );
    config.input_mode = SolverConfig::InputMode::File;
    config.artifact_dir = dir.path() / "artifacts";
    std::filesystem::create_directories( *config.artifact_dir );
    SolverOutcome outcome = solve( config, "(check-sat)\n", {} );
    EXPECT_EQ( outcome.kind, SolverOutcome::Kind::Unsat ) << outcome.detail;
    EXPECT_FALSE( std::filesystem::is_empty( *config.artifact_dir ) );
}

TEST( Solver, Z3AnswersTheWorkedExample )
{
    if ( !test::have_z3() )
        GTEST_SKIP() << "z3 not installed";
    Dnn dnn = test::fig1();
    Property p = robustness_query( test::fig1_x, 0.5, 0, 1, 2 );
    LabelMap labels = propagate_labels( dnn, seed_output_labels( p.condition.disjuncts[0], 2 ) );
    PartialAssignment a = fix_labeled_inputs( p.region, labels, test::fig1_x );
    Query query = initial_query( dnn, labels, a, p.condition.disjuncts[0], 1, false, Priority::LexObjective );
    std::vector<std::string> wanted;
    for ( const auto &v : query.wanted() )
        wanted.push_back( v.name() );
    SolverOutcome outcome = solve( SolverConfig{}, emit_smtlib( query ), wanted );
    ASSERT_EQ( outcome.kind, SolverOutcome::Kind::Sat ) << outcome.detail;
    EXPECT_EQ( outcome.assignment.at( "x_0" ), parse_decimal( "0.1" ) );
    EXPECT_EQ( outcome.assignment.at( "x_1" ), parse_decimal( "-1.4" ) );

    SolverOutcome unsat = solve( SolverConfig{}, "(declare-const a Real)\n(assert (> a 1.0))\n(assert (< a 0.0))\n(check-sat)\n", {} );
    EXPECT_EQ( unsat.kind, SolverOutcome::Kind::Unsat );
}

TEST( Solver, GridPoints )
{
    EXPECT_EQ( grid_point( 0.1, 1.1, 0, 41 ), 0.1 );
    EXPECT_EQ( grid_point( 0.1, 1.1, 40, 41 ), 1.1 );
    EXPECT_EQ( grid_point( -2.0, 2.0, 2, 5 ), 0.0 );
    EXPECT_EQ( grid_point( 0.3, 0.3, 0, 1 ), 0.3 );
    for ( std::size_t r : { 2u, 5u, 21u } )
        for ( std::size_t k = 0; k < r; ++k )
            EXPECT_EQ( grid_point( -0.7, 1.3, k, r ), grid_point( -0.7, 1.3, 2 * k, 2 * r - 1 ) );
}

TEST( Solver, GridOracleOnWorkedExample )
{
    Dnn dnn = test::fig1();
    Property p = robustness_query( test::fig1_x, 0.5, 0, 1, 2 );
    auto found = grid_oracle( dnn, p.region, p.condition, 11 );
    ASSERT_TRUE( found.has_value() );
    EXPECT_TRUE( p.region.contains( *found ) );
    EXPECT_TRUE( holds_violation( p.condition, evaluate( dnn, *found ).output() ) );

    Property none = robustness_query( test::fig1_x, 0.01, 0, 1, 2 );
    EXPECT_FALSE( grid_oracle( dnn, none.region, none.condition, 11 ).has_value() );

    Property point = robustness_query( test::fig1_x, 0.0, 0, 1, 2 );
    EXPECT_FALSE( grid_oracle( dnn, point.region, point.condition, 41 ).has_value() );
}

TEST( Solver, GridOracleRefinementIsMonotone )
{
    std::mt19937_64 rng( 41 );
    for ( int trial = 0; trial < 60; ++trial )
    {
        Dnn dnn = test::random_network( rng, test::random_sizes( rng, 2, 2, 4 ) );
        Property p = test::class_change_property( dnn, test::random_box( rng, 2 ), 0 );
        bool coarse = grid_oracle( dnn, p.region, p.condition, 6 ).has_value();
        bool fine = grid_oracle( dnn, p.region, p.condition, 11 ).has_value();
        EXPECT_TRUE( !coarse || fine );
    }
}
