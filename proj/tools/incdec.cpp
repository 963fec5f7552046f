// incdec: falsify properties of ReLU networks from the command line.
//
// Exit status: 0 after a decisive run, 1 on usage, parse or validation
// errors, 2 when the solver process fails, 3 when `check` rejects a result.

#include "incdec/cli.hpp"
#include "incdec/error.hpp"
#include "incdec/kernels.hpp"
#include "incdec/labeling.hpp"
#include "incdec/search.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

using namespace incdec;

namespace {

struct SearchFlags
{
    std::string solver = "z3";
    std::vector<std::string> solver_args;
    std::string solver_input = "stdin";
    double timeout = 116.0;
    std::size_t iters = 80;
    std::vector<std::size_t> layers = { 1 };
    bool complete = false;
    bool escalate = false;
    std::string epsilon;
    std::string soft_mode = "accumulate";
    std::string priority = "lex-obj";
    bool strict = false;
    std::string artifacts;

    void attach( CLI::App &app )
    {
        app.add_option( "--solver", solver, "Solver executable" )->capture_default_str();
        app.add_option( "--solver-arg", solver_args, "Solver argument (repeatable; default -in)" );
        app.add_option( "--solver-input", solver_input, "How the query reaches the solver" )
            ->check( CLI::IsMember( { "stdin", "file" } ) )
            ->capture_default_str();
        app.add_option( "--timeout", timeout, "Wall-clock budget in seconds" )->capture_default_str();
        app.add_option( "--iters", iters, "Iterations per scheduled layer" )->capture_default_str();
        app.add_option( "--layers", layers, "Truncation schedule, e.g. 1,2" )->delimiter( ',' )->capture_default_str();
        app.add_flag( "--complete", complete, "Assert the condition at the output layer; Unsat proves the property" );
        app.add_flag( "--escalate", escalate, "Append every deeper layer to the schedule" );
        app.add_option( "--epsilon", epsilon, "Blocking radius (default: narrowest free width / iters)" );
        app.add_option( "--soft-mode", soft_mode )->check( CLI::IsMember( { "accumulate", "replace" } ) )->capture_default_str();
        app.add_option( "--priority", priority )
            ->check( CLI::IsMember( { "lex-obj", "lex-soft", "weighted" } ) )
            ->capture_default_str();
        app.add_flag( "--strict", strict, "Require strict inequalities when checking violations" );
        app.add_option( "--artifacts", artifacts, "Directory that keeps every query and solver answer" );
    }

    SearchConfig config() const
    {
        SearchConfig config;
        config.iterations = iters;
        config.budget_s = timeout;
        config.schedule = layers;
        config.complete = complete;
        config.escalate = escalate;
        config.strict = strict;
        if ( !epsilon.empty() )
        {
            config.epsilon = parse_decimal( epsilon );
            if ( *config.epsilon <= 0 )
                throw InvalidArgument( "--epsilon must be positive" );
        }
        config.soft_mode = soft_mode == "replace" ? SoftMode::Replace : SoftMode::Accumulate;
        config.priority = priority == "lex-soft"   ? Priority::LexSoft
                          : priority == "weighted" ? Priority::Weighted
                                                   : Priority::LexObjective;
        config.solver.executable = solver;
        if ( !solver_args.empty() )
            config.solver.arguments = solver_args;
        else if ( solver_input == "file" )
            config.solver.arguments.clear();
        config.solver.input_mode = solver_input == "file" ? SolverConfig::InputMode::File : SolverConfig::InputMode::Stdin;
        if ( !artifacts.empty() )
            config.solver.artifact_dir = artifacts;
        return config;
    }
};

void write_output( const std::string &path, const std::string &text )
{
    if ( path.empty() || path == "-" )
    {
        std::cout << text;
        return;
    }
    std::ofstream out( path );
    if ( !( out << text ) )
        throw InvalidArgument( "cannot write " + path );
}

std::string read_file( const std::string &path )
{
    std::ifstream in( path );
    if ( !in )
        throw InvalidArgument( "cannot open " + path );
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string numbers( const std::vector<double> &values )
{
    std::string out;
    for ( std::size_t i = 0; i < values.size(); ++i )
        out += ( i ? "," : "" ) + shortest_decimal( values[i] );
    return out;
}

} // namespace

int main( int argc, char **argv )
{
    CLI::App app{ "Find adversarial examples for ReLU networks with inc/dec labeling and SMT queries" };
    app.require_subcommand( 1 );

    SearchFlags flags;
    std::string network;
    std::string property;
    std::string out;
    bool normalize = false;
    std::string seed_dump;
    std::string log;

    auto *run = app.add_subcommand( "run", "Falsify one property and write a result file" );
    run->add_option( "network", network, "NNet file" )->required();
    run->add_option( "property", property, "VNN-LIB file" )->required();
    run->add_option( "-o,--out", out, "Result file (default: standard output)" );
    run->add_flag( "--normalize", normalize, "Property is in raw units; apply the network's normalization" );
    run->add_option( "--seed-dump", seed_dump, "Write the label map as CSV" );
    run->add_option( "--log", log, "Append one line per solver call" );
    flags.attach( *run );

    std::string manifest;
    std::size_t jobs = 1;
    auto *bench = app.add_subcommand( "bench", "Run a manifest of instances and write a CSV report" );
    bench->add_option( "manifest", manifest, "CSV of network_path,property_path,timeout" )->required();
    bench->add_option( "-o,--out", out, "Report CSV" )->required();
    bench->add_option( "-j,--jobs", jobs, "Instances run in parallel" )->check( CLI::PositiveNumber )->capture_default_str();
    bench->add_flag( "--normalize", normalize );
    bench->add_option( "--log", log );
    flags.attach( *bench );

    std::string result_path;
    auto *check = app.add_subcommand( "check", "Re-verify a result file's counterexample" );
    check->add_option( "network", network )->required();
    check->add_option( "property", property )->required();
    check->add_option( "result", result_path )->required();
    check->add_flag( "--normalize", normalize );
    check->add_flag( "--strict", flags.strict );

    std::vector<double> point;
    std::vector<double> radius;
    auto *targets = app.add_subcommand( "targets", "Search for a class change around a point" );
    targets->add_option( "network", network )->required();
    targets->add_option( "--x", point, "Center point, comma separated" )->delimiter( ',' )->required();
    targets->add_option( "--delta", radius, "L-infinity radius, one value or one per input" )
        ->delimiter( ',' )
        ->required();
    flags.attach( *targets );

    std::size_t disjunct = 0;
    auto *labels = app.add_subcommand( "labels", "Print the label map of one disjunct as CSV" );
    labels->add_option( "network", network )->required();
    labels->add_option( "property", property )->required();
    labels->add_option( "--disjunct", disjunct )->capture_default_str();
    labels->add_flag( "--normalize", normalize );

    std::size_t layer = 1;
    auto *emit = app.add_subcommand( "emit", "Print the first SMT-LIB2 query for one layer" );
    emit->add_option( "network", network )->required();
    emit->add_option( "property", property )->required();
    emit->add_option( "--layer", layer )->capture_default_str();
    emit->add_option( "--disjunct", disjunct )->capture_default_str();
    emit->add_flag( "--complete", flags.complete );
    emit->add_option( "--priority", flags.priority )->check( CLI::IsMember( { "lex-obj", "lex-soft", "weighted" } ) );
    emit->add_flag( "--normalize", normalize );

    auto *eval = app.add_subcommand( "eval", "Evaluate the network at a point" );
    eval->add_option( "network", network )->required();
    eval->add_option( "--x", point )->delimiter( ',' )->required();

    auto *kernel_cmd = app.add_subcommand( "kernels", "List the available forward-pass kernels" );

    try
    {
        app.parse( argc, argv );
    }
    catch ( const CLI::ParseError &e )
    {
        int code = app.exit( e );
        return code == 0 ? 0 : 1;
    }

    auto load_property = [&] ( const Dnn &dnn ) {
        Property prop = load_vnnlib( property );
        if ( normalize )
        {
            if ( !dnn.normalization() )
                throw InvalidArgument( "network has no normalization record" );
            prop = normalize_property( *dnn.normalization(), prop );
        }
        if ( prop.region.size() != dnn.input_size() || prop.output_count != dnn.output_size() )
            throw InvalidArgument( "property dimensions do not match the network" );
        prop.condition.validate( dnn.output_size() );
        return prop;
    };
    auto pick_disjunct = [&] ( const Property &prop ) {
        if ( disjunct >= prop.condition.disjuncts.size() )
            throw InvalidArgument( "property has " + std::to_string( prop.condition.disjuncts.size() ) +
                                   " disjuncts" );
        return prop.condition.disjuncts[disjunct];
    };

    try
    {
        if ( *run )
        {
            cli::RunOptions options;
            options.search = flags.config();
            options.normalize = normalize;
            if ( !seed_dump.empty() )
                options.seed_dump = seed_dump;
            if ( !log.empty() )
                options.log = log;
            cli::RunResult result = cli::run_instance( network, property, options );
            write_output( out, cli::format_result( result ) );
            std::cerr << result.verdict << " in " << result.time_s << " s, " << result.iterations
                      << " solver calls\n";
            return 0;
        }
        if ( *bench )
        {
            cli::RunOptions options;
            options.search = flags.config();
            options.normalize = normalize;
            if ( !log.empty() )
                options.log = log;
            cli::bench( manifest, out, options, jobs, std::cerr );
            return 0;
        }
        if ( *check )
        {
            Dnn dnn = load_nnet( network );
            Property prop = load_property( dnn );
            cli::ParsedResult parsed = cli::parse_result( read_file( result_path ) );
            if ( parsed.verdict != "sat" )
            {
                std::cout << parsed.verdict << ": nothing to verify\n";
                return 0;
            }
            if ( cli::verify_counterexample( dnn, prop, parsed.inputs, flags.strict ) )
            {
                std::cout << "verified\n";
                return 0;
            }
            std::cout << "NOT verified\n";
            return 3;
        }
        if ( *targets )
        {
            Dnn dnn = load_nnet( network );
            SearchConfig config = flags.config();
            Verdict verdict = radius.size() == 1 ? run_targets( dnn, point, radius.front(), config )
                                                 : run_targets( dnn, point, radius, config );
            std::cout << verdict_name( verdict.kind );
            if ( verdict.kind == Verdict::Kind::Violated )
                std::cout << " target=" << *verdict.target << " input=" << numbers( verdict.counterexample )
                          << " output=" << numbers( verdict.output );
            else
                std::cout << " reason=" << reason_name( verdict.reason );
            std::cout << " iterations=" << verdict.iterations << '\n';
            return 0;
        }
        if ( *labels )
        {
            Dnn dnn = load_nnet( network );
            Property prop = load_property( dnn );
            OutputSeed seed = seed_output_labels( pick_disjunct( prop ), dnn.output_size(), disjunct );
            std::cout << labels_csv( propagate_labels( dnn, seed ) );
            return 0;
        }
        if ( *emit )
        {
            Dnn dnn = load_nnet( network );
            Property prop = load_property( dnn );
            if ( layer < 1 || layer > dnn.output_layer() )
                throw InvalidArgument( "--layer must be in 1.." + std::to_string( dnn.output_layer() ) );
            const Conjunction &conj = pick_disjunct( prop );
            LabelMap map = propagate_labels( dnn, seed_output_labels( conj, dnn.output_size(), disjunct ) );
            PartialAssignment assignment = fix_labeled_inputs( prop.region, map );
            SearchConfig config = flags.config();
            std::cout << emit_smtlib( initial_query( dnn, map, assignment, conj, layer, config.complete, config.priority ) );
            return 0;
        }
        if ( *eval )
        {
            Dnn dnn = load_nnet( network );
            if ( point.size() != dnn.input_size() )
                throw InvalidArgument( "expected " + std::to_string( dnn.input_size() ) + " input values" );
            EvalTrace trace = evaluate( dnn, point );
            std::cout << numbers( trace.output() ) << '\n';
            std::cout << "class " << winning_class( trace.output() ) << '\n';
            return 0;
        }
        if ( *kernel_cmd )
        {
            for ( kernels::Isa isa : kernels::available() )
                std::cout << kernels::isa_name( isa ) << ( isa == kernels::active().isa ? " (active)" : "" ) << '\n';
            return 0;
        }
    }
    catch ( const SolverProcessError &e )
    {
        std::cerr << "solver error: " << e.what() << '\n';
        return 2;
    }
    catch ( const std::exception &e )
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
