#include "incdec/cli.hpp"

#include "incdec/error.hpp"
#include "incdec/labeling.hpp"
#include "incdec/sexpr.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace incdec::cli {

namespace {

std::mutex log_mutex;

std::string verdict_word( Verdict::Kind kind )
{
    switch ( kind )
    {
    case Verdict::Kind::Violated:
        return "sat";
    case Verdict::Kind::Holds:
        return "unsat";
    case Verdict::Kind::Unknown:
        return "unknown";
    }
    return "unknown";
}

} // namespace

RunResult run_instance( const std::filesystem::path &network, const std::filesystem::path &property_path,
                        const RunOptions &options )
{
    auto started = std::chrono::steady_clock::now();
    Dnn dnn = load_nnet( network );
    Property property = load_vnnlib( property_path );
    if ( options.normalize )
    {
        if ( !dnn.normalization() )
            throw InvalidArgument( "network has no normalization record" );
        property = normalize_property( *dnn.normalization(), property );
    }
    property.region.validate();
    if ( property.region.size() != dnn.input_size() )
        throw InvalidArgument( "property declares " + std::to_string( property.region.size() ) +
                               " inputs, network has " + std::to_string( dnn.input_size() ) );
    if ( property.output_count != dnn.output_size() )
        throw InvalidArgument( "property declares " + std::to_string( property.output_count ) +
                               " outputs, network has " + std::to_string( dnn.output_size() ) );
    property.condition.validate( dnn.output_size() );

    if ( options.seed_dump )
    {
        std::ofstream dump( *options.seed_dump );
        for ( std::size_t d = 0; d < property.condition.disjuncts.size(); ++d )
        {
            if ( property.condition.disjuncts.size() > 1 )
                dump << "# disjunct " << d << '\n';
            OutputSeed seed = seed_output_labels( property.condition.disjuncts[d], dnn.output_size(), d );
            dump << labels_csv( propagate_labels( dnn, seed ) );
        }
    }

    SearchConfig config = options.search;
    std::string instance = network.string() + "|" + property_path.string();
    if ( options.log )
    {
        std::filesystem::path log_path = *options.log;
        config.on_iteration = [log_path, instance] ( const IterationRecord &record ) {
            std::lock_guard lock( log_mutex );
            std::ofstream( log_path, std::ios::app ) << instance << ' ' << format_iteration( record ) << '\n';
        };
    }

    Verdict verdict = find_adversarial( dnn, property.region, property.condition, config );

    RunResult result;
    result.instance = instance;
    result.verdict = verdict_word( verdict.kind );
    result.iterations = verdict.iterations;
    result.layer = verdict.layer;
    if ( verdict.kind == Verdict::Kind::Violated )
    {
        if ( !verify_counterexample( dnn, property, verdict.counterexample, config.strict ) )
            throw std::logic_error( "counterexample failed re-verification" );
        result.counterexample = verdict.counterexample;
        result.output = verdict.output;
    }
    result.time_s = std::chrono::duration<double>( std::chrono::steady_clock::now() - started ).count();
    return result;
}

std::string format_result( const RunResult &result )
{
    std::ostringstream out;
    out << result.verdict << '\n';
    if ( result.verdict == "sat" )
    {
        for ( std::size_t i = 0; i < result.counterexample.size(); ++i )
            out << "(X_" << i << ' ' << shortest_decimal( result.counterexample[i] ) << ")\n";
        for ( std::size_t j = 0; j < result.output.size(); ++j )
            out << "(Y_" << j << ' ' << shortest_decimal( result.output[j] ) << ")\n";
    }
    return out.str();
}

ParsedResult parse_result( std::string_view text )
{
    ParsedResult parsed;
    std::size_t start = text.find_first_not_of( " \t\r\n" );
    if ( start == std::string_view::npos )
        throw ParseError( "empty result file" );
    std::size_t end = text.find_first_of( " \t\r\n(", start );
    parsed.verdict = std::string( text.substr( start, end == std::string_view::npos ? text.size() - start : end - start ) );
    if ( parsed.verdict != "sat" && parsed.verdict != "unsat" && parsed.verdict != "unknown" )
        throw ParseError( "result file must start with sat, unsat or unknown", 1 );
    if ( end == std::string_view::npos )
        return parsed;

    std::map<std::size_t, double> inputs;
    std::map<std::size_t, double> outputs;
    std::vector<SExpr> pending = parse_sexprs( text.substr( end ) );
    while ( !pending.empty() )
    {
        SExpr expr = std::move( pending.back() );
        pending.pop_back();
        if ( expr.is_atom )
            throw ParseError( "unexpected token '" + expr.atom + "'", expr.line );
        if ( !expr.items.empty() && expr.items.front().is_list() )
        {
            for ( auto &item : expr.items )
                pending.push_back( std::move( item ) );
            continue;
        }
        if ( expr.items.size() != 2 || !expr.items[0].is_atom )
            throw ParseError( "expected (X_i value) or (Y_j value)", expr.line );
        const std::string &name = expr.items[0].atom;
        if ( name.size() < 3 || name[1] != '_' || ( name[0] != 'X' && name[0] != 'Y' ) )
            throw ParseError( "unknown variable '" + name + "'", expr.line );
        std::size_t index = std::stoul( name.substr( 2 ) );
        SExpr value = expr.items[1];
        Rational number;
        if ( value.is_atom )
            number = parse_decimal( value.atom );
        else if ( value.items.size() == 2 && value.items[0].is_symbol( "-" ) && value.items[1].is_atom )
            number = -parse_decimal( value.items[1].atom );
        else
            throw ParseError( "malformed value for " + name, expr.line );
        ( name[0] == 'X' ? inputs : outputs )[index] = to_double( number );
    }

    auto dense = [] ( const std::map<std::size_t, double> &values, const char *prefix ) {
        std::vector<double> result;
        for ( const auto &[index, value] : values )
        {
            if ( index != result.size() )
                throw ParseError( std::string( "missing value for " ) + prefix + "_" + std::to_string( result.size() ) );
            result.push_back( value );
        }
        return result;
    };
    parsed.inputs = dense( inputs, "X" );
    parsed.outputs = dense( outputs, "Y" );
    return parsed;
}

bool verify_counterexample( const Dnn &dnn, const Property &property, const std::vector<double> &input, bool strict )
{
    if ( input.size() != dnn.input_size() || !property.region.contains( input ) )
        return false;
    return holds_violation( property.condition, evaluate( dnn, input ).output(), strict );
}

namespace {

std::vector<std::string> split_csv( const std::string &line )
{
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for ( std::size_t i = 0; i < line.size(); ++i )
    {
        char c = line[i];
        if ( quoted )
        {
            if ( c == '"' && i + 1 < line.size() && line[i + 1] == '"' )
            {
                field += '"';
                ++i;
            }
            else if ( c == '"' )
                quoted = false;
            else
                field += c;
        }
        else if ( c == '"' )
            quoted = true;
        else if ( c == ',' )
        {
            fields.push_back( field );
            field.clear();
        }
        else if ( c != '\r' )
            field += c;
    }
    fields.push_back( field );
    return fields;
}

std::string csv_field( const std::string &value )
{
    if ( value.find_first_of( ",\"\n" ) == std::string::npos )
        return value;
    std::string out = "\"";
    for ( char c : value )
        out += c == '"' ? std::string( "\"\"" ) : std::string( 1, c );
    return out + "\"";
}

std::string trim( const std::string &s )
{
    auto begin = s.find_first_not_of( " \t\r" );
    if ( begin == std::string::npos )
        return "";
    return s.substr( begin, s.find_last_not_of( " \t\r" ) - begin + 1 );
}

const char *report_header = "instance,verdict,time_s,iterations,layer";

struct Row
{
    std::string instance;
    std::string verdict;
    std::string time_s;
    std::string iterations;
    std::string layer;

    std::string line() const
    {
        return csv_field( instance ) + "," + verdict + "," + time_s + "," + iterations + "," + layer;
    }
};

std::string seconds_text( double seconds )
{
    std::ostringstream out;
    out.setf( std::ios::fixed );
    out.precision( 3 );
    out << seconds;
    return out.str();
}

} // namespace

std::vector<ManifestEntry> read_manifest( const std::filesystem::path &manifest )
{
    std::ifstream in( manifest );
    if ( !in )
        throw InvalidArgument( "cannot open manifest " + manifest.string() );
    std::filesystem::path base = manifest.parent_path();
    std::vector<ManifestEntry> entries;
    std::string line;
    std::size_t number = 0;
    while ( std::getline( in, line ) )
    {
        ++number;
        std::string content = trim( line );
        if ( content.empty() || content[0] == '#' )
            continue;
        std::vector<std::string> fields = split_csv( content );
        for ( auto &f : fields )
            f = trim( f );
        if ( fields[0] == "network" || fields[0] == "network_path" )
            continue;
        if ( fields.size() < 2 || fields.size() > 3 )
            throw ParseError( "manifest rows are network_path,property_path,timeout", number );
        ManifestEntry entry;
        entry.instance = fields[0] + "|" + fields[1];
        entry.network = base / fields[0];
        entry.property = base / fields[1];
        if ( fields.size() == 3 && !fields[2].empty() )
        {
            try
            {
                entry.timeout_s = std::stod( fields[2] );
            }
            catch ( const std::exception & )
            {
                throw ParseError( "bad timeout '" + fields[2] + "'", number );
            }
        }
        entries.push_back( std::move( entry ) );
    }
    return entries;
}

std::size_t bench( const std::filesystem::path &manifest, const std::filesystem::path &report,
                   const RunOptions &options, std::size_t jobs, std::ostream &progress )
{
    std::vector<ManifestEntry> entries = read_manifest( manifest );

    std::map<std::string, Row> done;
    if ( std::filesystem::exists( report ) )
    {
        std::ifstream in( report );
        std::string line;
        while ( std::getline( in, line ) )
        {
            if ( trim( line ).empty() || line.rfind( "instance,", 0 ) == 0 )
                continue;
            std::vector<std::string> f = split_csv( line );
            if ( f.size() != 5 || f[0].rfind( "summary|", 0 ) == 0 )
                continue;
            done[f[0]] = Row{ f[0], f[1], f[2], f[3], f[4] };
        }
    }

    std::vector<const ManifestEntry *> pending;
    for ( const auto &entry : entries )
        if ( !done.count( entry.instance ) )
            pending.push_back( &entry );

    // Rows are appended as instances finish so an interrupted batch can resume.
    {
        std::ofstream out( report, std::ios::trunc );
        out << report_header << '\n';
        for ( const auto &[instance, row] : done )
            out << row.line() << '\n';
    }

    std::mutex mutex;
    std::atomic<std::size_t> next{ 0 };
    auto worker = [&] {
        for ( ;; )
        {
            std::size_t k = next++;
            if ( k >= pending.size() )
                return;
            const ManifestEntry &entry = *pending[k];
            RunOptions local = options;
            if ( entry.timeout_s )
                local.search.budget_s = *entry.timeout_s;

            Row row;
            row.instance = entry.instance;
            auto started = std::chrono::steady_clock::now();
            std::string error;
            try
            {
                RunResult result = run_instance( entry.network, entry.property, local );
                row.verdict = result.verdict;
                row.time_s = seconds_text( result.time_s );
                row.iterations = std::to_string( result.iterations );
                row.layer = std::to_string( result.layer );
            }
            catch ( const std::exception &e )
            {
                row.verdict = "error";
                row.time_s = seconds_text(
                    std::chrono::duration<double>( std::chrono::steady_clock::now() - started ).count() );
                error = e.what();
            }

            std::lock_guard lock( mutex );
            std::ofstream( report, std::ios::app ) << row.line() << '\n';
            progress << row.instance << ": " << row.verdict << " (" << row.time_s << " s)";
            if ( !error.empty() )
                progress << " " << error;
            progress << std::endl;
            done[row.instance] = row;
        }
    };

    std::size_t thread_count = std::max<std::size_t>( 1, std::min( jobs, pending.size() ) );
    if ( thread_count == 1 )
        worker();
    else
    {
        std::vector<std::thread> threads;
        for ( std::size_t t = 0; t < thread_count; ++t )
            threads.emplace_back( worker );
        for ( auto &t : threads )
            t.join();
    }

    struct Summary
    {
        std::size_t count = 0;
        std::size_t violated = 0;
        double seconds = 0.0;
    };
    std::vector<std::string> order;
    std::map<std::string, Summary> summaries;
    std::ofstream out( report, std::ios::trunc );
    out << report_header << '\n';
    std::set<std::string> written;
    for ( const auto &entry : entries )
    {
        auto it = done.find( entry.instance );
        if ( it == done.end() || !written.insert( entry.instance ).second )
            continue;
        out << it->second.line() << '\n';
        std::string property = entry.instance.substr( entry.instance.find( '|' ) + 1 );
        if ( !summaries.count( property ) )
            order.push_back( property );
        Summary &summary = summaries[property];
        ++summary.count;
        summary.violated += it->second.verdict == "sat";
        try
        {
            summary.seconds += std::stod( it->second.time_s );
        }
        catch ( const std::exception & )
        {
        }
    }
    for ( const auto &property : order )
    {
        const Summary &s = summaries[property];
        Row row{ "summary|" + property, "violated=" + std::to_string( s.violated ) + "/" + std::to_string( s.count ),
                 seconds_text( s.seconds ), "", "" };
        out << row.line() << '\n';
    }
    return pending.size();
}

} // namespace incdec::cli
