#include "incdec/solver.hpp"

#include "incdec/error.hpp"
#include "incdec/sexpr.hpp"

#include <atomic>
#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <fcntl.h>
#include <fstream>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

namespace incdec {

void SolverConfig::validate() const
{
    if ( executable.empty() )
        throw InvalidArgument( "solver executable is empty" );
    if ( !( timeout_s > 0 ) )
        throw InvalidArgument( "solver timeout must be positive" );
}

std::string_view outcome_name( SolverOutcome::Kind kind )
{
    switch ( kind )
    {
    case SolverOutcome::Kind::Sat:
        return "sat";
    case SolverOutcome::Kind::Unsat:
        return "unsat";
    case SolverOutcome::Kind::Unknown:
        return "unknown";
    case SolverOutcome::Kind::Timeout:
        return "timeout";
    case SolverOutcome::Kind::ProcessError:
        return "error";
    }
    return "?";
}

extern "C" char **environ;

namespace {

using Clock = std::chrono::steady_clock;

struct ChildResult
{
    bool timed_out = false;
    int status = 0;
    std::string output;
};

class Fd
{
public:
    explicit Fd( int fd = -1 )
        : _fd( fd )
    {
    }
    ~Fd() { reset(); }
    Fd( const Fd & ) = delete;
    Fd &operator=( const Fd & ) = delete;

    int get() const { return _fd; }
    void reset()
    {
        if ( _fd >= 0 )
            ::close( _fd );
        _fd = -1;
    }

private:
    int _fd;
};

// Spawns argv, feeds `input` (may be empty) to its stdin and collects
// stdout+stderr until exit or deadline. Throws SolverProcessError when the
// process cannot be started.
ChildResult run_child( const std::vector<std::string> &argv, std::string_view input, double timeout_s )
{
    int in_pipe[2];
    int out_pipe[2];
    if ( ::pipe2( in_pipe, O_CLOEXEC ) != 0 )
        throw SolverProcessError( std::string( "pipe: " ) + std::strerror( errno ) );
    if ( ::pipe2( out_pipe, O_CLOEXEC ) != 0 )
    {
        ::close( in_pipe[0] );
        ::close( in_pipe[1] );
        throw SolverProcessError( std::string( "pipe: " ) + std::strerror( errno ) );
    }
    std::vector<char *> args;
    for ( const auto &a : argv )
        args.push_back( const_cast<char *>( a.c_str() ) );
    args.push_back( nullptr );

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init( &actions );
    posix_spawn_file_actions_adddup2( &actions, in_pipe[0], STDIN_FILENO );
    posix_spawn_file_actions_adddup2( &actions, out_pipe[1], STDOUT_FILENO );
    posix_spawn_file_actions_adddup2( &actions, out_pipe[1], STDERR_FILENO );
    pid_t pid = 0;
    int spawn_error = ::posix_spawnp( &pid, args[0], &actions, nullptr, args.data(), environ );
    posix_spawn_file_actions_destroy( &actions );

    ::close( in_pipe[0] );
    ::close( out_pipe[1] );
    Fd to_child( in_pipe[1] );
    Fd from_child( out_pipe[0] );
    if ( spawn_error != 0 )
        throw SolverProcessError( "cannot start solver '" + argv[0] + "': " + std::strerror( spawn_error ) );

    ::fcntl( to_child.get(), F_SETFL, O_NONBLOCK );
    if ( input.empty() )
        to_child.reset();

    ChildResult result;
    auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>( std::chrono::duration<double>( timeout_s ) );
    std::size_t written = 0;
    char buffer[65536];
    while ( from_child.get() >= 0 )
    {
        auto now = Clock::now();
        if ( now >= deadline )
        {
            result.timed_out = true;
            break;
        }
        int wait_ms = static_cast<int>(
            std::chrono::duration_cast<std::chrono::milliseconds>( deadline - now ).count() ) + 1;

        pollfd fds[2];
        nfds_t count = 0;
        fds[count++] = { from_child.get(), POLLIN, 0 };
        if ( to_child.get() >= 0 )
            fds[count++] = { to_child.get(), POLLOUT, 0 };
        int ready = ::poll( fds, count, wait_ms );
        if ( ready < 0 )
        {
            if ( errno == EINTR )
                continue;
            break;
        }
        if ( count == 2 && ( fds[1].revents & ( POLLOUT | POLLERR | POLLHUP ) ) )
        {
            ssize_t n = ::write( to_child.get(), input.data() + written, input.size() - written );
            if ( n > 0 )
                written += static_cast<std::size_t>( n );
            if ( n < 0 && errno != EAGAIN && errno != EINTR )
                to_child.reset(); // child closed its stdin
            else if ( written == input.size() )
                to_child.reset();
        }
        if ( fds[0].revents & ( POLLIN | POLLHUP | POLLERR ) )
        {
            ssize_t n = ::read( from_child.get(), buffer, sizeof( buffer ) );
            if ( n > 0 )
                result.output.append( buffer, static_cast<std::size_t>( n ) );
            else if ( n == 0 || ( errno != EINTR && errno != EAGAIN ) )
                from_child.reset();
        }
    }

    if ( result.timed_out )
        ::kill( pid, SIGKILL );
    int status = 0;
    while ( ::waitpid( pid, &status, 0 ) < 0 && errno == EINTR )
    {
    }
    result.status = status;
    return result;
}

std::atomic<unsigned long> artifact_counter{ 0 };

Rational model_value( const SExpr &expr )
{
    if ( expr.is_atom )
        return parse_decimal( expr.atom );
    if ( expr.items.empty() || !expr.items[0].is_atom )
        throw ParseError( "malformed model value '" + expr.to_string() + "'", expr.line );
    const std::string &op = expr.items[0].atom;
    if ( op == "-" && expr.items.size() == 2 )
        return -model_value( expr.items[1] );
    if ( op == "-" && expr.items.size() == 3 )
        return model_value( expr.items[1] ) - model_value( expr.items[2] );
    if ( op == "/" && expr.items.size() == 3 )
    {
        Rational denominator = model_value( expr.items[2] );
        if ( sgn( denominator ) == 0 )
            throw ParseError( "division by zero in model value", expr.line );
        Rational q = model_value( expr.items[1] ) / denominator;
        q.canonicalize();
        return q;
    }
    if ( op == "root-obj" )
        throw ParseError( "algebraic model value (root-obj) is not supported", expr.line );
    throw ParseError( "unsupported model value '" + expr.to_string() + "'", expr.line );
}

} // namespace

Assignment parse_model( std::string_view text, std::span<const std::string> wanted )
{
    std::vector<SExpr> exprs = parse_sexprs( text );
    if ( exprs.size() != 1 || exprs.front().is_atom )
        throw ParseError( "expected a single get-value list" );
    Assignment assignment;
    for ( const SExpr &pair : exprs.front().items )
    {
        if ( pair.is_atom || pair.items.size() != 2 || !pair.items[0].is_atom )
            throw ParseError( "malformed get-value entry '" + pair.to_string() + "'", pair.line );
        assignment[pair.items[0].atom] = model_value( pair.items[1] );
    }
    for ( const auto &name : wanted )
        if ( !assignment.count( name ) )
            throw ParseError( "model has no value for '" + name + "'" );
    return assignment;
}

SolverOutcome solve( const SolverConfig &config, std::string_view document, std::span<const std::string> wanted )
{
    config.validate();
    // A child that exits before reading all of its input must not kill us.
    static const bool sigpipe_ignored = [] {
        std::signal( SIGPIPE, SIG_IGN );
        return true;
    }();
    (void)sigpipe_ignored;
    auto started = Clock::now();
    SolverOutcome outcome;
    auto finish = [&] ( SolverOutcome &o ) -> SolverOutcome & {
        o.seconds = std::chrono::duration<double>( Clock::now() - started ).count();
        return o;
    };

    std::vector<std::string> argv{ config.executable };
    argv.insert( argv.end(), config.arguments.begin(), config.arguments.end() );

    unsigned long serial = artifact_counter++;
    std::filesystem::path query_file;
    bool remove_query_file = false;
    if ( config.artifact_dir )
    {
        std::filesystem::create_directories( *config.artifact_dir );
        query_file = *config.artifact_dir / ( "query_" + std::to_string( ::getpid() ) + "_" +
                                              std::to_string( serial ) + ".smt2" );
        std::ofstream( query_file ) << document;
    }
    if ( config.input_mode == SolverConfig::InputMode::File )
    {
        if ( query_file.empty() )
        {
            char name[] = "/tmp/incdec_query_XXXXXX";
            int fd = ::mkstemp( name );
            if ( fd < 0 )
            {
                outcome.kind = SolverOutcome::Kind::ProcessError;
                outcome.detail = std::string( "cannot create query file: " ) + std::strerror( errno );
                return finish( outcome );
            }
            ::close( fd );
            query_file = name;
            remove_query_file = true;
            std::ofstream( query_file ) << document;
        }
        argv.push_back( query_file.string() );
    }

    ChildResult child;
    try
    {
        child = run_child( argv, config.input_mode == SolverConfig::InputMode::Stdin ? document : std::string_view{},
                           config.timeout_s );
    }
    catch ( const SolverProcessError &e )
    {
        if ( remove_query_file )
            std::filesystem::remove( query_file );
        outcome.kind = SolverOutcome::Kind::ProcessError;
        outcome.detail = e.what();
        return finish( outcome );
    }
    if ( remove_query_file )
        std::filesystem::remove( query_file );
    if ( config.artifact_dir )
        std::ofstream( *config.artifact_dir / ( "answer_" + std::to_string( ::getpid() ) + "_" +
                                                std::to_string( serial ) + ".txt" ) )
            << child.output;

    if ( child.timed_out )
    {
        outcome.kind = SolverOutcome::Kind::Timeout;
        return finish( outcome );
    }

    // First non-empty line is the check-sat answer.
    std::size_t start = 0;
    std::string answer;
    while ( start < child.output.size() )
    {
        std::size_t end = child.output.find( '\n', start );
        if ( end == std::string::npos )
            end = child.output.size();
        std::string line = child.output.substr( start, end - start );
        start = end + 1;
        auto first = line.find_first_not_of( " \t\r" );
        if ( first == std::string::npos )
            continue;
        answer = line.substr( first, line.find_last_not_of( " \t\r" ) - first + 1 );
        break;
    }

    if ( answer == "unsat" )
        outcome.kind = SolverOutcome::Kind::Unsat;
    else if ( answer == "unknown" )
        outcome.kind = SolverOutcome::Kind::Unknown;
    else if ( answer == "sat" )
    {
        try
        {
            // Without wanted variables the document has no get-value command.
            if ( !wanted.empty() )
                outcome.assignment = parse_model(
                    std::string_view( child.output ).substr( std::min( start, child.output.size() ) ), wanted );
            outcome.kind = SolverOutcome::Kind::Sat;
        }
        catch ( const ParseError &e )
        {
            outcome.kind = SolverOutcome::Kind::ProcessError;
            outcome.detail = std::string( "bad model: " ) + e.what() + "\n" + child.output;
        }
    }
    else
    {
        outcome.kind = SolverOutcome::Kind::ProcessError;
        outcome.detail = "unexpected solver answer (exit status " + std::to_string( child.status ) + "):\n" +
                         child.output;
    }
    return finish( outcome );
}

double grid_point( double lower, double upper, std::size_t k, std::size_t resolution )
{
    if ( k == 0 || resolution < 2 )
        return lower;
    if ( k + 1 == resolution )
        return upper;
    double width = upper - lower;
    return lower + ( width * static_cast<double>( k ) ) / static_cast<double>( resolution - 1 );
}

std::optional<std::vector<double>> grid_oracle( const Dnn &dnn, const InputRegion &region,
                                                const ViolationCondition &condition, std::size_t resolution,
                                                bool strict )
{
    if ( resolution < 2 )
        throw InvalidArgument( "grid resolution must be at least 2" );
    region.validate();
    if ( region.size() != dnn.input_size() )
        throw InvalidArgument( "region dimension differs from the network input size" );

    std::size_t n = region.size();
    std::vector<std::vector<double>> axes( n );
    for ( std::size_t i = 0; i < n; ++i )
    {
        if ( region.lower[i] == region.upper[i] )
            axes[i] = { region.lower[i] };
        else
            for ( std::size_t k = 0; k < resolution; ++k )
                axes[i].push_back( grid_point( region.lower[i], region.upper[i], k, resolution ) );
    }

    Evaluator evaluator( dnn );
    std::vector<std::size_t> counter( n, 0 );
    std::vector<double> point( n );
    for ( ;; )
    {
        for ( std::size_t i = 0; i < n; ++i )
            point[i] = axes[i][counter[i]];
        if ( holds_violation( condition, evaluator.output( point ), strict ) )
            return point;

        std::size_t axis = n;
        while ( axis > 0 )
        {
            --axis;
            if ( ++counter[axis] < axes[axis].size() )
                break;
            counter[axis] = 0;
            if ( axis == 0 )
                return std::nullopt;
        }
        if ( n == 0 )
            return std::nullopt;
    }
}

} // namespace incdec
