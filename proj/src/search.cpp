#include "incdec/search.hpp"

#include "incdec/error.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

namespace incdec {

std::string format_iteration( const IterationRecord &record )
{
    std::ostringstream out;
    out << "iter=" << record.iteration << " layer=" << record.layer << " disjunct=" << record.disjunct
        << " answer=" << outcome_name( record.answer ) << " objective="
        << ( record.objective ? to_string( *record.objective ) : "-" ) << " soft=" << record.soft_satisfied << '/'
        << record.soft_total << " input=";
    for ( std::size_t k = 0; k < record.candidate.size(); ++k )
        out << ( k ? ";" : "" ) << shortest_decimal( record.candidate[k] );
    if ( record.candidate.empty() )
        out << '-';
    out << " verdict="
        << ( record.violated ? "violated" : record.answer == SolverOutcome::Kind::Sat ? "continue" : "stop" );
    return out.str();
}

void SearchConfig::validate( std::size_t output_layer ) const
{
    if ( iterations < 1 )
        throw InvalidArgument( "iteration cap must be at least 1" );
    if ( !( budget_s > 0 ) )
        throw InvalidArgument( "time budget must be positive" );
    if ( epsilon && sgn( *epsilon ) <= 0 )
        throw InvalidArgument( "blocking radius must be positive" );
    if ( schedule.empty() && !complete )
        throw InvalidArgument( "truncation schedule is empty" );
    for ( std::size_t k = 0; k < schedule.size(); ++k )
    {
        if ( schedule[k] < 1 || schedule[k] > output_layer )
            throw InvalidArgument( "truncation layer " + std::to_string( schedule[k] ) + " outside 1.." +
                                   std::to_string( output_layer ) );
        if ( k && schedule[k] <= schedule[k - 1] )
            throw InvalidArgument( "truncation schedule must be strictly increasing" );
    }
    solver.validate();
}

std::vector<std::size_t> SearchConfig::effective_schedule( std::size_t output_layer ) const
{
    std::vector<std::size_t> layers = schedule;
    if ( escalate )
        for ( std::size_t l = layers.empty() ? 1 : layers.back() + 1; l <= output_layer; ++l )
            layers.push_back( l );
    if ( complete && ( layers.empty() || layers.back() != output_layer ) )
        layers.push_back( output_layer );
    return layers;
}

std::string_view verdict_name( Verdict::Kind kind )
{
    switch ( kind )
    {
    case Verdict::Kind::Violated:
        return "violated";
    case Verdict::Kind::Holds:
        return "holds";
    case Verdict::Kind::Unknown:
        return "unknown";
    }
    return "?";
}

std::string_view reason_name( Verdict::Reason reason )
{
    switch ( reason )
    {
    case Verdict::Reason::None:
        return "none";
    case Verdict::Reason::IterationsExhausted:
        return "iterations-exhausted";
    case Verdict::Reason::Timeout:
        return "timeout";
    case Verdict::Reason::EmptyObjective:
        return "empty-objective";
    case Verdict::Reason::SearchSpaceExhausted:
        return "search-space-exhausted";
    }
    return "?";
}

namespace {

using Clock = std::chrono::steady_clock;

// Shared clock and call accounting for one top-level request.
class Session
{
public:
    Session( const SearchConfig &config )
        : _config( config )
        , _start( Clock::now() )
        , _deadline( _start + std::chrono::duration_cast<Clock::duration>( std::chrono::duration<double>( config.budget_s ) ) )
    {
    }

    const SearchConfig &config() const { return _config; }
    double remaining() const { return std::chrono::duration<double>( _deadline - Clock::now() ).count(); }
    double elapsed() const { return std::chrono::duration<double>( Clock::now() - _start ).count(); }

    /// Per-solve timeout: remaining budget spread over the remaining planned
    /// solves, at least one second.
    double solve_timeout( std::size_t planned ) const
    {
        return std::max( 1.0, remaining() / static_cast<double>( std::max<std::size_t>( planned, 1 ) ) );
    }

    std::size_t calls = 0;

private:
    const SearchConfig &_config;
    Clock::time_point _start;
    Clock::time_point _deadline;
};

// Planned solver calls after the current one, for timeout allocation.
struct Plan
{
    std::size_t later_layers = 0;
    std::size_t later_units = 0; // disjuncts or targets still to come, each a full schedule
};

Verdict run_disjunct( Session &session, const Dnn &dnn, const InputRegion &region, const Conjunction &disjunct,
                      std::size_t disjunct_index, const OutputSeed &seed,
                      std::optional<std::span<const double>> center, bool strict, const Plan &plan )
{
    const SearchConfig &config = session.config();
    const std::size_t output_layer = dnn.output_layer();
    const ViolationCondition single{ { disjunct } };

    Verdict verdict;
    verdict.disjunct = disjunct_index;

    auto accept = [&] ( const std::vector<double> &candidate, std::size_t layer ) {
        if ( !region.contains( candidate ) )
            return false;
        EvalTrace trace = evaluate( dnn, candidate );
        if ( !holds_violation( single, trace.output(), strict ) )
            return false;
        verdict.kind = Verdict::Kind::Violated;
        verdict.reason = Verdict::Reason::None;
        verdict.counterexample = candidate;
        verdict.output = trace.output();
        verdict.layer = layer;
        return true;
    };

    LabelMap labels = propagate_labels( dnn, seed );
    PartialAssignment assignment = fix_labeled_inputs( region, labels, center );
    // Zero-width free inputs leave nothing to search over.
    bool degenerate = true;
    for ( std::size_t i : assignment.free_inputs() )
        degenerate = degenerate && region.lower[i] == region.upper[i];
    if ( degenerate )
        for ( std::size_t i : assignment.free_inputs() )
            assignment.pinned[i] = region.lower[i];
    std::vector<std::size_t> free_inputs = assignment.free_inputs();
    Rational epsilon = config.epsilon ? *config.epsilon : default_blocking_radius( assignment, config.iterations );

    std::vector<std::size_t> schedule = config.effective_schedule( output_layer );

    if ( free_inputs.empty() )
    {
        std::vector<double> pinned;
        for ( const auto &value : assignment.pinned )
            pinned.push_back( *value );
        if ( accept( pinned, 0 ) )
            return verdict;
        // Nothing left to search unless the complete query can certify Holds.
        if ( config.complete )
            schedule = { output_layer };
        else
        {
            verdict.reason = Verdict::Reason::SearchSpaceExhausted;
            return verdict;
        }
    }

    bool any_objective = false;
    bool timed_out = false;
    bool last_unsat = false;

    for ( std::size_t s = 0; s < schedule.size(); ++s )
    {
        const std::size_t layer = schedule[s];
        const bool decisive = config.complete && layer == output_layer;

        Query query;
        try
        {
            query = initial_query( dnn, labels, assignment, disjunct, layer, config.complete, config.priority );
            any_objective = any_objective || query.objective.has_value();
        }
        catch ( const EmptyObjective & )
        {
            continue;
        }

        std::vector<std::string> wanted;
        for ( const auto &v : query.wanted() )
            wanted.push_back( v.name() );

        last_unsat = false;
        for ( std::size_t it = 1; it <= config.iterations; ++it )
        {
            if ( session.remaining() <= 0 )
            {
                verdict.reason = Verdict::Reason::Timeout;
                verdict.iterations = session.calls;
                return verdict;
            }
            std::size_t planned = ( config.iterations - it + 1 ) +
                                  config.iterations * ( schedule.size() - s - 1 + plan.later_layers ) +
                                  config.iterations * schedule.size() * plan.later_units;
            SolverConfig solver = config.solver;
            solver.timeout_s = session.solve_timeout( planned );

            std::string document = emit_smtlib( query );
            SolverOutcome outcome = solve( solver, document, wanted );
            ++session.calls;

            IterationRecord record;
            record.disjunct = disjunct_index;
            record.layer = layer;
            record.iteration = it;
            record.answer = outcome.kind;
            record.soft_total = query.soft.size();

            if ( outcome.kind == SolverOutcome::Kind::ProcessError )
                throw SolverProcessError( outcome.detail );

            if ( outcome.kind != SolverOutcome::Kind::Sat )
            {
                if ( config.on_iteration )
                    config.on_iteration( record );
                if ( outcome.kind == SolverOutcome::Kind::Unsat )
                {
                    // Only the untouched output-layer query with the
                    // condition asserted is decision-grade.
                    if ( decisive && query.blocking.empty() )
                    {
                        verdict.kind = Verdict::Kind::Holds;
                        verdict.reason = Verdict::Reason::None;
                        verdict.layer = layer;
                        verdict.iterations = session.calls;
                        return verdict;
                    }
                    last_unsat = true;
                }
                else if ( outcome.kind == SolverOutcome::Kind::Timeout )
                    timed_out = true;
                break;
            }

            std::vector<Rational> values;
            for ( const auto &name : wanted )
                values.push_back( outcome.assignment.at( name ) );
            QueryEvaluation evaluation = evaluate_query( query, values );
            if ( !evaluation.satisfies_hard() )
                throw SolverProcessError( "solver model fails the exact re-check: " + evaluation.failure );

            std::vector<double> candidate;
            for ( const auto &v : evaluation.inputs )
                candidate.push_back( to_double( v ) );

            record.objective = evaluation.objective;
            record.soft_satisfied = evaluation.soft_satisfied;
            record.free_values = values;
            record.candidate = candidate;
            record.violated = accept( candidate, layer );
            if ( config.on_iteration )
                config.on_iteration( record );
            if ( record.violated )
            {
                verdict.iterations = session.calls;
                return verdict;
            }

            ExactTrace trace;
            trace.pre.push_back( evaluation.inputs );
            for ( auto &row : evaluation.pre )
                trace.pre.push_back( row );
            std::vector<Inequality> soft = soft_constraints_from( trace, labels, layer );
            if ( config.soft_mode == SoftMode::Replace )
                query.soft = std::move( soft );
            else
                query.soft.insert( query.soft.end(), soft.begin(), soft.end() );

            if ( free_inputs.empty() )
                break; // nothing to block
            std::vector<std::pair<std::size_t, Rational>> point;
            for ( std::size_t k = 0; k < free_inputs.size(); ++k )
                point.emplace_back( free_inputs[k], values[k] );
            query.blocking.push_back( blocking_constraint( std::move( point ), epsilon ) );
        }
    }

    verdict.iterations = session.calls;
    if ( !any_objective && !config.complete )
        verdict.reason = Verdict::Reason::EmptyObjective;
    else if ( timed_out )
        verdict.reason = Verdict::Reason::Timeout;
    else if ( last_unsat )
        verdict.reason = Verdict::Reason::SearchSpaceExhausted;
    else
        verdict.reason = Verdict::Reason::IterationsExhausted;
    return verdict;
}

int severity( const Verdict &verdict )
{
    switch ( verdict.reason )
    {
    case Verdict::Reason::Timeout:
        return 4;
    case Verdict::Reason::IterationsExhausted:
        return 3;
    case Verdict::Reason::SearchSpaceExhausted:
        return 2;
    case Verdict::Reason::EmptyObjective:
        return 1;
    case Verdict::Reason::None:
        return 0;
    }
    return 0;
}

// Combines per-unit results: first Violated wins, Holds needs every unit to
// hold, otherwise the most severe Unknown is reported.
class Combiner
{
public:
    bool add( Verdict verdict )
    {
        _iterations = verdict.iterations;
        if ( verdict.kind == Verdict::Kind::Violated )
        {
            _result = std::move( verdict );
            _done = true;
            return true;
        }
        if ( verdict.kind == Verdict::Kind::Unknown )
        {
            if ( !_unknown || severity( verdict ) > severity( *_unknown ) )
                _unknown = std::move( verdict );
        }
        else if ( !_holds )
            _holds = std::move( verdict );
        return false;
    }

    Verdict result( double seconds ) const
    {
        Verdict verdict;
        if ( _done )
            verdict = _result;
        else if ( _unknown )
            verdict = *_unknown;
        else if ( _holds )
            verdict = *_holds;
        verdict.iterations = _iterations;
        verdict.seconds = seconds;
        return verdict;
    }

private:
    bool _done = false;
    Verdict _result;
    std::optional<Verdict> _unknown;
    std::optional<Verdict> _holds;
    std::size_t _iterations = 0;
};

} // namespace

Query initial_query( const Dnn &dnn, const LabelMap &labels, const PartialAssignment &assignment,
                     const Conjunction &disjunct, std::size_t layer, bool complete, Priority priority )
{
    const bool decisive = complete && layer == dnn.output_layer();
    Query query;
    query.priority = priority;
    try
    {
        query.objective = build_objective( labels, layer );
    }
    catch ( const EmptyObjective & )
    {
        if ( !decisive )
            throw;
    }
    query.encoding = encode_subgraph( dnn, layer, assignment );
    if ( decisive )
        query.violation = violation_constraints( disjunct, dnn.output_layer() );
    return query;
}

Verdict search_disjunct( const Dnn &dnn, const InputRegion &region, const Conjunction &disjunct,
                         const OutputSeed &seed, const SearchConfig &config,
                         std::optional<std::span<const double>> center )
{
    config.validate( dnn.output_layer() );
    region.validate();
    if ( region.size() != dnn.input_size() )
        throw InvalidArgument( "region dimension differs from the network input size" );
    Session session( config );
    Verdict verdict = run_disjunct( session, dnn, region, disjunct, 0, seed, center, config.strict, Plan{} );
    verdict.seconds = session.elapsed();
    return verdict;
}

Verdict find_adversarial( const Dnn &dnn, const InputRegion &region, const ViolationCondition &condition,
                          const SearchConfig &config, std::optional<std::span<const double>> center )
{
    config.validate( dnn.output_layer() );
    region.validate();
    if ( region.size() != dnn.input_size() )
        throw InvalidArgument( "region dimension differs from the network input size" );
    condition.validate( dnn.output_size() );

    Session session( config );
    Combiner combiner;
    for ( std::size_t d = 0; d < condition.disjuncts.size(); ++d )
    {
        const Conjunction &disjunct = condition.disjuncts[d];
        OutputSeed seed = seed_output_labels( disjunct, dnn.output_size(), d );
        Plan plan{ 0, condition.disjuncts.size() - d - 1 };
        if ( combiner.add( run_disjunct( session, dnn, region, disjunct, d, seed, center, config.strict, plan ) ) )
            break;
        if ( session.remaining() <= 0 )
            break;
    }
    return combiner.result( session.elapsed() );
}

Verdict run_targets( const Dnn &dnn, std::span<const double> x, std::span<const double> radii,
                     const SearchConfig &config )
{
    config.validate( dnn.output_layer() );
    std::size_t original = winning_class( evaluate( dnn, x ).output() );

    Session session( config );
    Combiner combiner;
    for ( std::size_t target = 0; target < dnn.output_size(); ++target )
    {
        if ( target == original )
            continue;
        Property property = robustness_query( x, radii, original, target, dnn.output_size() );
        const Conjunction &disjunct = property.condition.disjuncts.front();
        OutputSeed seed = seed_output_labels( disjunct, dnn.output_size() );
        std::size_t later = dnn.output_size() - target - 1 - ( original > target ? 1 : 0 );
        Verdict verdict = run_disjunct( session, dnn, property.region, disjunct, 0, seed, x,
                                        config.strict || target > original, Plan{ 0, later } );
        verdict.target = target;
        if ( combiner.add( std::move( verdict ) ) )
            break;
        if ( session.remaining() <= 0 )
            break;
    }
    return combiner.result( session.elapsed() );
}

Verdict run_targets( const Dnn &dnn, std::span<const double> x, double radius, const SearchConfig &config )
{
    std::vector<double> radii( x.size(), radius );
    return run_targets( dnn, x, radii, config );
}

} // namespace incdec
