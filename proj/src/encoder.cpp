#include "incdec/encoder.hpp"

#include "incdec/error.hpp"

#include <sstream>

namespace incdec {

std::string Variable::name() const
{
    if ( layer == 0 )
        return "x_" + std::to_string( index );
    return std::string( post ? "a_" : "z_" ) + std::to_string( layer ) + "_" + std::to_string( index );
}

std::vector<Variable> Query::wanted() const
{
    std::vector<Variable> result;
    for ( std::size_t i : encoding.free_inputs )
        result.push_back( { 0, i, false } );
    return result;
}

SubgraphEncoding encode_subgraph( const Dnn &dnn, std::size_t layer, const PartialAssignment &assignment )
{
    if ( layer < 1 || layer > dnn.output_layer() )
        throw InvalidArgument( "truncation layer must lie in 1.." + std::to_string( dnn.output_layer() ) );
    if ( assignment.pinned.size() != dnn.input_size() || assignment.region.size() != dnn.input_size() )
        throw InvalidArgument( "partial assignment does not cover the network inputs" );

    SubgraphEncoding encoding;
    encoding.layer = layer;
    encoding.pinned.resize( dnn.input_size() );
    for ( std::size_t i = 0; i < dnn.input_size(); ++i )
    {
        encoding.bounds.emplace_back( to_rational( assignment.region.lower[i] ),
                                      to_rational( assignment.region.upper[i] ) );
        if ( assignment.pinned[i] )
            encoding.pinned[i] = to_rational( *assignment.pinned[i] );
        else
            encoding.free_inputs.push_back( i );
    }

    for ( std::size_t l = 1; l <= layer; ++l )
    {
        std::vector<LinearExpr> exprs( dnn.layer_size( l ) );
        for ( std::size_t j = 0; j < dnn.layer_size( l ); ++j )
        {
            LinearExpr &expr = exprs[j];
            expr.constant = dnn.exact_bias( l, j );
            for ( std::size_t k = 0; k < dnn.layer_size( l - 1 ); ++k )
            {
                const Rational &w = dnn.exact_weight( l, j, k );
                if ( sgn( w ) == 0 )
                    continue;
                if ( l == 1 && encoding.pinned[k] )
                    expr.constant += w * *encoding.pinned[k];
                else
                    expr.terms.emplace_back( Variable{ l - 1, k, l > 1 }, w );
            }
        }
        encoding.pre.push_back( std::move( exprs ) );
    }
    return encoding;
}

LinearExpr build_objective( const LabelMap &labels, std::size_t layer )
{
    LinearExpr objective;
    const auto &row = labels.layers.at( layer );
    for ( std::size_t j = 0; j < row.size(); ++j )
        if ( row[j] == Label::Inc )
            objective.terms.emplace_back( Variable{ layer, j, false }, Rational( 1 ) );
    for ( std::size_t j = 0; j < row.size(); ++j )
        if ( row[j] == Label::Dec )
            objective.terms.emplace_back( Variable{ layer, j, false }, Rational( -1 ) );
    if ( objective.terms.empty() )
        throw EmptyObjective( layer );
    return objective;
}

namespace {

template <typename Value, typename Convert>
std::vector<Inequality> soft_constraints( const std::vector<Value> &values, const LabelMap &labels,
                                          std::size_t layer, Convert convert )
{
    const auto &row = labels.layers.at( layer );
    if ( values.size() != row.size() )
        throw InvalidArgument( "trace and label map disagree on the size of layer " + std::to_string( layer ) );
    std::vector<Inequality> result;
    for ( std::size_t j = 0; j < row.size(); ++j )
    {
        if ( row[j] != Label::Inc && row[j] != Label::Dec )
            continue;
        Inequality soft;
        soft.lhs.terms.emplace_back( Variable{ layer, j, false }, Rational( 1 ) );
        soft.relation = row[j] == Label::Inc ? Relation::GreaterEqual : Relation::LessEqual;
        soft.rhs = convert( values[j] );
        result.push_back( std::move( soft ) );
    }
    return result;
}

} // namespace

std::vector<Inequality> soft_constraints_from( const ExactTrace &trace, const LabelMap &labels, std::size_t layer )
{
    return soft_constraints( trace.pre.at( layer ), labels, layer, [] ( const Rational &v ) { return v; } );
}

std::vector<Inequality> soft_constraints_from( const EvalTrace &trace, const LabelMap &labels, std::size_t layer )
{
    return soft_constraints( trace.pre.at( layer ), labels, layer, [] ( double v ) { return to_rational( v ); } );
}

BlockingConstraint blocking_constraint( std::vector<std::pair<std::size_t, Rational>> free_values,
                                        const Rational &radius )
{
    if ( sgn( radius ) <= 0 )
        throw InvalidArgument( "blocking radius must be positive" );
    return BlockingConstraint{ std::move( free_values ), radius };
}

std::vector<Inequality> violation_constraints( const Conjunction &disjunct, std::size_t output_layer )
{
    std::vector<Inequality> result;
    for ( const auto &atom : disjunct )
    {
        Inequality inequality;
        inequality.relation = atom.relation;
        inequality.rhs = to_rational( atom.rhs );
        for ( const auto &[j, c] : atom.terms )
            inequality.lhs.terms.emplace_back( Variable{ output_layer, j, false }, to_rational( c ) );
        result.push_back( std::move( inequality ) );
    }
    return result;
}

Rational default_blocking_radius( const PartialAssignment &assignment, std::size_t iterations )
{
    std::optional<Rational> narrowest;
    for ( std::size_t i : assignment.free_inputs() )
    {
        Rational width = to_rational( assignment.region.upper[i] ) - to_rational( assignment.region.lower[i] );
        if ( sgn( width ) > 0 && ( !narrowest || width < *narrowest ) )
            narrowest = width;
    }
    if ( !narrowest )
        return Rational( 1, 1000000 );
    Rational radius = *narrowest / Rational( std::max<std::size_t>( iterations, 1 ) );
    radius.canonicalize();
    return radius;
}

namespace {

std::string term_text( const Variable &variable, const Rational &coefficient )
{
    if ( coefficient == 1 )
        return variable.name();
    if ( coefficient == -1 )
        return "(- " + variable.name() + ")";
    return "(* " + smt_literal( coefficient ) + " " + variable.name() + ")";
}

std::string expr_text( const LinearExpr &expr )
{
    std::vector<std::string> parts;
    for ( const auto &[variable, coefficient] : expr.terms )
        parts.push_back( term_text( variable, coefficient ) );
    if ( sgn( expr.constant ) != 0 || parts.empty() )
        parts.push_back( smt_literal( expr.constant ) );
    if ( parts.size() == 1 )
        return parts.front();
    std::string out = "(+";
    for ( const auto &part : parts )
        out += " " + part;
    return out + ")";
}

std::string inequality_text( const Inequality &inequality )
{
    return std::string( inequality.relation == Relation::GreaterEqual ? "(>= " : "(<= " ) +
           expr_text( inequality.lhs ) + " " + smt_literal( inequality.rhs ) + ")";
}

std::string blocking_text( const BlockingConstraint &block )
{
    std::string out = "(or";
    for ( const auto &[input, value] : block.center )
    {
        std::string name = Variable{ 0, input, false }.name();
        out += " (<= " + name + " " + smt_literal( value - block.radius ) + ")";
        out += " (>= " + name + " " + smt_literal( value + block.radius ) + ")";
    }
    return out + ")";
}

} // namespace

std::string emit_smtlib( const Query &query )
{
    const SubgraphEncoding &encoding = query.encoding;
    std::ostringstream out;
    out << "; truncation layer " << encoding.layer << "\n";
    out << "(set-option :opt.priority lex)\n";
    out << "(set-logic QF_LRA)\n";

    for ( std::size_t i : encoding.free_inputs )
        out << "(declare-const " << Variable{ 0, i, false }.name() << " Real)\n";
    for ( std::size_t l = 1; l <= encoding.layer; ++l )
    {
        for ( std::size_t j = 0; j < encoding.pre[l - 1].size(); ++j )
        {
            out << "(declare-const " << Variable{ l, j, false }.name() << " Real)\n";
            if ( l < encoding.layer )
                out << "(declare-const " << Variable{ l, j, true }.name() << " Real)\n";
        }
    }

    for ( std::size_t i : encoding.free_inputs )
    {
        std::string name = Variable{ 0, i, false }.name();
        out << "(assert (and (<= " << smt_literal( encoding.bounds[i].first ) << " " << name << ") (<= " << name
            << " " << smt_literal( encoding.bounds[i].second ) << ")))\n";
    }
    for ( std::size_t l = 1; l <= encoding.layer; ++l )
    {
        for ( std::size_t j = 0; j < encoding.pre[l - 1].size(); ++j )
        {
            std::string pre = Variable{ l, j, false }.name();
            out << "(assert (= " << pre << " " << expr_text( encoding.pre[l - 1][j] ) << "))\n";
            if ( l < encoding.layer )
                out << "(assert (= " << Variable{ l, j, true }.name() << " (ite (>= " << pre << " 0.0) " << pre
                    << " 0.0)))\n";
        }
    }

    for ( const auto &inequality : query.violation )
        out << "(assert " << inequality_text( inequality ) << ")\n";
    for ( const auto &block : query.blocking )
        out << "(assert " << blocking_text( block ) << ")\n";

    auto soft_lines = [&] {
        for ( const auto &soft : query.soft )
            out << "(assert-soft " << inequality_text( soft ) << " :weight 1)\n";
    };
    switch ( query.priority )
    {
    case Priority::LexObjective:
        if ( query.objective )
            out << "(maximize " << expr_text( *query.objective ) << ")\n";
        soft_lines();
        break;
    case Priority::LexSoft:
        soft_lines();
        if ( query.objective )
            out << "(maximize " << expr_text( *query.objective ) << ")\n";
        break;
    case Priority::Weighted:
        if ( query.objective || !query.soft.empty() )
        {
            out << "(maximize (+ " << ( query.objective ? expr_text( *query.objective ) : "0.0" );
            for ( const auto &soft : query.soft )
                out << " (ite " << inequality_text( soft ) << " 1.0 0.0)";
            out << "))\n";
        }
        break;
    }

    out << "(check-sat)\n";
    if ( !encoding.free_inputs.empty() )
    {
        out << "(get-value (";
        for ( std::size_t k = 0; k < encoding.free_inputs.size(); ++k )
            out << ( k ? " " : "" ) << Variable{ 0, encoding.free_inputs[k], false }.name();
        out << "))\n";
    }
    return out.str();
}

namespace {

bool holds( const Rational &lhs, Relation relation, const Rational &rhs )
{
    return relation == Relation::GreaterEqual ? lhs >= rhs : lhs <= rhs;
}

} // namespace

QueryEvaluation evaluate_query( const Query &query, std::span<const Rational> free_values )
{
    const SubgraphEncoding &encoding = query.encoding;
    if ( free_values.size() != encoding.free_inputs.size() )
        throw InvalidArgument( "assignment covers " + std::to_string( free_values.size() ) + " of " +
                               std::to_string( encoding.free_inputs.size() ) + " free inputs" );

    QueryEvaluation result;
    result.inputs.resize( encoding.pinned.size() );
    for ( std::size_t i = 0; i < encoding.pinned.size(); ++i )
        if ( encoding.pinned[i] )
            result.inputs[i] = *encoding.pinned[i];
    for ( std::size_t k = 0; k < free_values.size(); ++k )
    {
        std::size_t i = encoding.free_inputs[k];
        result.inputs[i] = free_values[k];
        const auto &[low, high] = encoding.bounds[i];
        if ( result.failure.empty() && ( free_values[k] < low || free_values[k] > high ) )
            result.failure = "input " + Variable{ 0, i, false }.name() + " outside its bounds";
    }

    std::vector<std::vector<Rational>> post;
    auto value_of = [&] ( const Variable &v ) -> const Rational & {
        if ( v.layer == 0 )
            return result.inputs[v.index];
        return v.post ? post[v.layer - 1][v.index] : result.pre[v.layer - 1][v.index];
    };
    auto evaluate = [&] ( const LinearExpr &expr ) {
        Rational sum = expr.constant;
        for ( const auto &[variable, coefficient] : expr.terms )
            sum += coefficient * value_of( variable );
        return sum;
    };

    for ( std::size_t l = 1; l <= encoding.layer; ++l )
    {
        std::vector<Rational> pre;
        std::vector<Rational> activated;
        for ( const auto &expr : encoding.pre[l - 1] )
        {
            pre.push_back( evaluate( expr ) );
            activated.push_back( sgn( pre.back() ) < 0 ? Rational( 0 ) : pre.back() );
        }
        result.pre.push_back( std::move( pre ) );
        post.push_back( std::move( activated ) );
    }

    for ( std::size_t k = 0; k < query.violation.size() && result.failure.empty(); ++k )
    {
        const auto &atom = query.violation[k];
        if ( !holds( evaluate( atom.lhs ), atom.relation, atom.rhs ) )
            result.failure = "violation atom " + std::to_string( k ) + " does not hold";
    }
    for ( std::size_t b = 0; b < query.blocking.size() && result.failure.empty(); ++b )
    {
        const auto &block = query.blocking[b];
        bool escaped = false;
        for ( const auto &[input, centre] : block.center )
        {
            const Rational &v = result.inputs[input];
            if ( v <= centre - block.radius || v >= centre + block.radius )
                escaped = true;
        }
        if ( !escaped )
            result.failure = "blocking constraint " + std::to_string( b ) + " does not hold";
    }

    if ( query.objective )
        result.objective = evaluate( *query.objective );
    for ( const auto &soft : query.soft )
        if ( holds( evaluate( soft.lhs ), soft.relation, soft.rhs ) )
            ++result.soft_satisfied;
    return result;
}

} // namespace incdec
