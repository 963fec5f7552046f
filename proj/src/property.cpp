#include "incdec/property.hpp"

#include "incdec/error.hpp"
#include "incdec/sexpr.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace incdec {

bool InputRegion::contains( std::span<const double> point ) const
{
    if ( point.size() != size() )
        return false;
    for ( std::size_t i = 0; i < point.size(); ++i )
        if ( !( lower[i] <= point[i] && point[i] <= upper[i] ) )
            return false;
    return true;
}

void InputRegion::validate() const
{
    if ( lower.size() != upper.size() )
        throw InvalidArgument( "input region bound vectors differ in length" );
    for ( std::size_t i = 0; i < lower.size(); ++i )
    {
        if ( !std::isfinite( lower[i] ) || !std::isfinite( upper[i] ) )
            throw InvalidArgument( "input X_" + std::to_string( i ) + " has a non-finite bound" );
        if ( lower[i] > upper[i] )
            throw InvalidArgument( "input X_" + std::to_string( i ) + " has an empty range [" +
                                   shortest_decimal( lower[i] ) + ", " + shortest_decimal( upper[i] ) + "]" );
    }
}

double OutputAtom::lhs( std::span<const double> output ) const
{
    double sum = 0.0;
    for ( const auto &[index, coefficient] : terms )
        sum += coefficient * output[index];
    return sum;
}

bool OutputAtom::holds( std::span<const double> output, bool strict ) const
{
    double value = lhs( output );
    if ( relation == Relation::GreaterEqual )
        return strict ? value > rhs : value >= rhs;
    return strict ? value < rhs : value <= rhs;
}

OutputAtom OutputAtom::as_greater_equal() const
{
    if ( relation == Relation::GreaterEqual )
        return *this;
    OutputAtom flipped;
    flipped.relation = Relation::GreaterEqual;
    flipped.rhs = -rhs;
    for ( const auto &[index, coefficient] : terms )
        flipped.terms.emplace_back( index, -coefficient );
    return flipped;
}

void ViolationCondition::validate( std::size_t output_count ) const
{
    if ( disjuncts.empty() )
        throw InvalidArgument( "violation condition has no disjunct" );
    for ( const auto &conjunction : disjuncts )
    {
        if ( conjunction.empty() )
            throw InvalidArgument( "violation condition has an empty disjunct" );
        for ( const auto &atom : conjunction )
            for ( const auto &[index, coefficient] : atom.terms )
            {
                if ( index >= output_count )
                    throw InvalidArgument( "violation condition references Y_" + std::to_string( index ) +
                                           " but the network has " + std::to_string( output_count ) +
                                           " outputs" );
                if ( !std::isfinite( coefficient ) )
                    throw InvalidArgument( "non-finite coefficient in violation condition" );
            }
    }
}

namespace {

// Linear combination of X and Y variables plus a constant, exact.
struct LinearForm
{
    std::map<std::size_t, Rational> inputs;
    std::map<std::size_t, Rational> outputs;
    Rational constant;

    bool is_constant() const { return inputs.empty() && outputs.empty(); }

    void add( const LinearForm &other, const Rational &scale )
    {
        for ( const auto &[i, c] : other.inputs )
            accumulate( inputs, i, c * scale );
        for ( const auto &[j, c] : other.outputs )
            accumulate( outputs, j, c * scale );
        constant += other.constant * scale;
    }

    static void accumulate( std::map<std::size_t, Rational> &into, std::size_t key, const Rational &value )
    {
        Rational &slot = into[key];
        slot += value;
        if ( sgn( slot ) == 0 )
            into.erase( key );
    }
};

struct RawAtom
{
    LinearForm form; // lhs - rhs
    Relation relation;
    std::size_t line;
};

using Dnf = std::vector<std::vector<RawAtom>>;

Dnf conjoin( const Dnf &left, const Dnf &right )
{
    Dnf result;
    for ( const auto &a : left )
        for ( const auto &b : right )
        {
            auto merged = a;
            merged.insert( merged.end(), b.begin(), b.end() );
            result.push_back( std::move( merged ) );
        }
    return result;
}

class VnnlibReader
{
public:
    Property read( std::string_view text )
    {
        std::vector<SExpr> commands = parse_sexprs( text );
        std::vector<std::pair<Dnf, std::size_t>> assertions;
        for ( const SExpr &command : commands )
        {
            if ( command.is_atom || command.items.empty() || !command.items[0].is_atom )
                throw ParseError( "expected a command, found '" + command.to_string() + "'", command.line );
            const std::string &head = command.items[0].atom;
            if ( head == "declare-const" )
                declare( command );
            else if ( head == "assert" )
            {
                if ( command.items.size() != 2 )
                    throw ParseError( "assert takes one formula", command.line );
                assertions.emplace_back( formula( command.items[1] ), command.line );
            }
            else if ( head == "set-logic" || head == "set-info" || head == "check-sat" || head == "exit" )
                continue;
            else
                throw ParseError( "unsupported construct '" + head + "'", command.line );
        }

        std::size_t input_count = contiguous( _inputs, "X" );
        std::size_t output_count = contiguous( _outputs, "Y" );

        std::vector<std::optional<Rational>> lower( input_count );
        std::vector<std::optional<Rational>> upper( input_count );
        Dnf condition{ {} };
        bool has_output_constraint = false;

        for ( auto &[dnf, line] : assertions )
        {
            bool mentions_inputs = false;
            bool mentions_outputs = false;
            for ( const auto &conjunction : dnf )
                for ( const auto &atom : conjunction )
                {
                    mentions_inputs |= !atom.form.inputs.empty();
                    mentions_outputs |= !atom.form.outputs.empty();
                    if ( !atom.form.inputs.empty() && !atom.form.outputs.empty() )
                        throw ParseError( "unsupported construct: constraint mixes X and Y variables", atom.line );
                }

            Dnf pruned = prune_constant_atoms( dnf );
            if ( mentions_inputs )
            {
                if ( pruned.size() != 1 )
                    throw ParseError( "unsupported construct: disjunctive input constraints", line );
                for ( const auto &atom : pruned.front() )
                    bound( atom, lower, upper );
            }
            else if ( mentions_outputs )
            {
                has_output_constraint = true;
                condition = conjoin( condition, pruned );
            }
            else if ( pruned.empty() )
                throw ParseError( "assertion is constantly false", line );
        }

        Property property;
        property.output_count = output_count;
        for ( std::size_t i = 0; i < input_count; ++i )
        {
            if ( !lower[i] || !upper[i] )
                throw ParseError( "unbounded input variable X_" + std::to_string( i ) );
            property.region.lower.push_back( to_double( *lower[i] ) );
            property.region.upper.push_back( to_double( *upper[i] ) );
            if ( *lower[i] > *upper[i] )
                throw ParseError( "empty input range for X_" + std::to_string( i ) );
        }
        if ( !has_output_constraint )
            throw ParseError( "no output constraint asserted" );
        if ( condition.empty() )
            throw ParseError( "output constraint is constantly false" );
        for ( const auto &conjunction : condition )
        {
            Conjunction atoms;
            for ( const auto &raw : conjunction )
            {
                OutputAtom atom;
                atom.relation = raw.relation;
                atom.rhs = to_double( -raw.form.constant );
                for ( const auto &[j, c] : raw.form.outputs )
                    atom.terms.emplace_back( j, to_double( c ) );
                atoms.push_back( std::move( atom ) );
            }
            if ( atoms.empty() )
                throw ParseError( "output constraint is constantly true" );
            property.condition.disjuncts.push_back( std::move( atoms ) );
        }
        return property;
    }

private:
    std::map<std::size_t, bool> _inputs;
    std::map<std::size_t, bool> _outputs;

    static std::optional<std::pair<char, std::size_t>> variable_name( const std::string &name )
    {
        if ( name.size() < 3 || ( name[0] != 'X' && name[0] != 'Y' ) || name[1] != '_' )
            return std::nullopt;
        std::size_t index = 0;
        for ( std::size_t k = 2; k < name.size(); ++k )
        {
            if ( name[k] < '0' || name[k] > '9' )
                return std::nullopt;
            index = index * 10 + static_cast<std::size_t>( name[k] - '0' );
        }
        return std::make_pair( name[0], index );
    }

    void declare( const SExpr &command )
    {
        if ( command.items.size() != 3 || !command.items[1].is_atom || !command.items[2].is_symbol( "Real" ) )
            throw ParseError( "expected (declare-const <name> Real)", command.line );
        auto name = variable_name( command.items[1].atom );
        if ( !name )
            throw ParseError( "unsupported variable name '" + command.items[1].atom + "' (expected X_i or Y_j)",
                              command.line );
        ( name->first == 'X' ? _inputs : _outputs )[name->second] = true;
    }

    static std::size_t contiguous( const std::map<std::size_t, bool> &declared, const char *prefix )
    {
        std::size_t expected = 0;
        for ( const auto &entry : declared )
        {
            if ( entry.first != expected )
                throw ParseError( std::string( "missing declaration of " ) + prefix + "_" +
                                  std::to_string( expected ) );
            ++expected;
        }
        if ( expected == 0 )
            throw ParseError( std::string( "no " ) + prefix + "_ variables declared" );
        return expected;
    }

    LinearForm term( const SExpr &expr )
    {
        LinearForm form;
        if ( expr.is_atom )
        {
            if ( auto name = variable_name( expr.atom ) )
            {
                auto &declared = name->first == 'X' ? _inputs : _outputs;
                if ( !declared.count( name->second ) )
                    throw ParseError( "unknown identifier '" + expr.atom + "'", expr.line );
                ( name->first == 'X' ? form.inputs : form.outputs )[name->second] = 1;
                return form;
            }
            try
            {
                form.constant = parse_decimal( expr.atom );
            }
            catch ( const ParseError & )
            {
                throw ParseError( "unknown identifier '" + expr.atom + "'", expr.line );
            }
            return form;
        }

        if ( expr.items.empty() || !expr.items[0].is_atom )
            throw ParseError( "malformed term '" + expr.to_string() + "'", expr.line );
        const std::string &op = expr.items[0].atom;
        std::size_t arity = expr.items.size() - 1;
        if ( op == "+" && arity >= 1 )
        {
            for ( std::size_t k = 1; k < expr.items.size(); ++k )
                form.add( term( expr.items[k] ), 1 );
            return form;
        }
        if ( op == "-" && arity >= 1 )
        {
            LinearForm first = term( expr.items[1] );
            if ( arity == 1 )
            {
                form.add( first, -1 );
                return form;
            }
            form.add( first, 1 );
            for ( std::size_t k = 2; k < expr.items.size(); ++k )
                form.add( term( expr.items[k] ), -1 );
            return form;
        }
        if ( op == "*" && arity >= 2 )
        {
            form.constant = 1;
            for ( std::size_t k = 1; k < expr.items.size(); ++k )
            {
                LinearForm factor = term( expr.items[k] );
                if ( form.is_constant() )
                {
                    LinearForm scaled;
                    scaled.add( factor, form.constant );
                    form = std::move( scaled );
                }
                else if ( factor.is_constant() )
                {
                    LinearForm scaled;
                    scaled.add( form, factor.constant );
                    form = std::move( scaled );
                }
                else
                    throw ParseError( "unsupported construct: nonlinear term '" + expr.to_string() + "'",
                                      expr.line );
            }
            return form;
        }
        throw ParseError( "unsupported construct '" + op + "'", expr.line );
    }

    Dnf formula( const SExpr &expr )
    {
        if ( expr.is_atom || expr.items.empty() || !expr.items[0].is_atom )
            throw ParseError( "malformed formula '" + expr.to_string() + "'", expr.line );
        const std::string &op = expr.items[0].atom;
        std::size_t arity = expr.items.size() - 1;
        if ( ( op == "<=" || op == ">=" ) && arity >= 2 )
        {
            Relation relation = op == ">=" ? Relation::GreaterEqual : Relation::LessEqual;
            std::vector<RawAtom> chain;
            for ( std::size_t k = 1; k + 1 < expr.items.size(); ++k )
            {
                RawAtom atom{ term( expr.items[k] ), relation, expr.line };
                atom.form.add( term( expr.items[k + 1] ), -1 );
                chain.push_back( std::move( atom ) );
            }
            return Dnf{ std::move( chain ) };
        }
        if ( op == "and" && arity >= 1 )
        {
            Dnf result{ {} };
            for ( std::size_t k = 1; k < expr.items.size(); ++k )
                result = conjoin( result, formula( expr.items[k] ) );
            return result;
        }
        if ( op == "or" && arity >= 1 )
        {
            Dnf result;
            for ( std::size_t k = 1; k < expr.items.size(); ++k )
            {
                Dnf part = formula( expr.items[k] );
                result.insert( result.end(), part.begin(), part.end() );
            }
            return result;
        }
        throw ParseError( "unsupported construct '" + op + "'", expr.line );
    }

    static bool constant_holds( const RawAtom &atom )
    {
        int sign = sgn( atom.form.constant );
        return atom.relation == Relation::GreaterEqual ? sign >= 0 : sign <= 0;
    }

    static Dnf prune_constant_atoms( const Dnf &dnf )
    {
        Dnf result;
        for ( const auto &conjunction : dnf )
        {
            std::vector<RawAtom> kept;
            bool feasible = true;
            for ( const auto &atom : conjunction )
            {
                if ( !atom.form.is_constant() )
                    kept.push_back( atom );
                else if ( !constant_holds( atom ) )
                    feasible = false;
            }
            if ( feasible )
                result.push_back( std::move( kept ) );
        }
        return result;
    }

    static void bound( const RawAtom &atom, std::vector<std::optional<Rational>> &lower,
                       std::vector<std::optional<Rational>> &upper )
    {
        if ( atom.form.inputs.size() != 1 )
            throw ParseError( "unsupported construct: general linear input constraints (only per-variable "
                              "bounds are allowed)",
                              atom.line );
        auto [index, coefficient] = *atom.form.inputs.begin();
        // coefficient * X + constant (>= | <=) 0
        Rational value = -atom.form.constant / coefficient;
        bool is_lower = ( atom.relation == Relation::GreaterEqual ) == ( sgn( coefficient ) > 0 );
        if ( is_lower )
        {
            if ( !lower[index] || value > *lower[index] )
                lower[index] = value;
        }
        else if ( !upper[index] || value < *upper[index] )
            upper[index] = value;
    }
};

std::string literal( double value )
{
    if ( value < 0 )
        return "(- " + shortest_decimal( -value ) + ")";
    return shortest_decimal( value );
}

std::string atom_text( const OutputAtom &atom )
{
    std::vector<std::string> parts;
    for ( const auto &[j, c] : atom.terms )
    {
        std::string name = "Y_" + std::to_string( j );
        if ( c == 1.0 )
            parts.push_back( name );
        else if ( c == -1.0 )
            parts.push_back( "(- " + name + ")" );
        else
            parts.push_back( "(* " + literal( c ) + " " + name + ")" );
    }
    std::string lhs;
    if ( parts.empty() )
        lhs = "0";
    else if ( parts.size() == 1 )
        lhs = parts.front();
    else
    {
        lhs = "(+";
        for ( const auto &p : parts )
            lhs += " " + p;
        lhs += ")";
    }
    return std::string( atom.relation == Relation::GreaterEqual ? "(>= " : "(<= " ) + lhs + " " +
           literal( atom.rhs ) + ")";
}

} // namespace

Property parse_vnnlib( std::string_view text )
{
    return VnnlibReader().read( text );
}

Property load_vnnlib( const std::filesystem::path &path )
{
    std::ifstream in( path );
    if ( !in )
        throw InvalidArgument( "cannot open property file " + path.string() );
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_vnnlib( buffer.str() );
}

std::string write_vnnlib( const Property &property )
{
    std::ostringstream out;
    for ( std::size_t i = 0; i < property.region.size(); ++i )
        out << "(declare-const X_" << i << " Real)\n";
    for ( std::size_t j = 0; j < property.output_count; ++j )
        out << "(declare-const Y_" << j << " Real)\n";
    out << '\n';
    for ( std::size_t i = 0; i < property.region.size(); ++i )
    {
        out << "(assert (>= X_" << i << ' ' << literal( property.region.lower[i] ) << "))\n";
        out << "(assert (<= X_" << i << ' ' << literal( property.region.upper[i] ) << "))\n";
    }
    out << '\n';
    const auto &disjuncts = property.condition.disjuncts;
    if ( disjuncts.size() == 1 )
    {
        for ( const auto &atom : disjuncts.front() )
            out << "(assert " << atom_text( atom ) << ")\n";
    }
    else
    {
        out << "(assert (or";
        for ( const auto &conjunction : disjuncts )
        {
            out << "\n    (and";
            for ( const auto &atom : conjunction )
                out << ' ' << atom_text( atom );
            out << ')';
        }
        out << "))\n";
    }
    return out.str();
}

OutputSeed seed_output_labels( const Conjunction &disjunct, std::size_t output_count, std::size_t index )
{
    std::vector<bool> up( output_count, false );
    std::vector<bool> down( output_count, false );
    for ( const auto &atom : disjunct )
        for ( const auto &[j, c] : atom.as_greater_equal().terms )
        {
            if ( j >= output_count )
                throw InvalidArgument( "atom references Y_" + std::to_string( j ) + " beyond the output layer" );
            if ( c > 0 )
                up[j] = true;
            else if ( c < 0 )
                down[j] = true;
        }

    OutputSeed seed;
    seed.disjunct = index;
    for ( std::size_t j = 0; j < output_count; ++j )
    {
        if ( up[j] && down[j] )
            seed.labels.push_back( Label::Mixed );
        else if ( up[j] )
            seed.labels.push_back( Label::Inc );
        else if ( down[j] )
            seed.labels.push_back( Label::Dec );
        else
            seed.labels.push_back( Label::Inert );
    }
    return seed;
}

Property robustness_query( std::span<const double> center, std::span<const double> radii,
                           std::size_t original_class, std::size_t target_class, std::size_t output_count,
                           double margin )
{
    if ( radii.size() != center.size() )
        throw InvalidArgument( "radius vector length differs from the input length" );
    if ( original_class >= output_count || target_class >= output_count )
        throw InvalidArgument( "class index out of range" );
    if ( original_class == target_class )
        throw InvalidArgument( "target class equals the original class" );

    Property property;
    property.output_count = output_count;
    for ( std::size_t i = 0; i < center.size(); ++i )
    {
        if ( !( radii[i] >= 0 ) )
            throw InvalidArgument( "perturbation radius must be non-negative" );
        Rational x = to_rational( center[i] );
        Rational r = to_rational( radii[i] );
        property.region.lower.push_back( to_double( x - r ) );
        property.region.upper.push_back( to_double( x + r ) );
    }

    OutputAtom atom;
    atom.relation = Relation::GreaterEqual;
    atom.rhs = margin;
    atom.terms = { { target_class, 1.0 }, { original_class, -1.0 } };
    std::sort( atom.terms.begin(), atom.terms.end() );
    property.condition.disjuncts.push_back( { atom } );
    return property;
}

Property robustness_query( std::span<const double> center, double radius, std::size_t original_class,
                           std::size_t target_class, std::size_t output_count, double margin )
{
    std::vector<double> radii( center.size(), radius );
    return robustness_query( center, radii, original_class, target_class, output_count, margin );
}

bool holds_violation( const ViolationCondition &condition, std::span<const double> output, bool strict )
{
    for ( const auto &conjunction : condition.disjuncts )
    {
        bool all = true;
        for ( const auto &atom : conjunction )
            if ( !atom.holds( output, strict ) )
            {
                all = false;
                break;
            }
        if ( all )
            return true;
    }
    return false;
}

Property normalize_property( const Normalization &normalization, const Property &property )
{
    std::size_t n = property.region.size();
    if ( normalization.mins.size() < n || normalization.means.size() < n + 1 || normalization.ranges.size() < n + 1 )
        throw InvalidArgument( "normalization record does not cover the property's inputs" );

    Property result = property;
    for ( std::size_t i = 0; i < n; ++i )
    {
        auto scale = [&] ( double raw ) {
            double clipped = std::clamp( raw, normalization.mins[i], normalization.maxes[i] );
            return ( clipped - normalization.means[i] ) / normalization.ranges[i];
        };
        result.region.lower[i] = scale( property.region.lower[i] );
        result.region.upper[i] = scale( property.region.upper[i] );
    }

    double out_mean = normalization.means[n];
    double out_range = normalization.ranges[n];
    for ( auto &conjunction : result.condition.disjuncts )
        for ( auto &atom : conjunction )
        {
            double coefficient_sum = 0.0;
            for ( auto &[j, c] : atom.terms )
            {
                coefficient_sum += c;
                c *= out_range;
            }
            atom.rhs -= out_mean * coefficient_sum;
        }
    return result;
}

} // namespace incdec
