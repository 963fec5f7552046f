#pragma once

#include "incdec/exact.hpp"
#include "incdec/labeling.hpp"
#include "incdec/network.hpp"
#include "incdec/property.hpp"

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace incdec {

/// Solver variable: an input (layer 0), or the pre- or post-activation value
/// of a neuron in a later layer. Names are x_j, z_l_j and a_l_j.
struct Variable
{
    std::size_t layer = 0;
    std::size_t index = 0;
    bool post = false;

    std::string name() const;
    auto operator<=>( const Variable & ) const = default;
};

struct LinearExpr
{
    std::vector<std::pair<Variable, Rational>> terms;
    Rational constant;

    bool operator==( const LinearExpr & ) const = default;
};

struct Inequality
{
    LinearExpr lhs;
    Relation relation = Relation::GreaterEqual;
    Rational rhs;

    bool operator==( const Inequality & ) const = default;
};

/// The new point must leave the L-infinity ball of `radius` around `center`:
/// OR over free inputs j of (x_j <= c_j - radius) or (x_j >= c_j + radius).
struct BlockingConstraint
{
    std::vector<std::pair<std::size_t, Rational>> center;
    Rational radius;
};

/// Hard part of a truncated query. Free inputs carry box bounds, pinned
/// inputs are folded into the layer-1 constants, layers below `layer` have
/// ReLU semantics and layer `layer` is represented by its pre-activations.
struct SubgraphEncoding
{
    std::size_t layer = 1;
    std::vector<std::size_t> free_inputs;
    std::vector<std::optional<Rational>> pinned;
    std::vector<std::pair<Rational, Rational>> bounds; // per input, used for free ones
    std::vector<std::vector<LinearExpr>> pre;          // pre[l - 1][j] for l = 1..layer
};

enum class Priority
{
    LexObjective, // maximize first, then soft-constraint satisfaction
    LexSoft,      // soft-constraint satisfaction first, then maximize
    Weighted,     // single objective: Q + number of satisfied soft constraints
};

struct Query
{
    SubgraphEncoding encoding;
    std::optional<LinearExpr> objective;
    std::vector<Inequality> soft;
    std::vector<BlockingConstraint> blocking;
    std::vector<Inequality> violation; // asserted hard (complete mode)
    Priority priority = Priority::LexObjective;

    /// Variables whose values the solver must report: the free inputs.
    std::vector<Variable> wanted() const;
};

/// Thrown by build_objective when no layer-i neuron is labeled Inc or Dec.
class EmptyObjective : public std::runtime_error
{
public:
    explicit EmptyObjective( std::size_t layer )
        : std::runtime_error( "empty objective at layer " + std::to_string( layer ) )
    {
    }
};

SubgraphEncoding encode_subgraph( const Dnn &dnn, std::size_t layer, const PartialAssignment &assignment );

/// Sum of Inc-labeled layer variables minus the sum of Dec-labeled ones.
LinearExpr build_objective( const LabelMap &labels, std::size_t layer );

/// One unit-weight soft constraint per Inc (var >= value) and Dec
/// (var <= value) neuron of `layer`, anchored at the trace's pre-activation.
std::vector<Inequality> soft_constraints_from( const ExactTrace &trace, const LabelMap &labels, std::size_t layer );
std::vector<Inequality> soft_constraints_from( const EvalTrace &trace, const LabelMap &labels, std::size_t layer );

BlockingConstraint blocking_constraint( std::vector<std::pair<std::size_t, Rational>> free_values,
                                        const Rational &radius );

/// Output atoms of one disjunct over the output-layer variables z_y_j.
std::vector<Inequality> violation_constraints( const Conjunction &disjunct, std::size_t output_layer );

std::string emit_smtlib( const Query &query );

/// Exact values implied by an assignment to the free inputs.
struct QueryEvaluation
{
    std::vector<Rational> inputs;             // full input vector, pins included
    std::vector<std::vector<Rational>> pre;   // pre[l - 1], l = 1..layer
    std::optional<Rational> objective;
    std::size_t soft_satisfied = 0;
    std::string failure; // first violated hard constraint, empty when all hold

    bool satisfies_hard() const { return failure.empty(); }
};

/// Propagates `free_values` (ordered like encoding.free_inputs) through the
/// encoding in exact arithmetic and checks every hard constraint.
QueryEvaluation evaluate_query( const Query &query, std::span<const Rational> free_values );

/// Default blocking radius: the narrowest positive free-input width divided
/// by iterations, or 1e-6 when no free input has positive width.
Rational default_blocking_radius( const PartialAssignment &assignment, std::size_t iterations );

} // namespace incdec
