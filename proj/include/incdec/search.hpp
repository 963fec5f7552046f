#pragma once

#include "incdec/encoder.hpp"
#include "incdec/labeling.hpp"
#include "incdec/network.hpp"
#include "incdec/property.hpp"
#include "incdec/solver.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace incdec {

enum class SoftMode
{
    Accumulate, // soft constraints from every earlier candidate stay in the query
    Replace,    // only the latest candidate's soft constraints are kept
};

/// One solver call of the search loop.
struct IterationRecord
{
    std::size_t disjunct = 0;
    std::size_t layer = 0;
    std::size_t iteration = 0; // 1-based within the layer
    SolverOutcome::Kind answer = SolverOutcome::Kind::Unknown;
    std::optional<Rational> objective;
    std::size_t soft_satisfied = 0;
    std::size_t soft_total = 0;
    std::vector<Rational> free_values; // model values of the free inputs
    std::vector<double> candidate;     // full input vector, empty unless Sat
    bool violated = false;
};

/// "iter=<k> layer=<i> answer=<a> objective=<v> soft=<s>/<t> input=<x0;x1;...> verdict=<violated|continue|stop>"
std::string format_iteration( const IterationRecord &record );

struct SearchConfig
{
    std::size_t iterations = 80;
    double budget_s = 116.0;
    /// Blocking radius; default_blocking_radius() when unset.
    std::optional<Rational> epsilon;
    std::vector<std::size_t> schedule = { 1 };
    /// Append every layer after the last scheduled one, up to the output.
    bool escalate = false;
    /// Assert the violation condition at the output layer, which is appended
    /// to the schedule; Unsat there yields Holds.
    bool complete = false;
    Priority priority = Priority::LexObjective;
    SoftMode soft_mode = SoftMode::Accumulate;
    bool strict = false;
    SolverConfig solver;
    std::function<void( const IterationRecord & )> on_iteration;

    /// Throws InvalidArgument unless iterations >= 1, budget > 0 and the
    /// schedule is strictly increasing within 1..output_layer.
    void validate( std::size_t output_layer ) const;
    std::vector<std::size_t> effective_schedule( std::size_t output_layer ) const;
};

struct Verdict
{
    enum class Kind
    {
        Violated,
        Holds,
        Unknown,
    };
    enum class Reason
    {
        None,
        IterationsExhausted,
        Timeout,
        EmptyObjective,
        SearchSpaceExhausted, // every scheduled query became unsatisfiable
    };

    Kind kind = Kind::Unknown;
    Reason reason = Reason::None;
    std::vector<double> counterexample;
    std::vector<double> output;
    std::size_t iterations = 0; // solver calls, all layers and disjuncts
    std::size_t layer = 0;      // layer whose query produced the counterexample (0: pinned point)
    std::size_t disjunct = 0;
    std::optional<std::size_t> target; // run_targets only
    double seconds = 0.0;
};

std::string_view verdict_name( Verdict::Kind kind );
std::string_view reason_name( Verdict::Reason reason );

/// First query of the search at `layer`: no soft or blocking constraints
/// yet. With `complete` and layer = output layer the disjunct is asserted and
/// an empty objective is allowed; otherwise EmptyObjective is thrown.
Query initial_query( const Dnn &dnn, const LabelMap &labels, const PartialAssignment &assignment,
                     const Conjunction &disjunct, std::size_t layer, bool complete, Priority priority );

/// Searches one disjunct with an explicit output seed. `center` is the point
/// Inert inputs are held at (box midpoint when absent).
Verdict search_disjunct( const Dnn &dnn, const InputRegion &region, const Conjunction &disjunct,
                         const OutputSeed &seed, const SearchConfig &config,
                         std::optional<std::span<const double>> center = std::nullopt );

/// Tries the disjuncts of `condition` in order, each seeded from its own
/// atoms; the first Violated wins. Holds only when every disjunct holds.
Verdict find_adversarial( const Dnn &dnn, const InputRegion &region, const ViolationCondition &condition,
                          const SearchConfig &config, std::optional<std::span<const double>> center = std::nullopt );

/// Class-change driver around `x`: tries every target class other than the
/// winning class of x, in ascending order, and returns the first Violated.
/// Ties resolve to the lowest index, so targets above the original class are
/// checked with a strict comparison.
Verdict run_targets( const Dnn &dnn, std::span<const double> x, std::span<const double> radii,
                     const SearchConfig &config );
Verdict run_targets( const Dnn &dnn, std::span<const double> x, double radius, const SearchConfig &config );

} // namespace incdec
