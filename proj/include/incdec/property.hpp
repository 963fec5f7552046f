#pragma once

#include "incdec/label.hpp"
#include "incdec/network.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace incdec {

/// Axis-aligned input box.
struct InputRegion
{
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t size() const { return lower.size(); }
    bool contains( std::span<const double> point ) const;
    /// Throws InvalidArgument when sizes differ or some lower > upper.
    void validate() const;

    bool operator==( const InputRegion & ) const = default;
};

enum class Relation
{
    GreaterEqual,
    LessEqual,
};

/// sum_j c_j * Y_j  (>= | <=)  rhs, with terms sorted by output index and no
/// zero coefficients.
struct OutputAtom
{
    std::vector<std::pair<std::size_t, double>> terms;
    Relation relation = Relation::GreaterEqual;
    double rhs = 0.0;

    double lhs( std::span<const double> output ) const;
    bool holds( std::span<const double> output, bool strict = false ) const;
    /// The same constraint rewritten with relation >= (negating a <= atom).
    OutputAtom as_greater_equal() const;

    bool operator==( const OutputAtom & ) const = default;
};

using Conjunction = std::vector<OutputAtom>;

/// Disjunction of conjunctions of output atoms; satisfying it means the
/// property is violated.
struct ViolationCondition
{
    std::vector<Conjunction> disjuncts;

    /// Throws InvalidArgument on an empty condition, an empty disjunct or an
    /// output index >= output_count.
    void validate( std::size_t output_count ) const;

    bool operator==( const ViolationCondition & ) const = default;
};

struct Property
{
    InputRegion region;
    ViolationCondition condition;
    std::size_t output_count = 0;

    bool operator==( const Property & ) const = default;
};

/// Per-output labels derived from one disjunct of a violation condition.
struct OutputSeed
{
    std::vector<Label> labels;
    std::size_t disjunct = 0;
};

/// Parses the supported VNN-LIB subset. Input assertions must reduce to
/// per-variable bounds; output assertions are normalized to DNF.
Property parse_vnnlib( std::string_view text );
Property load_vnnlib( const std::filesystem::path &path );

/// VNN-LIB text that parse_vnnlib() maps back to `property`.
std::string write_vnnlib( const Property &property );

OutputSeed seed_output_labels( const Conjunction &disjunct, std::size_t output_count, std::size_t index = 0 );

/// Box [x - radius, x + radius] (computed exactly, rounded once) and the
/// condition Y_target - Y_original >= margin.
Property robustness_query( std::span<const double> center, std::span<const double> radii,
                           std::size_t original_class, std::size_t target_class, std::size_t output_count,
                           double margin = 0.0 );
Property robustness_query( std::span<const double> center, double radius, std::size_t original_class,
                           std::size_t target_class, std::size_t output_count, double margin = 0.0 );

/// True iff some disjunct has all its atoms satisfied by `output`. With
/// `strict`, >= and <= are evaluated as > and <.
bool holds_violation( const ViolationCondition &condition, std::span<const double> output,
                      bool strict = false );

/// Rewrites a property stated in raw NNet coordinates into the network's
/// normalized coordinates: input bounds are clipped to [min, max] and scaled
/// by (v - mean) / range, output atoms substitute Y = Y_n * range + mean.
Property normalize_property( const Normalization &normalization, const Property &property );

} // namespace incdec
