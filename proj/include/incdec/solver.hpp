#pragma once

#include "incdec/exact.hpp"
#include "incdec/network.hpp"
#include "incdec/property.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace incdec {

struct SolverConfig
{
    enum class InputMode
    {
        Stdin, // document piped to the child's standard input
        File,  // document written to a temporary file appended to the arguments
    };

    std::string executable = "z3";
    std::vector<std::string> arguments = { "-in" };
    InputMode input_mode = InputMode::Stdin;
    double timeout_s = 116.0;
    /// When set, every query and raw answer is kept here for debugging.
    std::optional<std::filesystem::path> artifact_dir;

    /// Throws InvalidArgument when timeout_s <= 0 or the executable is empty.
    void validate() const;
};

using Assignment = std::map<std::string, Rational>;

struct SolverOutcome
{
    enum class Kind
    {
        Sat,
        Unsat,
        Unknown,
        Timeout,
        ProcessError,
    };

    Kind kind = Kind::Unknown;
    Assignment assignment; // Sat only
    std::string detail;    // ProcessError: what went wrong plus captured output
    double seconds = 0.0;
};

std::string_view outcome_name( SolverOutcome::Kind kind );

/// Runs the configured solver on `document` and reads its answer. The child
/// is killed once the timeout elapses.
SolverOutcome solve( const SolverConfig &config, std::string_view document, std::span<const std::string> wanted );

/// Parses a get-value response "((v1 val1) (v2 val2) ...)". Values may be
/// decimals, (- c) or (/ p q), nested. Throws ParseError on malformed text,
/// on algebraic (root-obj) values, or when a wanted variable is missing.
Assignment parse_model( std::string_view text, std::span<const std::string> wanted );

/// Exhaustive search over a regular grid with `resolution` points per axis
/// (a single point on zero-width axes). Returns the first grid point, in
/// lexicographic order with input 0 varying slowest, whose output satisfies
/// the condition.
std::optional<std::vector<double>> grid_oracle( const Dnn &dnn, const InputRegion &region,
                                                const ViolationCondition &condition, std::size_t resolution,
                                                bool strict = false );

/// Coordinate k of `resolution` evenly spaced points in [lower, upper]; the
/// endpoints are exact and the grid for resolution r is a subset of the grid
/// for 2r - 1.
double grid_point( double lower, double upper, std::size_t k, std::size_t resolution );

} // namespace incdec
