#pragma once

#include "incdec/network.hpp"
#include "incdec/property.hpp"
#include "incdec/search.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace incdec::cli {

struct RunOptions
{
    SearchConfig search;
    /// Property is stated in raw coordinates; apply the NNet normalization.
    bool normalize = false;
    std::optional<std::filesystem::path> seed_dump;
    std::optional<std::filesystem::path> log;
};

/// Outcome of one (network, property) instance. "sat" means a verified
/// counterexample was found, "unsat" that the property holds (complete mode
/// only), "error" that the instance could not be run.
struct RunResult
{
    std::string instance;
    std::string verdict = "unknown";
    double time_s = 0.0;
    std::size_t iterations = 0;
    std::size_t layer = 0;
    std::vector<double> counterexample;
    std::vector<double> output;
    std::string error;
};

/// Loads both files and runs find_adversarial. Throws ParseError /
/// InvalidArgument for unusable inputs and SolverProcessError when the solver
/// misbehaves.
RunResult run_instance( const std::filesystem::path &network, const std::filesystem::path &property,
                        const RunOptions &options );

/// "sat" / "unsat" / "unknown" first line; for "sat", one "(X_i v)" line per
/// input and one "(Y_j v)" line per output.
std::string format_result( const RunResult &result );

/// Counterexample parsed from a result file: inputs X_i and, when present,
/// outputs Y_j. Accepts both one pair per line and the nested
/// "((X_0 v) ...)" layout. Throws ParseError.
struct ParsedResult
{
    std::string verdict;
    std::vector<double> inputs;
    std::vector<double> outputs;
};
ParsedResult parse_result( std::string_view text );

/// Re-verifies a counterexample: inside the region and the network output
/// satisfies the violation condition.
bool verify_counterexample( const Dnn &dnn, const Property &property, const std::vector<double> &input,
                            bool strict = false );

struct ManifestEntry
{
    std::filesystem::path network;
    std::filesystem::path property;
    std::optional<double> timeout_s;
    std::string instance; // "<network>|<property>" as written in the manifest
};

/// CSV lines "network_path,property_path,timeout"; paths are resolved
/// against the manifest's directory. Blank lines, '#' comments and a header
/// row starting with "network" are skipped.
std::vector<ManifestEntry> read_manifest( const std::filesystem::path &manifest );

/// Runs every manifest entry not already present in `report` and rewrites
/// the report: header "instance,verdict,time_s,iterations,layer", one row per
/// instance in manifest order, then one summary row per property
/// ("summary|<property>", "violated=<k>/<n>", total seconds). Returns the
/// number of instances run in this call.
std::size_t bench( const std::filesystem::path &manifest, const std::filesystem::path &report,
                   const RunOptions &options, std::size_t jobs, std::ostream &progress );

} // namespace incdec::cli
