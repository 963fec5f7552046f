#pragma once

#include <optional>
#include <string_view>

namespace incdec {

/// Direction in which a neuron's value should move to push the network
/// toward the violation.
enum class Label
{
    Inc,
    Dec,
    Mixed,
    Inert,
};

std::string_view label_name( Label label );
std::optional<Label> parse_label( std::string_view text );

} // namespace incdec
