#pragma once

#include "incdec/label.hpp"
#include "incdec/network.hpp"
#include "incdec/property.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace incdec {

/// One label per neuron, indexed [layer][neuron]; layer 0 is the input.
struct LabelMap
{
    std::vector<std::vector<Label>> layers;

    Label at( std::size_t layer, std::size_t neuron ) const { return layers.at( layer ).at( neuron ); }
    const std::vector<Label> &inputs() const { return layers.front(); }

    bool operator==( const LabelMap & ) const = default;
};

/// Label of neuron `neuron` in `layer` recomputed from the labels of its
/// successors in layer + 1. An edge pushes up when (w > 0, target Inc) or
/// (w < 0, target Dec), down in the mirrored cases; an edge into a Mixed
/// target pushes both ways; zero weights and Inert targets are ignored.
Label label_from_successors( const Dnn &dnn, const LabelMap &labels, std::size_t layer, std::size_t neuron );

/// Applies label_from_successors layer by layer from the output seed back to
/// the input. No neuron is split: Mixed is a label like any other.
LabelMap propagate_labels( const Dnn &dnn, const OutputSeed &seed );

/// Inc, Dec and Inert inputs are `labeled` (Inert ones are held at the
/// center); Mixed inputs are `mixed` and stay free for the solver.
struct InputPartition
{
    std::vector<std::size_t> labeled;
    std::vector<std::size_t> mixed;
};

InputPartition partition_inputs( const LabelMap &labels );

/// Inputs fixed by their label plus the box for the rest.
struct PartialAssignment
{
    std::vector<std::optional<double>> pinned;
    InputRegion region;

    bool is_free( std::size_t input ) const { return !pinned.at( input ).has_value(); }
    std::vector<std::size_t> free_inputs() const;
};

/// Inc inputs go to the upper bound, Dec inputs to the lower bound, Inert
/// inputs to `center` (the box midpoint when no center is given); Mixed
/// inputs remain free within the region.
PartialAssignment fix_labeled_inputs( const InputRegion &region, const LabelMap &labels,
                                      std::optional<std::span<const double>> center = std::nullopt );

/// Header "layer,index,label", then one row per neuron, input layer first.
std::string labels_csv( const LabelMap &labels );

} // namespace incdec
