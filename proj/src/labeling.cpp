#include "incdec/labeling.hpp"

#include "incdec/error.hpp"

#include <sstream>

namespace incdec {

Label label_from_successors( const Dnn &dnn, const LabelMap &labels, std::size_t layer, std::size_t neuron )
{
    bool up = false;
    bool down = false;
    std::size_t next = layer + 1;
    for ( std::size_t t = 0; t < dnn.layer_size( next ); ++t )
    {
        double w = dnn.weight( next, t, neuron );
        Label target = labels.at( next, t );
        if ( w == 0.0 || target == Label::Inert )
            continue;
        if ( target == Label::Mixed )
        {
            up = down = true;
            break;
        }
        bool pushes_up = ( w > 0 ) == ( target == Label::Inc );
        ( pushes_up ? up : down ) = true;
    }
    if ( up && down )
        return Label::Mixed;
    if ( up )
        return Label::Inc;
    if ( down )
        return Label::Dec;
    return Label::Inert;
}

LabelMap propagate_labels( const Dnn &dnn, const OutputSeed &seed )
{
    if ( seed.labels.size() != dnn.output_size() )
        throw InvalidArgument( "output seed has " + std::to_string( seed.labels.size() ) +
                               " labels, network has " + std::to_string( dnn.output_size() ) + " outputs" );

    LabelMap labels;
    labels.layers.resize( dnn.layer_count() );
    labels.layers.back() = seed.labels;
    for ( std::size_t l = dnn.output_layer(); l-- > 0; )
    {
        labels.layers[l].resize( dnn.layer_size( l ) );
        for ( std::size_t j = 0; j < dnn.layer_size( l ); ++j )
            labels.layers[l][j] = label_from_successors( dnn, labels, l, j );
    }
    return labels;
}

InputPartition partition_inputs( const LabelMap &labels )
{
    InputPartition partition;
    const auto &inputs = labels.inputs();
    for ( std::size_t i = 0; i < inputs.size(); ++i )
        ( inputs[i] == Label::Mixed ? partition.mixed : partition.labeled ).push_back( i );
    return partition;
}

std::vector<std::size_t> PartialAssignment::free_inputs() const
{
    std::vector<std::size_t> result;
    for ( std::size_t i = 0; i < pinned.size(); ++i )
        if ( !pinned[i] )
            result.push_back( i );
    return result;
}

PartialAssignment fix_labeled_inputs( const InputRegion &region, const LabelMap &labels,
                                      std::optional<std::span<const double>> center )
{
    const auto &inputs = labels.inputs();
    if ( inputs.size() != region.size() )
        throw InvalidArgument( "label map and region disagree on the input count" );
    if ( center && center->size() != region.size() )
        throw InvalidArgument( "center and region disagree on the input count" );

    PartialAssignment assignment;
    assignment.region = region;
    assignment.pinned.resize( inputs.size() );
    for ( std::size_t i = 0; i < inputs.size(); ++i )
    {
        switch ( inputs[i] )
        {
        case Label::Inc:
            assignment.pinned[i] = region.upper[i];
            break;
        case Label::Dec:
            assignment.pinned[i] = region.lower[i];
            break;
        case Label::Inert:
            assignment.pinned[i] =
                center ? ( *center )[i] : to_double( ( to_rational( region.lower[i] ) + to_rational( region.upper[i] ) ) / 2 );
            break;
        case Label::Mixed:
            break;
        }
    }
    return assignment;
}

std::string labels_csv( const LabelMap &labels )
{
    std::ostringstream out;
    out << "layer,index,label\n";
    for ( std::size_t l = 0; l < labels.layers.size(); ++l )
        for ( std::size_t j = 0; j < labels.layers[l].size(); ++j )
            out << l << ',' << j << ',' << label_name( labels.layers[l][j] ) << '\n';
    return out.str();
}

} // namespace incdec
