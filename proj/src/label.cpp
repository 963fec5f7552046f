#include "incdec/label.hpp"

namespace incdec {

std::string_view label_name( Label label )
{
    switch ( label )
    {
    case Label::Inc:
        return "inc";
    case Label::Dec:
        return "dec";
    case Label::Mixed:
        return "mixed";
    case Label::Inert:
        return "inert";
    }
    return "?";
}

std::optional<Label> parse_label( std::string_view text )
{
    for ( Label label : { Label::Inc, Label::Dec, Label::Mixed, Label::Inert } )
        if ( label_name( label ) == text )
            return label;
    return std::nullopt;
}

} // namespace incdec
