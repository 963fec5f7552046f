#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace incdec {

/// Minimal s-expression tree for VNN-LIB and solver answers. Symbols,
/// numerals, "strings" and |quoted symbols| are all atoms.
struct SExpr
{
    bool is_atom = true;
    std::string atom;
    std::vector<SExpr> items;
    std::size_t line = 0;

    bool is_list() const { return !is_atom; }
    bool is_symbol( std::string_view name ) const { return is_atom && atom == name; }
    std::string to_string() const;
};

/// Parses every top-level expression of `text`. Comments run from ';' to the
/// end of the line. Throws ParseError on unbalanced parentheses.
std::vector<SExpr> parse_sexprs( std::string_view text );

} // namespace incdec
