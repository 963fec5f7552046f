#include "incdec/sexpr.hpp"

#include "incdec/error.hpp"

namespace incdec {

std::string SExpr::to_string() const
{
    if ( is_atom )
        return atom;
    std::string out = "(";
    for ( std::size_t i = 0; i < items.size(); ++i )
    {
        if ( i )
            out += ' ';
        out += items[i].to_string();
    }
    return out + ")";
}

std::vector<SExpr> parse_sexprs( std::string_view text )
{
    std::vector<SExpr> top;
    std::vector<SExpr> stack;
    std::size_t line = 1;

    auto emit = [&] ( SExpr expr ) {
        if ( stack.empty() )
            top.push_back( std::move( expr ) );
        else
            stack.back().items.push_back( std::move( expr ) );
    };

    std::size_t i = 0;
    while ( i < text.size() )
    {
        char c = text[i];
        if ( c == '\n' )
        {
            ++line;
            ++i;
        }
        else if ( c == ' ' || c == '\t' || c == '\r' )
            ++i;
        else if ( c == ';' )
        {
            while ( i < text.size() && text[i] != '\n' )
                ++i;
        }
        else if ( c == '(' )
        {
            SExpr list;
            list.is_atom = false;
            list.line = line;
            stack.push_back( std::move( list ) );
            ++i;
        }
        else if ( c == ')' )
        {
            if ( stack.empty() )
                throw ParseError( "unbalanced ')'", line );
            SExpr done = std::move( stack.back() );
            stack.pop_back();
            emit( std::move( done ) );
            ++i;
        }
        else if ( c == '"' || c == '|' )
        {
            std::size_t start_line = line;
            std::size_t end = i + 1;
            while ( end < text.size() && text[end] != c )
            {
                if ( text[end] == '\n' )
                    ++line;
                ++end;
            }
            if ( end >= text.size() )
                throw ParseError( "unterminated quoted token", start_line );
            SExpr atom;
            atom.atom = std::string( text.substr( i, end - i + 1 ) );
            atom.line = start_line;
            emit( std::move( atom ) );
            i = end + 1;
        }
        else
        {
            std::size_t end = i;
            while ( end < text.size() && text[end] != '(' && text[end] != ')' && text[end] != ';' &&
                    text[end] != ' ' && text[end] != '\t' && text[end] != '\r' && text[end] != '\n' )
                ++end;
            SExpr atom;
            atom.atom = std::string( text.substr( i, end - i ) );
            atom.line = line;
            emit( std::move( atom ) );
            i = end;
        }
    }
    if ( !stack.empty() )
        throw ParseError( "unbalanced '(' opened here", stack.back().line );
    return top;
}

} // namespace incdec
