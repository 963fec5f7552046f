#include "incdec/kernels.hpp"

namespace incdec::kernels {

namespace {

const KernelTable scalar_table{ Isa::Scalar, &scalar::affine, &scalar::relu };

#if defined( __x86_64__ ) || defined( _M_X64 )
const KernelTable avx2_table{ Isa::Avx2, &avx2::affine, &avx2::relu };

bool cpu_has_avx2()
{
    __builtin_cpu_init();
    return __builtin_cpu_supports( "avx2" );
}
#endif

#if defined( __aarch64__ )
const KernelTable neon_table{ Isa::Neon, &neon::affine, &neon::relu };
#endif

} // namespace

std::string_view isa_name( Isa isa )
{
    switch ( isa )
    {
    case Isa::Scalar:
        return "scalar";
    case Isa::Avx2:
        return "avx2";
    case Isa::Neon:
        return "neon";
    }
    return "unknown";
}

const KernelTable *table_for( Isa isa )
{
    switch ( isa )
    {
    case Isa::Scalar:
        return &scalar_table;
    case Isa::Avx2:
#if defined( __x86_64__ ) || defined( _M_X64 )
        if ( cpu_has_avx2() )
            return &avx2_table;
#endif
        return nullptr;
    case Isa::Neon:
#if defined( __aarch64__ )
        return &neon_table;
#else
        return nullptr;
#endif
    }
    return nullptr;
}

std::vector<Isa> available()
{
    std::vector<Isa> result;
    for ( Isa isa : { Isa::Scalar, Isa::Avx2, Isa::Neon } )
        if ( table_for( isa ) )
            result.push_back( isa );
    return result;
}

const KernelTable &active()
{
    static const KernelTable &best = [] () -> const KernelTable & {
        for ( Isa isa : { Isa::Avx2, Isa::Neon } )
            if ( const KernelTable *table = table_for( isa ) )
                return *table;
        return scalar_table;
    }();
    return best;
}

} // namespace incdec::kernels
