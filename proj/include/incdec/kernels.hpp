#pragma once

// Forward-pass inner loops. Every variant vectorizes across output rows and
// performs, per row, the same sequence of IEEE multiplies and adds as the
// scalar reference (bias first, then columns in order, no FMA), so all
// variants produce bit-identical results.

#include <cstddef>
#include <string_view>
#include <vector>

namespace incdec::kernels {

enum class Isa
{
    Scalar,
    Avx2,
    Neon,
};

std::string_view isa_name( Isa isa );

/// out[r] = bias[r] + sum_c weights[c * rows + r] * in[c]
/// `weights` is column-major: the `rows` entries of column c are contiguous.
using AffineFn = void ( * )( const double *weights, const double *bias, const double *in,
                             double *out, std::size_t rows, std::size_t cols );

/// out[i] = max(0, in[i]); in and out may alias.
using ReluFn = void ( * )( const double *in, double *out, std::size_t n );

struct KernelTable
{
    Isa isa;
    AffineFn affine;
    ReluFn relu;
};

/// Best variant supported by the running CPU, resolved once.
const KernelTable &active();

/// Table for a specific variant, or nullptr when it was not compiled in or
/// the CPU lacks the instructions.
const KernelTable *table_for( Isa isa );

/// All variants usable on this machine, scalar first.
std::vector<Isa> available();

namespace scalar {
void affine( const double *weights, const double *bias, const double *in, double *out,
             std::size_t rows, std::size_t cols );
void relu( const double *in, double *out, std::size_t n );
} // namespace scalar

#if defined( __x86_64__ ) || defined( _M_X64 )
namespace avx2 {
void affine( const double *weights, const double *bias, const double *in, double *out,
             std::size_t rows, std::size_t cols );
void relu( const double *in, double *out, std::size_t n );
} // namespace avx2
#endif

#if defined( __aarch64__ )
namespace neon {
void affine( const double *weights, const double *bias, const double *in, double *out,
             std::size_t rows, std::size_t cols );
void relu( const double *in, double *out, std::size_t n );
} // namespace neon
#endif

} // namespace incdec::kernels
