// Built with -mavx2 only (no -mfma): products and sums stay separately rounded.

#include "incdec/kernels.hpp"

#include <immintrin.h>

namespace incdec::kernels::avx2 {

void affine( const double *weights, const double *bias, const double *in, double *out,
             std::size_t rows, std::size_t cols )
{
    std::size_t r = 0;
    for ( ; r + 8 <= rows; r += 8 )
    {
        __m256d acc0 = _mm256_loadu_pd( bias + r );
        __m256d acc1 = _mm256_loadu_pd( bias + r + 4 );
        for ( std::size_t c = 0; c < cols; ++c )
        {
            __m256d x = _mm256_broadcast_sd( in + c );
            const double *column = weights + c * rows + r;
            acc0 = _mm256_add_pd( acc0, _mm256_mul_pd( _mm256_loadu_pd( column ), x ) );
            acc1 = _mm256_add_pd( acc1, _mm256_mul_pd( _mm256_loadu_pd( column + 4 ), x ) );
        }
        _mm256_storeu_pd( out + r, acc0 );
        _mm256_storeu_pd( out + r + 4, acc1 );
    }
    for ( ; r + 4 <= rows; r += 4 )
    {
        __m256d acc = _mm256_loadu_pd( bias + r );
        for ( std::size_t c = 0; c < cols; ++c )
        {
            __m256d x = _mm256_broadcast_sd( in + c );
            acc = _mm256_add_pd( acc, _mm256_mul_pd( _mm256_loadu_pd( weights + c * rows + r ), x ) );
        }
        _mm256_storeu_pd( out + r, acc );
    }
    for ( ; r < rows; ++r )
    {
        double acc = bias[r];
        for ( std::size_t c = 0; c < cols; ++c )
            acc = acc + weights[c * rows + r] * in[c];
        out[r] = acc;
    }
}

void relu( const double *in, double *out, std::size_t n )
{
    // max_pd(x, 0) returns the second operand when x is not greater, matching
    // the scalar "x > 0 ? x : 0" for -0.0 and NaN.
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for ( ; i + 4 <= n; i += 4 )
    {
        __m256d x = _mm256_loadu_pd( in + i );
        _mm256_storeu_pd( out + i, _mm256_max_pd( x, zero ) );
    }
    for ( ; i < n; ++i )
        out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

} // namespace incdec::kernels::avx2
