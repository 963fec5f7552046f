#include "incdec/kernels.hpp"

#include <arm_neon.h>

namespace incdec::kernels::neon {

void affine( const double *weights, const double *bias, const double *in, double *out,
             std::size_t rows, std::size_t cols )
{
    std::size_t r = 0;
    for ( ; r + 2 <= rows; r += 2 )
    {
        float64x2_t acc = vld1q_f64( bias + r );
        for ( std::size_t c = 0; c < cols; ++c )
        {
            float64x2_t x = vdupq_n_f64( in[c] );
            acc = vaddq_f64( acc, vmulq_f64( vld1q_f64( weights + c * rows + r ), x ) );
        }
        vst1q_f64( out + r, acc );
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
    for ( std::size_t i = 0; i < n; ++i )
        out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

} // namespace incdec::kernels::neon
