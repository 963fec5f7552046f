#include "incdec/kernels.hpp"

namespace incdec::kernels::scalar {

void affine( const double *weights, const double *bias, const double *in, double *out,
             std::size_t rows, std::size_t cols )
{
    for ( std::size_t r = 0; r < rows; ++r )
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

} // namespace incdec::kernels::scalar
