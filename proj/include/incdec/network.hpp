#pragma once

#include "incdec/exact.hpp"
#include "incdec/kernels.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace incdec {

enum class Activation
{
    Relu,
    Identity,
};

/// Input scaling from an NNet header. `means` and `ranges` carry one extra
/// trailing entry used to scale outputs.
struct Normalization
{
    std::vector<double> mins;
    std::vector<double> maxes;
    std::vector<double> means;
    std::vector<double> ranges;
};

/// Fully connected feed-forward network. Layer 0 is the input layer, layer
/// output_layer() the output layer; hidden layers use ReLU and the output
/// layer is linear.
///
/// Weights into layer l are stored column-major (kernel layout): the
/// layer_size(l) weights leaving source neuron c are contiguous.
class Dnn
{
public:
    /// `weights[l - 1]` is the row-major |N_l| x |N_{l-1}| matrix into layer l,
    /// `biases[l - 1]` its bias vector. Throws InvalidArgument on any shape
    /// mismatch.
    Dnn( std::vector<std::size_t> layer_sizes, const std::vector<std::vector<double>> &weights,
         std::vector<std::vector<double>> biases,
         std::optional<Normalization> normalization = std::nullopt );

    std::size_t layer_count() const { return _sizes.size(); }
    std::size_t output_layer() const { return _sizes.size() - 1; }
    std::size_t layer_size( std::size_t layer ) const { return _sizes.at( layer ); }
    const std::vector<std::size_t> &layer_sizes() const { return _sizes; }
    std::size_t input_size() const { return _sizes.front(); }
    std::size_t output_size() const { return _sizes.back(); }

    /// Weight of the edge from neuron `source` of layer-1 to `target` of `layer`.
    double weight( std::size_t layer, std::size_t target, std::size_t source ) const
    {
        return _weights[layer - 1][source * _sizes[layer] + target];
    }
    double bias( std::size_t layer, std::size_t target ) const { return _biases[layer - 1][target]; }

    /// Exact counterparts, to_rational() of the doubles, same layout.
    const Rational &exact_weight( std::size_t layer, std::size_t target, std::size_t source ) const
    {
        return _exact_weights[layer - 1][source * _sizes[layer] + target];
    }
    const Rational &exact_bias( std::size_t layer, std::size_t target ) const
    {
        return _exact_biases[layer - 1][target];
    }

    std::span<const double> packed_weights( std::size_t layer ) const { return _weights.at( layer - 1 ); }
    std::span<const double> biases( std::size_t layer ) const { return _biases.at( layer - 1 ); }

    Activation activation( std::size_t layer ) const
    {
        return layer == output_layer() ? Activation::Identity : Activation::Relu;
    }

    const std::optional<Normalization> &normalization() const { return _normalization; }

private:
    std::vector<std::size_t> _sizes;
    std::vector<std::vector<double>> _weights;
    std::vector<std::vector<double>> _biases;
    std::vector<std::vector<Rational>> _exact_weights;
    std::vector<std::vector<Rational>> _exact_biases;
    std::optional<Normalization> _normalization;
};

/// Per-layer values of one forward pass. Index 0 holds the input in both
/// vectors; for l >= 1, pre[l] is the weighted sum plus bias and post[l] the
/// activation of it.
template <typename Scalar> struct BasicEvalTrace
{
    std::vector<std::vector<Scalar>> pre;
    std::vector<std::vector<Scalar>> post;

    const std::vector<Scalar> &input() const { return post.front(); }
    const std::vector<Scalar> &output() const { return post.back(); }
};

using EvalTrace = BasicEvalTrace<double>;
using ExactTrace = BasicEvalTrace<Rational>;

EvalTrace evaluate( const Dnn &dnn, std::span<const double> input );

/// Forward pass in exact arithmetic, with every weight and bias taken as
/// to_rational() of its double.
ExactTrace evaluate_exact( const Dnn &dnn, std::span<const Rational> input );

/// Index of the largest entry; ties go to the lowest index.
std::size_t winning_class( std::span<const double> output );

/// Output-only evaluation with reusable buffers, for tight loops.
class Evaluator
{
public:
    explicit Evaluator( const Dnn &dnn, const kernels::KernelTable &table = kernels::active() );

    std::span<const double> output( std::span<const double> input );

private:
    const Dnn &_dnn;
    const kernels::KernelTable &_table;
    std::vector<double> _a;
    std::vector<double> _b;
};

Dnn parse_nnet( std::string_view text );
Dnn load_nnet( const std::filesystem::path &path );

/// NNet text for `dnn`. Missing normalization is written as the identity
/// scaling (mins/maxes = -/+ large, means 0, ranges 1).
std::string write_nnet( const Dnn &dnn );

} // namespace incdec
