#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ifadit/graph.hpp"
#include "ifadit/rng.hpp"
#include "ifadit/tensor.hpp"

namespace ifadit {

enum class Activation { none, leaky_relu, tanh, sigmoid };

// Leaky slope used everywhere an activation is otherwise unspecified.
inline constexpr double kLeakySlope = 0.2;

struct MlpSpec {
    std::vector<std::size_t> layer_sizes;  // at least [in, out]
    Activation hidden = Activation::leaky_relu;
    Activation output = Activation::none;

    void validate() const;
    std::size_t in_dim() const { return layer_sizes.front(); }
    std::size_t out_dim() const { return layer_sizes.back(); }
    std::size_t n_layers() const { return layer_sizes.size() - 1; }
};

struct MlpInit {
    // Weight entries drawn N(0, gain/sqrt(fan_in)); biases zero.
    double gain = 1.0;
    // Zero the final layer's weights (residual branches, coupling nets).
    bool zero_last_weights = false;
    double last_bias = 0.0;
};

struct MlpParams {
    MlpSpec spec;
    std::vector<Var> weights;  // [in_i, out_i]
    std::vector<Var> biases;   // [out_i]
    bool trainable = true;

    static MlpParams init(MlpSpec spec, Rng& rng, bool trainable, MlpInit opts = {});
    // Wraps explicit tensors (tests, deserialization).
    static MlpParams from_tensors(MlpSpec spec, std::vector<Tensor> weights,
                                  std::vector<Tensor> biases, bool trainable);

    std::vector<Var> params() const;
    void set_trainable(bool t);
    std::size_t param_count() const;
};

// Applies the stack of affine layers and activations to [B, in] input.
// Pure function of (params, input).
Var mlp_forward(const MlpParams& params, const Var& input);

Var apply_activation(const Var& x, Activation act);

}  // namespace ifadit
