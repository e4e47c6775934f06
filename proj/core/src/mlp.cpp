#include "ifadit/mlp.hpp"

#include <cmath>

#include "ifadit/error.hpp"

namespace ifadit {

void MlpSpec::validate() const {
    if (layer_sizes.size() < 2)
        throw ContractError("MlpSpec: need at least input and output sizes");
    for (std::size_t s : layer_sizes)
        if (s == 0) throw ContractError("MlpSpec: layer sizes must be positive");
}

MlpParams MlpParams::init(MlpSpec spec, Rng& rng, bool trainable, MlpInit opts) {
    spec.validate();
    MlpParams p;
    p.spec = std::move(spec);
    p.trainable = trainable;
    const std::size_t layers = p.spec.n_layers();
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in = p.spec.layer_sizes[l];
        const std::size_t out = p.spec.layer_sizes[l + 1];
        Tensor w({in, out});
        const bool zero = opts.zero_last_weights && l + 1 == layers;
        if (!zero) {
            const double stddev = opts.gain / std::sqrt(static_cast<double>(in));
            for (auto& v : w.data) v = rng.normal(0.0, stddev);
        }
        Tensor b({out}, l + 1 == layers ? opts.last_bias : 0.0);
        quantize_inplace(w);
        quantize_inplace(b);
        p.weights.emplace_back(std::move(w), trainable);
        p.biases.emplace_back(std::move(b), trainable);
    }
    return p;
}

MlpParams MlpParams::from_tensors(MlpSpec spec, std::vector<Tensor> weights,
                                  std::vector<Tensor> biases, bool trainable) {
    spec.validate();
    if (weights.size() != spec.n_layers() || biases.size() != spec.n_layers())
        throw DimensionError("MlpParams: wrong number of layer tensors");
    MlpParams p;
    p.spec = std::move(spec);
    p.trainable = trainable;
    for (std::size_t l = 0; l < p.spec.n_layers(); ++l) {
        const std::size_t in = p.spec.layer_sizes[l];
        const std::size_t out = p.spec.layer_sizes[l + 1];
        if (weights[l].shape != Shape{in, out} || biases[l].shape != Shape{out})
            throw DimensionError("MlpParams: tensor shape does not match spec at layer " +
                                 std::to_string(l));
        p.weights.emplace_back(std::move(weights[l]), trainable);
        p.biases.emplace_back(std::move(biases[l]), trainable);
    }
    return p;
}

std::vector<Var> MlpParams::params() const {
    std::vector<Var> out;
    out.reserve(weights.size() * 2);
    for (std::size_t l = 0; l < weights.size(); ++l) {
        out.push_back(weights[l]);
        out.push_back(biases[l]);
    }
    return out;
}

void MlpParams::set_trainable(bool t) {
    trainable = t;
    for (auto& w : weights) w.node()->requires_grad = t;
    for (auto& b : biases) b.node()->requires_grad = t;
}

std::size_t MlpParams::param_count() const {
    std::size_t n = 0;
    for (const auto& w : weights) n += w.size();
    for (const auto& b : biases) n += b.size();
    return n;
}

Var apply_activation(const Var& x, Activation act) {
    switch (act) {
        case Activation::none: return x;
        case Activation::leaky_relu: return leaky_relu(x, kLeakySlope);
        case Activation::tanh: return vtanh(x);
        case Activation::sigmoid: return sigmoid(x);
    }
    throw ContractError("unknown activation");
}

Var mlp_forward(const MlpParams& params, const Var& input) {
    const Tensor& in = input.value();
    if (in.shape.size() != 2 || in.shape[1] != params.spec.in_dim())
        throw DimensionError("mlp_forward: input " + shape_str(in.shape) +
                             " does not match spec input size " +
                             std::to_string(params.spec.in_dim()));
    Var x = input;
    const std::size_t layers = params.spec.n_layers();
    for (std::size_t l = 0; l < layers; ++l) {
        x = add_row(matmul(x, params.weights[l]), params.biases[l]);
        x = apply_activation(x, l + 1 == layers ? params.spec.output : params.spec.hidden);
    }
    return x;
}

}  // namespace ifadit
