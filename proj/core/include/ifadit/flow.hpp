#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "ifadit/graph.hpp"
#include "ifadit/mlp.hpp"
#include "ifadit/rng.hpp"

namespace ifadit {

// Secure affine coupling block: four conditioned MLPs sharing one shape,
// each mapping [half identity | secret vector] -> half identity. The scale
// nets (omega, rho) feed the clamped exponent, the shift nets (phi, eta)
// the additive term.
struct SacbParams {
    MlpParams omega;
    MlpParams phi;
    MlpParams rho;
    MlpParams eta;

    std::vector<Var> params() const;
    void set_trainable(bool t);
};

enum class FlowInit {
    // Zeroed output layers with a strongly negative scale bias: the block
    // starts close to the identity so downstream components stay in range
    // at the beginning of training.
    near_identity,
    // Every layer randomly initialized; exercises invertibility across
    // arbitrary parameter values.
    random_full,
    // Random layers with the production offset on the scale-net output
    // biases. Keeps per-block expansion small, the regime the flow
    // operates in; float32 round trips stay tight here.
    random_moderate,
};

// Stack of N secure affine coupling blocks with exact forward/inverse.
struct SifModel {
    std::vector<SacbParams> blocks;
    std::size_t d_z = 0;
    std::size_t d_k = 0;
    double clamp = 2.0;

    static SifModel init(std::size_t n_blocks, std::size_t d_z, std::size_t d_k,
                         std::size_t d_hidden, double clamp, Rng& rng, bool trainable,
                         FlowInit mode = FlowInit::near_identity);

    std::vector<Var> params() const;
    void set_trainable(bool t);
    std::size_t n_blocks() const { return blocks.size(); }
};

// Halves of a length-d_z vector batch; d_z must be even.
std::pair<Var, Var> split_half(const Var& z);
Var merge_halves(const Var& z1, const Var& z2);

// a(t) = clamp * sigmoid(t), entries in (0, clamp).
Var clamp_scale(const Var& t, double clamp);

// One coupling block. Forward updates the second half first, then the
// first half against the already-updated second half; the inverse undoes
// the two updates in reverse order.
std::pair<Var, Var> block_forward(const SacbParams& p, double clamp, const Var& z1, const Var& z2,
                                  const Var& k);
std::pair<Var, Var> block_inverse(const SacbParams& p, double clamp, const Var& z1p,
                                  const Var& z2p, const Var& k);

// Full transform over all blocks. z is [B, d_z]; k is [B, d_k].
Var sif_forward(const SifModel& m, const Var& z, const Var& k);
Var sif_inverse(const SifModel& m, const Var& z_anon, const Var& k);

// Convenience: single vectors in, single vectors out, no gradients.
Tensor sif_forward(const SifModel& m, const Tensor& z, const Tensor& k);
Tensor sif_inverse(const SifModel& m, const Tensor& z_anon, const Tensor& k);

// Repeats a vector [n] as the rows of a [rows, n] tensor.
Tensor tile_rows(const Tensor& row, std::size_t rows);

}  // namespace ifadit
