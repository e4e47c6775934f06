#include "ifadit/flow.hpp"

#include "ifadit/error.hpp"

namespace ifadit {

namespace {

// Scale-net outputs start at clamp*sigmoid(-4) ~ 0.036: near-identity blocks.
constexpr double kScaleBiasInit = -4.0;

void check_flow_inputs(const SifModel& m, const Var& z, const Var& k) {
    const Shape& zs = z.shape();
    const Shape& ks = k.shape();
    if (zs.size() != 2 || zs[1] != m.d_z)
        throw DimensionError("sif: identity batch must be [B," + std::to_string(m.d_z) + "]");
    if (ks.size() != 2 || ks[1] != m.d_k || ks[0] != zs[0])
        throw DimensionError("sif: secret batch must be [B," + std::to_string(m.d_k) + "]");
}

}  // namespace

std::vector<Var> SacbParams::params() const {
    std::vector<Var> out;
    for (const MlpParams* net : {&omega, &phi, &rho, &eta}) {
        auto p = net->params();
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

void SacbParams::set_trainable(bool t) {
    omega.set_trainable(t);
    phi.set_trainable(t);
    rho.set_trainable(t);
    eta.set_trainable(t);
}

SifModel SifModel::init(std::size_t n_blocks, std::size_t d_z, std::size_t d_k,
                        std::size_t d_hidden, double clamp, Rng& rng, bool trainable,
                        FlowInit mode) {
    if (n_blocks == 0) throw ContractError("SifModel: need at least one block");
    if (d_z == 0 || d_z % 2 != 0) throw ContractError("SifModel: d_z must be positive and even");
    if (clamp <= 0.0) throw ContractError("SifModel: clamp must be positive");
    SifModel m;
    m.d_z = d_z;
    m.d_k = d_k;
    m.clamp = clamp;
    const std::size_t half = d_z / 2;
    const MlpSpec spec{{half + d_k, d_hidden, half}, Activation::leaky_relu, Activation::none};
    for (std::size_t b = 0; b < n_blocks; ++b) {
        Rng block_rng = rng.fork("sif_block", b);
        SacbParams p;
        if (mode == FlowInit::near_identity) {
            const MlpInit scale_init{1.0, /*zero_last_weights=*/true, kScaleBiasInit};
            const MlpInit shift_init{1.0, /*zero_last_weights=*/true, 0.0};
            p.omega = MlpParams::init(spec, block_rng, trainable, scale_init);
            p.phi = MlpParams::init(spec, block_rng, trainable, shift_init);
            p.rho = MlpParams::init(spec, block_rng, trainable, scale_init);
            p.eta = MlpParams::init(spec, block_rng, trainable, shift_init);
        } else {
            const MlpInit scale_init{1.0, false,
                                     mode == FlowInit::random_moderate ? kScaleBiasInit : 0.0};
            p.omega = MlpParams::init(spec, block_rng, trainable, scale_init);
            p.phi = MlpParams::init(spec, block_rng, trainable);
            p.rho = MlpParams::init(spec, block_rng, trainable, scale_init);
            p.eta = MlpParams::init(spec, block_rng, trainable);
        }
        m.blocks.push_back(std::move(p));
    }
    return m;
}

std::vector<Var> SifModel::params() const {
    std::vector<Var> out;
    for (const auto& b : blocks) {
        auto p = b.params();
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

void SifModel::set_trainable(bool t) {
    for (auto& b : blocks) b.set_trainable(t);
}

std::pair<Var, Var> split_half(const Var& z) {
    const Shape& s = z.shape();
    if (s.size() != 2 || s[1] % 2 != 0)
        throw ContractError("split: identity length must be even, got " + shape_str(s));
    const std::size_t half = s[1] / 2;
    return {slice_cols(z, 0, half), slice_cols(z, half, s[1])};
}

Var merge_halves(const Var& z1, const Var& z2) { return concat_cols(z1, z2); }

Var clamp_scale(const Var& t, double clamp) { return scale(sigmoid(t), clamp); }

std::pair<Var, Var> block_forward(const SacbParams& p, double clamp, const Var& z1, const Var& z2,
                                  const Var& k) {
    Var c1 = concat_cols(z1, k);
    Var z2_new = add(mul(z2, vexp(clamp_scale(mlp_forward(p.omega, c1), clamp))),
                     mlp_forward(p.phi, c1));
    Var c2 = concat_cols(z2_new, k);
    Var z1_new = add(mul(z1, vexp(clamp_scale(mlp_forward(p.rho, c2), clamp))),
                     mlp_forward(p.eta, c2));
    return {z1_new, z2_new};
}

std::pair<Var, Var> block_inverse(const SacbParams& p, double clamp, const Var& z1p,
                                  const Var& z2p, const Var& k) {
    Var c2 = concat_cols(z2p, k);
    Var z1 = mul(sub(z1p, mlp_forward(p.eta, c2)),
                 vexp(neg(clamp_scale(mlp_forward(p.rho, c2), clamp))));
    Var c1 = concat_cols(z1, k);
    Var z2 = mul(sub(z2p, mlp_forward(p.phi, c1)),
                 vexp(neg(clamp_scale(mlp_forward(p.omega, c1), clamp))));
    return {z1, z2};
}

Var sif_forward(const SifModel& m, const Var& z, const Var& k) {
    check_flow_inputs(m, z, k);
    auto [z1, z2] = split_half(z);
    for (const auto& block : m.blocks)
        std::tie(z1, z2) = block_forward(block, m.clamp, z1, z2, k);
    return merge_halves(z1, z2);
}

Var sif_inverse(const SifModel& m, const Var& z_anon, const Var& k) {
    check_flow_inputs(m, z_anon, k);
    auto [z1, z2] = split_half(z_anon);
    for (auto it = m.blocks.rbegin(); it != m.blocks.rend(); ++it)
        std::tie(z1, z2) = block_inverse(*it, m.clamp, z1, z2, k);
    return merge_halves(z1, z2);
}

namespace {
Tensor as_row(const Tensor& v) {
    Tensor row = v;
    row.shape = {1, v.size()};
    return row;
}
}  // namespace

Tensor sif_forward(const SifModel& m, const Tensor& z, const Tensor& k) {
    Tensor out = sif_forward(m, constant(as_row(z)), constant(as_row(k))).value();
    out.shape = {out.size()};
    return out;
}

Tensor sif_inverse(const SifModel& m, const Tensor& z_anon, const Tensor& k) {
    Tensor out = sif_inverse(m, constant(as_row(z_anon)), constant(as_row(k))).value();
    out.shape = {out.size()};
    return out;
}

Tensor tile_rows(const Tensor& row, std::size_t rows) {
    if (row.shape.size() != 1) throw DimensionError("tile_rows: expected a vector");
    Tensor out({rows, row.size()});
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < row.size(); ++j) out[i * row.size() + j] = row[j];
    return out;
}

}  // namespace ifadit
