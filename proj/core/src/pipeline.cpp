#include "ifadit/pipeline.hpp"

#include <cmath>

#include "ifadit/error.hpp"
#include "ifadit/fields.hpp"

namespace ifadit {

namespace {

constexpr std::size_t kEidHidden1 = 256;
constexpr std::size_t kEidHidden2 = 128;
constexpr std::size_t kEattrHidden = 256;
constexpr std::size_t kMapperHidden = 128;
constexpr std::size_t kGenHidden = 256;
constexpr std::size_t kGenBandwidth = 8;
constexpr double kGenFieldScale = 0.10;
constexpr std::size_t kPercFeatures = 64;
constexpr std::size_t kPercHidden = 128;
constexpr std::size_t kProxyFeatures = 16;
constexpr std::size_t kFpHidden = 64;

MlpParams init_generator(const Config& cfg, Rng rng) {
    const std::size_t d_in = cfg.m_slots * cfg.d_w;
    const std::size_t pixels = cfg.pixels();
    MlpSpec spec{{d_in, kGenHidden, pixels}, Activation::leaky_relu, Activation::sigmoid};
    Tensor w1({d_in, kGenHidden});
    Rng w1_rng = rng.fork("w1");
    const double stddev = 1.0 / std::sqrt(static_cast<double>(d_in));
    for (auto& v : w1.data) v = w1_rng.normal(0.0, stddev);
    quantize_inplace(w1);
    Rng w2_rng = rng.fork("w2");
    Tensor w2 = smooth_field_matrix(kGenHidden, cfg.img_h, cfg.img_w, kGenBandwidth,
                                    kGenFieldScale, w2_rng);
    return MlpParams::from_tensors(spec, {std::move(w1), std::move(w2)},
                                   {Tensor({kGenHidden}, 0.0), Tensor({pixels}, 0.0)},
                                   /*trainable=*/false);
}

void check_images(const Var& images, std::size_t pixels, const char* op) {
    const Shape& s = images.shape();
    if (s.size() != 2 || s[1] != pixels)
        throw DimensionError(std::string(op) + ": expected image batch [B," +
                             std::to_string(pixels) + "], got " + shape_str(s));
}

Tensor as_batch(const Tensor& images, std::size_t pixels, const char* op) {
    Tensor batch = images;
    if (batch.shape.size() == 1) batch.shape = {1, batch.size()};
    if (batch.shape.size() != 2 || batch.shape[1] != pixels)
        throw DimensionError(std::string(op) + ": expected images with " +
                             std::to_string(pixels) + " pixels, got " + shape_str(images.shape));
    return batch;
}

}  // namespace

PipelineModel PipelineModel::init(const Config& cfg) {
    cfg.validate();
    PipelineModel m;
    m.cfg = cfg;
    Rng root(cfg.seed);
    const std::size_t pixels = cfg.pixels();

    {
        Rng r = root.fork("e_id");
        m.e_id = MlpParams::init({{pixels, kEidHidden1, kEidHidden2, cfg.d_z}}, r, true);
    }
    {
        Rng r = root.fork("e_attr");
        m.e_attr = MlpParams::init({{pixels, kEattrHidden, cfg.m_slots * cfg.d_w}}, r, true);
    }
    {
        Rng r = root.fork("mapper");
        m.mapper = MlpParams::init({{cfg.d_z + cfg.d_w, kMapperHidden, cfg.d_w}}, r, true);
    }
    m.generator = init_generator(cfg, root.fork("generator"));
    {
        Rng r = root.fork("icl");
        // Zeroed last layer: the residual correction starts as the identity.
        m.icl = MlpParams::init(
            {{cfg.d_z, 2 * cfg.d_z, 2 * cfg.d_z, 2 * cfg.d_z, cfg.d_z}}, r, true,
            MlpInit{1.0, /*zero_last_weights=*/true, 0.0});
    }
    {
        Rng r = root.fork("sif");
        m.sif = SifModel::init(cfg.n_blocks, cfg.d_z, cfg.d_k, cfg.flow_hidden(), cfg.clamp, r,
                               true, FlowInit::near_identity);
    }
    {
        Rng r = root.fork("keymap");
        m.keymap = KeyMapper::init(cfg.d_k, r);
    }
    {
        Rng r = root.fork("lm_proxy");
        m.lm_proxy = MlpParams::init({{pixels, kProxyFeatures}}, r, false);
    }
    {
        Rng r = root.fork("fp_proxy");
        m.fp_proxy = MlpParams::init({{pixels, kFpHidden, kProxyFeatures}}, r, false);
    }
    {
        Rng r = root.fork("perc_proxy");
        m.perc_proxy = MlpParams::init({{pixels, kPercHidden, kPercFeatures}}, r, false);
    }
    return m;
}

Tensor PipelineModel::key_batch(const Secret& s, std::size_t rows) const {
    return tile_rows(keygen(s, keymap).k, rows);
}

Var e_id_forward(const PipelineModel& m, const Var& images) {
    check_images(images, m.cfg.pixels(), "e_id");
    return normalize_rows(mlp_forward(m.e_id, images));
}

Var e_attr_forward(const PipelineModel& m, const Var& images) {
    check_images(images, m.cfg.pixels(), "e_attr");
    return mlp_forward(m.e_attr, images);
}

Var mapping_forward(const PipelineModel& m, const Var& z, const Var& a) {
    const std::size_t d_w = m.cfg.d_w;
    const Shape& zs = z.shape();
    const Shape& as = a.shape();
    if (zs.size() != 2 || zs[1] != m.cfg.d_z)
        throw DimensionError("mapping: identity batch must be [B," + std::to_string(m.cfg.d_z) +
                             "]");
    if (as.size() != 2 || as[1] != m.cfg.m_slots * d_w || as[0] != zs[0])
        throw DimensionError("mapping: attribute batch must be [B," +
                             std::to_string(m.cfg.m_slots * d_w) + "]");
    Var out;
    for (std::size_t slot = 0; slot < m.cfg.m_slots; ++slot) {
        Var a_slot = slice_cols(a, slot * d_w, (slot + 1) * d_w);
        Var w_slot = mlp_forward(m.mapper, concat_cols(z, a_slot));
        out = slot == 0 ? w_slot : concat_cols(out, w_slot);
    }
    return out;
}

Var generator_forward(const PipelineModel& m, const Var& w) {
    const Shape& ws = w.shape();
    if (ws.size() != 2 || ws[1] != m.cfg.m_slots * m.cfg.d_w)
        throw DimensionError("generator: latent batch must be [B," +
                             std::to_string(m.cfg.m_slots * m.cfg.d_w) + "]");
    return mlp_forward(m.generator, w);
}

Var icl_forward(const PipelineModel& m, const Var& z) {
    const Shape& zs = z.shape();
    if (zs.size() != 2 || zs[1] != m.cfg.d_z)
        throw DimensionError("icl: input batch must be [B," + std::to_string(m.cfg.d_z) + "]");
    return add(z, mlp_forward(m.icl, z));
}

Var lm_features(const PipelineModel& m, const Var& images) {
    check_images(images, m.cfg.pixels(), "lm_features");
    return mlp_forward(m.lm_proxy, images);
}

Var fp_features(const PipelineModel& m, const Var& images) {
    check_images(images, m.cfg.pixels(), "fp_features");
    return mlp_forward(m.fp_proxy, images);
}

Var perc_features(const PipelineModel& m, const Var& images) {
    check_images(images, m.cfg.pixels(), "perc_features");
    return mlp_forward(m.perc_proxy, images);
}

Var reconstruct_g(const PipelineModel& m, const Var& images) {
    Var z = e_id_forward(m, images);
    Var a = e_attr_forward(m, images);
    return generator_forward(m, mapping_forward(m, z, a));
}

Var anonymize_g(const PipelineModel& m, const Var& images, const Var& k, AnonymizeOptions opts) {
    Var z = e_id_forward(m, images);
    Var a = e_attr_forward(m, images);
    Var z_anon = opts.bypass_sif ? z : sif_forward(m.sif, z, k);
    return generator_forward(m, mapping_forward(m, z_anon, a));
}

Var deanonymize_g(const PipelineModel& m, const Var& anon_images, const Var& k,
                  DeanonymizeOptions opts) {
    Var z_ext = e_id_forward(m, anon_images);
    if (opts.use_icl) z_ext = icl_forward(m, z_ext);
    Var z_rec = sif_inverse(m.sif, z_ext, k);
    Var a = e_attr_forward(m, anon_images);
    return generator_forward(m, mapping_forward(m, z_rec, a));
}

Tensor anonymize(const PipelineModel& m, const Tensor& images, const Secret& s,
                 AnonymizeOptions opts) {
    Tensor batch = as_batch(images, m.cfg.pixels(), "anonymize");
    const Tensor k = m.key_batch(s, batch.shape[0]);
    Tensor out = anonymize_g(m, constant(std::move(batch)), constant(k), opts).value();
    out.shape = images.shape.size() == 1 ? Shape{out.size()} : out.shape;
    return out;
}

Tensor deanonymize(const PipelineModel& m, const Tensor& anon_images, const Secret& s,
                   DeanonymizeOptions opts) {
    Tensor batch = as_batch(anon_images, m.cfg.pixels(), "deanonymize");
    const Tensor k = m.key_batch(s, batch.shape[0]);
    Tensor out = deanonymize_g(m, constant(std::move(batch)), constant(k), opts).value();
    out.shape = anon_images.shape.size() == 1 ? Shape{out.size()} : out.shape;
    return out;
}

Tensor blend(const Tensor& generated, const Tensor& original, const Tensor& mask) {
    require_same_shape(generated, original, "blend");
    require_same_shape(generated, mask, "blend (mask)");
    for (double v : mask.data)
        if (v < 0.0 || v > 1.0) throw ContractError("blend: mask entries must lie in [0,1]");
    Tensor out(generated.shape);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = mask[i] * generated[i] + (1.0 - mask[i]) * original[i];
    quantize_inplace(out);
    return out;
}

}  // namespace ifadit
