#include "ifadit/dataset.hpp"

#include <cmath>
#include <fstream>

#include "binio.hpp"
#include "ifadit/error.hpp"
#include "ifadit/fields.hpp"
#include "ifadit/graph.hpp"

namespace ifadit {

namespace {

constexpr char kMagic[4] = {'I', 'F', 'D', 'S'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kRendererHidden = 64;
constexpr std::size_t kRendererBandwidth = 8;
// Pre-sigmoid pixel std around 1.2 keeps rendered images mid-contrast.
constexpr double kRendererFieldScale = 0.21;
// Identity latents get a slightly larger input gain than attribute latents
// so identity dominates the rendered content.
constexpr double kIdentityGain = 1.25;

}  // namespace

Renderer Renderer::init(const DatasetDims& dims, std::uint64_t seed) {
    PrecisionGuard guard(Precision::f32);
    Rng rng(seed);
    const std::size_t d_in = dims.d_id + dims.d_attr;
    const std::size_t pixels = dims.img_h * dims.img_w;

    Tensor w1({d_in, kRendererHidden});
    Rng w1_rng = rng.fork("w1");
    for (std::size_t i = 0; i < d_in; ++i) {
        const double gain = i < dims.d_id ? kIdentityGain : 1.0;
        const double stddev = gain / std::sqrt(static_cast<double>(d_in));
        for (std::size_t j = 0; j < kRendererHidden; ++j)
            w1[i * kRendererHidden + j] = w1_rng.normal(0.0, stddev);
    }
    quantize_inplace(w1);
    Rng w2_rng = rng.fork("w2");
    Tensor w2 = smooth_field_matrix(kRendererHidden, dims.img_h, dims.img_w, kRendererBandwidth,
                                    kRendererFieldScale, w2_rng);

    MlpSpec spec{{d_in, kRendererHidden, pixels}, Activation::leaky_relu, Activation::sigmoid};
    MlpParams mlp = MlpParams::from_tensors(
        spec, {std::move(w1), std::move(w2)},
        {Tensor({kRendererHidden}, 0.0), Tensor({pixels}, 0.0)}, /*trainable=*/false);
    return Renderer{dims, std::move(mlp)};
}

Tensor Renderer::render(const Tensor& id_latent, const Tensor& attr_latent) const {
    if (id_latent.shape != Shape{dims.d_id})
        throw DimensionError("render: identity latent must have length " +
                             std::to_string(dims.d_id));
    if (attr_latent.shape != Shape{dims.d_attr})
        throw DimensionError("render: attribute latent must have length " +
                             std::to_string(dims.d_attr));
    // Rendering is pinned to float32 so datasets are identical no matter
    // which precision mode the caller runs under.
    PrecisionGuard guard(Precision::f32);
    Tensor in({1, dims.d_id + dims.d_attr});
    for (std::size_t i = 0; i < dims.d_id; ++i) in[i] = id_latent[i];
    for (std::size_t i = 0; i < dims.d_attr; ++i) in[dims.d_id + i] = attr_latent[i];
    Tensor out = mlp_forward(mlp, constant(std::move(in))).value();
    out.shape = {out.size()};
    return out;
}

Tensor SyntheticDataset::image(std::size_t sample) const {
    const std::size_t pixels = dims.img_h * dims.img_w;
    Tensor out({pixels});
    for (std::size_t p = 0; p < pixels; ++p) out[p] = images[sample * pixels + p];
    return out;
}

Tensor SyntheticDataset::id_latent(std::size_t ident) const {
    Tensor out({dims.d_id});
    for (std::size_t i = 0; i < dims.d_id; ++i) out[i] = id_latents[ident * dims.d_id + i];
    return out;
}

std::vector<std::size_t> SyntheticDataset::train_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < n_samples(); ++s)
        if (!test_flag[identity_of(s)]) out.push_back(s);
    return out;
}

std::vector<std::size_t> SyntheticDataset::test_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < n_samples(); ++s)
        if (test_flag[identity_of(s)]) out.push_back(s);
    return out;
}

Tensor SyntheticDataset::image_batch(const std::vector<std::size_t>& samples) const {
    const std::size_t pixels = dims.img_h * dims.img_w;
    Tensor out({samples.size(), pixels});
    for (std::size_t i = 0; i < samples.size(); ++i)
        for (std::size_t p = 0; p < pixels; ++p) out[i * pixels + p] = images[samples[i] * pixels + p];
    return out;
}

SyntheticDataset gen_dataset(std::size_t n_ids, std::size_t per_id, const DatasetDims& dims,
                             std::uint64_t seed) {
    if (n_ids < 2 || per_id == 0)
        throw ContractError("gen_dataset: need at least two identities and one sample each");
    SyntheticDataset ds;
    ds.seed = seed;
    ds.n_ids = n_ids;
    ds.per_id = per_id;
    ds.dims = dims;

    Rng root(seed);
    const Renderer renderer = Renderer::init(dims, root.fork("renderer").seed());

    Rng id_rng = root.fork("ids");
    ds.id_latents = Tensor({n_ids, dims.d_id});
    for (auto& v : ds.id_latents.data) v = static_cast<float>(id_rng.normal());

    Rng attr_rng = root.fork("attrs");
    const std::size_t n = n_ids * per_id;
    ds.attr_latents = Tensor({n, dims.d_attr});
    for (auto& v : ds.attr_latents.data) v = static_cast<float>(attr_rng.normal());

    const std::size_t pixels = dims.img_h * dims.img_w;
    ds.images = Tensor({n, pixels});
    for (std::size_t s = 0; s < n; ++s) {
        Tensor u({dims.d_id});
        const std::size_t ident = s / per_id;
        for (std::size_t i = 0; i < dims.d_id; ++i) u[i] = ds.id_latents[ident * dims.d_id + i];
        Tensor v({dims.d_attr});
        for (std::size_t i = 0; i < dims.d_attr; ++i) v[i] = ds.attr_latents[s * dims.d_attr + i];
        const Tensor img = renderer.render(u, v);
        for (std::size_t p = 0; p < pixels; ++p) ds.images[s * pixels + p] = img[p];
    }

    // Test identities: 10% (at least one), chosen by a seeded shuffle.
    const std::size_t n_test = std::max<std::size_t>(1, n_ids / 10);
    std::vector<std::size_t> order(n_ids);
    for (std::size_t i = 0; i < n_ids; ++i) order[i] = i;
    Rng split_rng = root.fork("split");
    for (std::size_t i = n_ids - 1; i > 0; --i)
        std::swap(order[i], order[split_rng.below(i + 1)]);
    ds.test_flag.assign(n_ids, 0);
    for (std::size_t i = 0; i < n_test; ++i) ds.test_flag[order[n_ids - 1 - i]] = 1;
    return ds;
}

void save_dataset(const SyntheticDataset& ds, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path + " for writing");
    binio::write_bytes(os, kMagic, 4);
    binio::write_u32(os, kVersion);
    binio::write_u64(os, ds.seed);
    binio::write_u32(os, static_cast<std::uint32_t>(ds.n_ids));
    binio::write_u32(os, static_cast<std::uint32_t>(ds.per_id));
    binio::write_u32(os, static_cast<std::uint32_t>(ds.dims.d_id));
    binio::write_u32(os, static_cast<std::uint32_t>(ds.dims.d_attr));
    binio::write_u32(os, static_cast<std::uint32_t>(ds.dims.img_h));
    binio::write_u32(os, static_cast<std::uint32_t>(ds.dims.img_w));
    binio::write_f32_array(os, ds.id_latents.data);
    binio::write_f32_array(os, ds.attr_latents.data);
    binio::write_f32_array(os, ds.images.data);
    for (std::uint32_t flag : ds.test_flag) binio::write_u32(os, flag);
    os.flush();
    if (!os) throw IoError("write failed for " + path);
}

SyntheticDataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    char magic[4];
    binio::read_bytes(is, magic, 4, "magic");
    if (std::string_view(magic, 4) != std::string_view(kMagic, 4))
        throw FormatError(path + " is not a dataset file (bad magic)");
    const std::uint32_t version = binio::read_u32(is, "version");
    if (version != kVersion)
        throw VersionError(path + ": unsupported dataset version " + std::to_string(version));

    SyntheticDataset ds;
    ds.seed = binio::read_u64(is, "seed");
    ds.n_ids = binio::read_u32(is, "n_ids");
    ds.per_id = binio::read_u32(is, "per_id");
    ds.dims.d_id = binio::read_u32(is, "d_id");
    ds.dims.d_attr = binio::read_u32(is, "d_attr");
    ds.dims.img_h = binio::read_u32(is, "H");
    ds.dims.img_w = binio::read_u32(is, "W");
    if (ds.n_ids == 0 || ds.per_id == 0 || ds.dims.d_id == 0 || ds.dims.d_attr == 0 ||
        ds.dims.img_h == 0 || ds.dims.img_w == 0)
        throw FormatError(path + ": invalid header counts");

    const std::size_t n = ds.n_ids * ds.per_id;
    ds.id_latents = Tensor({ds.n_ids, ds.dims.d_id});
    binio::read_f32_array(is, ds.id_latents.data, ds.n_ids * ds.dims.d_id, "identity latents");
    ds.attr_latents = Tensor({n, ds.dims.d_attr});
    binio::read_f32_array(is, ds.attr_latents.data, n * ds.dims.d_attr, "attribute latents");
    ds.images = Tensor({n, ds.dims.img_h * ds.dims.img_w});
    binio::read_f32_array(is, ds.images.data, n * ds.dims.img_h * ds.dims.img_w, "images");
    ds.test_flag.resize(ds.n_ids);
    for (auto& flag : ds.test_flag) flag = binio::read_u32(is, "split flags");
    return ds;
}

}  // namespace ifadit
