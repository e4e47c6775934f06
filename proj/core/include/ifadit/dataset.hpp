#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ifadit/mlp.hpp"
#include "ifadit/rng.hpp"
#include "ifadit/tensor.hpp"

namespace ifadit {

struct DatasetDims {
    std::size_t d_id = 16;
    std::size_t d_attr = 16;
    std::size_t img_h = 32;
    std::size_t img_w = 32;
};

// Frozen seed-initialized 2-layer decoder turning (identity latent,
// attribute latent) into a grayscale image in [0,1]. Deliberately a
// different seeded network from the pipeline generator, so reconstruction
// is a genuine learning problem.
struct Renderer {
    DatasetDims dims;
    MlpParams mlp;  // [d_id+d_attr, hidden, H*W], sigmoid output

    static Renderer init(const DatasetDims& dims, std::uint64_t seed);
    // Image as a flat [H*W] tensor, entries in [0,1], float32-representable.
    Tensor render(const Tensor& id_latent, const Tensor& attr_latent) const;
};

// Identity/attribute-factorized synthetic face stand-in. Identities are
// split 90/10 into train/test; no identity straddles the split.
struct SyntheticDataset {
    std::uint64_t seed = 0;
    std::size_t n_ids = 0;
    std::size_t per_id = 0;
    DatasetDims dims;
    Tensor id_latents;    // [n_ids, d_id]
    Tensor attr_latents;  // [n_ids*per_id, d_attr]
    Tensor images;        // [n_ids*per_id, H*W]
    std::vector<std::uint32_t> test_flag;  // per identity, 0 train / 1 test

    std::size_t n_samples() const { return n_ids * per_id; }
    std::size_t identity_of(std::size_t sample) const { return sample / per_id; }
    Tensor image(std::size_t sample) const;       // [H*W]
    Tensor id_latent(std::size_t ident) const;    // [d_id]
    std::vector<std::size_t> train_indices() const;
    std::vector<std::size_t> test_indices() const;

    // Rows of `samples` stacked into one [n, H*W] tensor.
    Tensor image_batch(const std::vector<std::size_t>& samples) const;
};

SyntheticDataset gen_dataset(std::size_t n_ids, std::size_t per_id, const DatasetDims& dims,
                             std::uint64_t seed);

// Binary persistence; round trip is bitwise exact.
void save_dataset(const SyntheticDataset& ds, const std::string& path);
SyntheticDataset load_dataset(const std::string& path);

}  // namespace ifadit
