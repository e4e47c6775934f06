#pragma once

#include <string>
#include <vector>

#include "ifadit/config.hpp"
#include "ifadit/flow.hpp"
#include "ifadit/graph.hpp"
#include "ifadit/keygen.hpp"
#include "ifadit/mlp.hpp"

namespace ifadit {

// The disentangle-transform-reconstruct architecture. Which components are
// trainable depends on the phase: the identity encoder trains in phase 0
// and is frozen afterwards, attribute encoder and mapping network train in
// phase I, the flow and compensation layer in phase II. The generator, key
// mapper, and the three frozen feature proxies (pose, parse, perceptual)
// never train.
struct PipelineModel {
    Config cfg;
    MlpParams e_id;        // image -> d_z (L2-normalized on use)
    MlpParams e_attr;      // image -> m*d_w
    MlpParams mapper;      // per-slot [z | a_slot] -> d_w, weights shared across slots
    MlpParams generator;   // m*d_w -> image in [0,1], frozen smooth decoder
    MlpParams icl;         // residual identity compensation, 4 layers
    SifModel sif;
    KeyMapper keymap;
    MlpParams lm_proxy;    // frozen pose features, image -> 16
    MlpParams fp_proxy;    // frozen layout features, image -> 16
    MlpParams perc_proxy;  // frozen perceptual features, image -> 64

    static PipelineModel init(const Config& cfg);

    // k for a secret, as a [rows, d_k] batch.
    Tensor key_batch(const Secret& s, std::size_t rows) const;
};

// --- component forwards (graph) -------------------------------------------

// Unit-norm identity embeddings, [B,HW] -> [B,d_z].
Var e_id_forward(const PipelineModel& m, const Var& images);
Var e_attr_forward(const PipelineModel& m, const Var& images);
// Replicates z across the m slots, concatenates with each attribute slot,
// and applies the shared two-layer mapping MLP per slot.
Var mapping_forward(const PipelineModel& m, const Var& z, const Var& a);
Var generator_forward(const PipelineModel& m, const Var& w);
// Residual correction: z + mlp(z).
Var icl_forward(const PipelineModel& m, const Var& z);

Var lm_features(const PipelineModel& m, const Var& images);
Var fp_features(const PipelineModel& m, const Var& images);
Var perc_features(const PipelineModel& m, const Var& images);

// --- compositions ----------------------------------------------------------

// G(M(E_ID(X), E_Attr(X))): reconstruction without identity transform.
Var reconstruct_g(const PipelineModel& m, const Var& images);

struct AnonymizeOptions {
    // Replace the flow with the identity map; anonymize then reduces to
    // reconstruction exactly.
    bool bypass_sif = false;
};
// G(M(T(E_ID(X), k), E_Attr(X))), k as [B,d_k].
Var anonymize_g(const PipelineModel& m, const Var& images, const Var& k,
                AnonymizeOptions opts = {});

struct DeanonymizeOptions {
    bool use_icl = true;
};
// G(M(T^{-1}(C(E_ID(X_anon)), k), E_Attr(X_anon))).
Var deanonymize_g(const PipelineModel& m, const Var& anon_images, const Var& k,
                  DeanonymizeOptions opts = {});

// --- inference wrappers (no gradients) -------------------------------------

// images: [B,HW] or a single flat [HW] image. Pure functions of
// (image, secret, parameters).
Tensor anonymize(const PipelineModel& m, const Tensor& images, const Secret& s,
                 AnonymizeOptions opts = {});
Tensor deanonymize(const PipelineModel& m, const Tensor& anon_images, const Secret& s,
                   DeanonymizeOptions opts = {});

// Soft-mask alpha blend: mask*generated + (1-mask)*original, elementwise.
// Inference-only refinement; mask entries must lie in [0,1].
Tensor blend(const Tensor& generated, const Tensor& original, const Tensor& mask);

}  // namespace ifadit
