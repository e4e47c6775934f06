#pragma once

#include <array>
#include <vector>

#include "ifadit/graph.hpp"
#include "ifadit/pipeline.hpp"

namespace ifadit {

enum class ImageKind { recovered, anonymized, false_recovered };

struct LossWeights {
    // Visual-quality loss.
    double alpha = 0.84;
    double beta = 0.16;
    // Phase I mixing weight on L_VQ.
    double lambda_vq = 0.01;
    // Multi-granularity image loss (L1, perceptual, pose, parse): recovered
    // images are held to fine detail, anonymized and falsely recovered ones
    // mostly to pose and layout.
    std::array<double, 4> img_recovered{10.0, 1.0, 0.1, 0.01};
    std::array<double, 4> img_other{0.01, 0.1, 0.1, 0.01};

    const std::array<double, 4>& schedule(ImageKind kind) const {
        return kind == ImageKind::recovered ? img_recovered : img_other;
    }
};

// alpha*(1-SSIM) + beta*L1, nonnegative, zero at exact reconstruction.
Var loss_vq(const Var& recon, const Var& orig, std::size_t h, std::size_t w,
            const LossWeights& wts);

// L1 on identity embeddings plus L1 on pose-proxy features.
Var loss_sem(const PipelineModel& m, const Var& recon, const Var& orig);

struct Phase1Terms {
    Var vq;
    Var sem;
    Var total;  // lambda_vq * vq + sem
};
// Reconstructs the batch internally and evaluates the phase-I objective.
Phase1Terms loss_p1(const PipelineModel& m, const Var& images, const LossWeights& wts);

// Clamped / inverted cosine similarity between identity embeddings,
// averaged over the batch. theta_plus in [0,1], theta_minus in [0,2].
Var theta_plus(const PipelineModel& m, const Var& x, const Var& y);
Var theta_minus(const PipelineModel& m, const Var& x, const Var& y);
// Same, on precomputed embedding batches.
Var theta_plus_emb(const Var& e1, const Var& e2);
Var theta_minus_emb(const Var& e1, const Var& e2);

// E[theta_plus(anonymized, original)].
Var loss_anon(const PipelineModel& m, const Var& anon, const Var& orig);

// Mean theta_plus over same-key different-identity pairs plus mean
// theta_plus over same-identity different-key pairs. Requires a batch of
// >=2 rows and >=2 keys.
Var loss_div(const PipelineModel& m, const std::vector<Var>& anon_by_key);
Var loss_div_emb(const std::vector<Var>& emb_by_key);

// theta_minus(recovered, original) + theta_plus(false_recovered, original).
Var loss_deanon(const PipelineModel& m, const Var& recovered, const Var& false_recovered,
                const Var& orig);

// Kind-weighted L1 + perceptual + pose + parse distance to the original.
Var loss_img(const PipelineModel& m, const Var& generated, const Var& orig, ImageKind kind,
             const LossWeights& wts);

struct Phase2Terms {
    Var anon;
    Var div;     // undefined when the diversity term is ablated
    Var deanon;
    Var img;     // undefined when the image term is ablated
    Var total;
};
struct Phase2Flags {
    bool no_div = false;
    bool no_img = false;
    bool no_icl = false;
};
// Full phase-II objective over one batch: anonymize under every key,
// recover with the first key, falsely recover with the second.
Phase2Terms loss_p2(const PipelineModel& m, const Var& images, const std::vector<Tensor>& keys,
                    Phase2Flags flags, const LossWeights& wts);

// Mean squared perceptual-proxy feature distance (plain scalar).
double perceptual_distance(const PipelineModel& m, const Tensor& x, const Tensor& y);

}  // namespace ifadit
