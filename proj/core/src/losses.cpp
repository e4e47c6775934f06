#include "ifadit/losses.hpp"

#include "ifadit/error.hpp"
#include "ifadit/metrics.hpp"

namespace ifadit {

namespace {

// Mean over rows of the L2 norm of the per-row feature difference.
Var row_l2_mean(const Var& a, const Var& b) {
    return mean(safe_sqrt(row_sum(square(sub(a, b)))));
}

Var perc_distance_g(const PipelineModel& m, const Var& x, const Var& y) {
    return mean(square(sub(perc_features(m, x), perc_features(m, y))));
}

}  // namespace

Var loss_vq(const Var& recon, const Var& orig, std::size_t h, std::size_t w,
            const LossWeights& wts) {
    Var ssim_term = scale(add_const(neg(ssim_graph(recon, orig, h, w)), 1.0), wts.alpha);
    Var l1_term = scale(l1_mean(recon, orig), wts.beta);
    return add(ssim_term, l1_term);
}

Var loss_sem(const PipelineModel& m, const Var& recon, const Var& orig) {
    Var id_term = l1_mean(e_id_forward(m, recon), e_id_forward(m, orig));
    Var lm_term = l1_mean(lm_features(m, recon), lm_features(m, orig));
    return add(id_term, lm_term);
}

Phase1Terms loss_p1(const PipelineModel& m, const Var& images, const LossWeights& wts) {
    Var recon = reconstruct_g(m, images);
    Phase1Terms t;
    t.vq = loss_vq(recon, images, m.cfg.img_h, m.cfg.img_w, wts);
    t.sem = loss_sem(m, recon, images);
    t.total = add(scale(t.vq, wts.lambda_vq), t.sem);
    return t;
}

Var theta_plus_emb(const Var& e1, const Var& e2) {
    return mean(maximum(cos_rows(e1, e2), 0.0));
}

Var theta_minus_emb(const Var& e1, const Var& e2) {
    return mean(add_const(neg(cos_rows(e1, e2)), 1.0));
}

Var theta_plus(const PipelineModel& m, const Var& x, const Var& y) {
    return theta_plus_emb(e_id_forward(m, x), e_id_forward(m, y));
}

Var theta_minus(const PipelineModel& m, const Var& x, const Var& y) {
    return theta_minus_emb(e_id_forward(m, x), e_id_forward(m, y));
}

Var loss_anon(const PipelineModel& m, const Var& anon, const Var& orig) {
    return theta_plus(m, anon, orig);
}

Var loss_div_emb(const std::vector<Var>& emb_by_key) {
    if (emb_by_key.size() < 2)
        throw ContractError("loss_div: need anonymizations under at least two keys");
    const std::size_t batch = emb_by_key.front().shape()[0];
    if (batch < 2)
        throw ContractError("loss_div: need at least two identities in the batch");

    // Inter-identity term: same key, all C(B,2) row pairs.
    std::vector<std::size_t> left, right;
    for (std::size_t i = 0; i < batch; ++i)
        for (std::size_t j = i + 1; j < batch; ++j) {
            left.push_back(i);
            right.push_back(j);
        }
    Var inter_identity;
    for (std::size_t k = 0; k < emb_by_key.size(); ++k) {
        Var pairs = theta_plus_emb(select_rows(emb_by_key[k], left),
                                   select_rows(emb_by_key[k], right));
        inter_identity = k == 0 ? pairs : add(inter_identity, pairs);
    }
    inter_identity = scale(inter_identity, 1.0 / static_cast<double>(emb_by_key.size()));

    // Inter-key term: same identity, all C(K,2) key pairs.
    Var inter_key;
    std::size_t n_pairs = 0;
    for (std::size_t k = 0; k < emb_by_key.size(); ++k)
        for (std::size_t l = k + 1; l < emb_by_key.size(); ++l) {
            Var pairs = theta_plus_emb(emb_by_key[k], emb_by_key[l]);
            inter_key = n_pairs == 0 ? pairs : add(inter_key, pairs);
            ++n_pairs;
        }
    inter_key = scale(inter_key, 1.0 / static_cast<double>(n_pairs));

    return add(inter_identity, inter_key);
}

Var loss_div(const PipelineModel& m, const std::vector<Var>& anon_by_key) {
    std::vector<Var> embs;
    embs.reserve(anon_by_key.size());
    for (const auto& images : anon_by_key) embs.push_back(e_id_forward(m, images));
    return loss_div_emb(embs);
}

Var loss_deanon(const PipelineModel& m, const Var& recovered, const Var& false_recovered,
                const Var& orig) {
    Var orig_emb = e_id_forward(m, orig);
    return add(theta_minus_emb(e_id_forward(m, recovered), orig_emb),
               theta_plus_emb(e_id_forward(m, false_recovered), orig_emb));
}

Var loss_img(const PipelineModel& m, const Var& generated, const Var& orig, ImageKind kind,
             const LossWeights& wts) {
    const auto& lam = wts.schedule(kind);
    Var out = scale(l1_mean(generated, orig), lam[0]);
    out = add(out, scale(perc_distance_g(m, generated, orig), lam[1]));
    out = add(out, scale(l1_mean(lm_features(m, generated), lm_features(m, orig)), lam[2]));
    out = add(out, scale(row_l2_mean(fp_features(m, generated), fp_features(m, orig)), lam[3]));
    return out;
}

Phase2Terms loss_p2(const PipelineModel& m, const Var& images, const std::vector<Tensor>& keys,
                    Phase2Flags flags, const LossWeights& wts) {
    if (keys.size() < 2) throw ContractError("loss_p2: need at least two keys per batch");
    Phase2Terms t;

    Var orig_emb = e_id_forward(m, images);
    Var attr = e_attr_forward(m, images);

    // Anonymize under every key.
    std::vector<Var> anon_images;
    std::vector<Var> anon_embs;
    std::vector<Var> key_vars;
    anon_images.reserve(keys.size());
    for (const Tensor& k : keys) {
        Var kv = constant(k);
        key_vars.push_back(kv);
        Var z_anon = sif_forward(m.sif, orig_emb, kv);
        Var img = generator_forward(m, mapping_forward(m, z_anon, attr));
        anon_images.push_back(img);
        anon_embs.push_back(e_id_forward(m, img));
    }

    for (std::size_t k = 0; k < keys.size(); ++k) {
        Var term = theta_plus_emb(anon_embs[k], orig_emb);
        t.anon = k == 0 ? term : add(t.anon, term);
    }
    t.anon = scale(t.anon, 1.0 / static_cast<double>(keys.size()));

    if (!flags.no_div) t.div = loss_div_emb(anon_embs);

    // Recover the first-key anonymization with its own key and with the
    // second key (false recovery).
    Var z_ext = e_id_forward(m, anon_images[0]);
    if (!flags.no_icl) z_ext = icl_forward(m, z_ext);
    Var anon_attr = e_attr_forward(m, anon_images[0]);
    Var recovered = generator_forward(
        m, mapping_forward(m, sif_inverse(m.sif, z_ext, key_vars[0]), anon_attr));
    Var false_recovered = generator_forward(
        m, mapping_forward(m, sif_inverse(m.sif, z_ext, key_vars[1]), anon_attr));

    t.deanon = add(theta_minus_emb(e_id_forward(m, recovered), orig_emb),
                   theta_plus_emb(e_id_forward(m, false_recovered), orig_emb));

    if (!flags.no_img) {
        t.img = loss_img(m, recovered, images, ImageKind::recovered, wts);
        for (const Var& anon : anon_images)
            t.img = add(t.img, loss_img(m, anon, images, ImageKind::anonymized, wts));
        t.img = add(t.img, loss_img(m, false_recovered, images, ImageKind::false_recovered, wts));
    }

    t.total = add(t.anon, t.deanon);
    if (!flags.no_div) t.total = add(t.total, t.div);
    if (!flags.no_img) t.total = add(t.total, t.img);
    return t;
}

double perceptual_distance(const PipelineModel& m, const Tensor& x, const Tensor& y) {
    Tensor xb = x, yb = y;
    if (xb.shape.size() == 1) xb.shape = {1, xb.size()};
    if (yb.shape.size() == 1) yb.shape = {1, yb.size()};
    return perc_distance_g(m, constant(std::move(xb)), constant(std::move(yb))).value().scalar();
}

}  // namespace ifadit
