#include <doctest.h>

#include <cmath>

#include "ifadit/config.hpp"
#include "ifadit/error.hpp"
#include "ifadit/losses.hpp"
#include "test_support.hpp"

using namespace ifadit;

namespace {

Config small_config() {
    Config cfg;
    cfg.d_z = 16;
    cfg.d_k = 16;
    cfg.d_w = 16;
    cfg.m_slots = 2;
    cfg.d_id = 8;
    cfg.d_attr = 8;
    cfg.img_h = 16;
    cfg.img_w = 16;
    cfg.n_blocks = 3;
    cfg.seed = 83;
    return cfg;
}

Tensor random_images(const Config& cfg, std::size_t batch, std::uint64_t seed) {
    Rng rng(seed);
    Tensor t({batch, cfg.pixels()});
    for (auto& v : t.data) v = rng.uniform();
    return t;
}

// Unit-norm embedding rows with a prescribed pairwise cosine against a base
// direction.
Tensor emb_with_cosine(std::size_t rows, std::size_t dim, double cos_target) {
    Tensor out({rows, dim});
    const double sin_target = std::sqrt(1.0 - cos_target * cos_target);
    for (std::size_t i = 0; i < rows; ++i) {
        out[i * dim + 0] = cos_target;
        out[i * dim + 1 + (i % (dim - 1))] = sin_target;
    }
    return out;
}

}  // namespace

TEST_CASE("default loss weights are the published constants") {
    const LossWeights w;
    CHECK(w.alpha == 0.84);
    CHECK(w.beta == 0.16);
    CHECK(w.lambda_vq == 0.01);
    CHECK(w.schedule(ImageKind::recovered) == std::array<double, 4>{10.0, 1.0, 0.1, 0.01});
    CHECK(w.schedule(ImageKind::anonymized) == std::array<double, 4>{0.01, 0.1, 0.1, 0.01});
    CHECK(w.schedule(ImageKind::false_recovered) == std::array<double, 4>{0.01, 0.1, 0.1, 0.01});
}

TEST_CASE("visual-quality loss vanishes at exact reconstruction and decreases along the path") {
    PrecisionGuard g(Precision::f64);
    const Config cfg = small_config();
    const LossWeights w;
    const Tensor x = random_images(cfg, 1, 1);
    CHECK(loss_vq(constant(x), constant(x), cfg.img_h, cfg.img_w, w).value().scalar() == 0.0);

    const Tensor start = random_images(cfg, 1, 2);
    double prev = 1e300;
    for (double t : {0.0, 0.25, 0.5, 0.75, 0.9}) {
        Tensor interp({1, cfg.pixels()});
        for (std::size_t i = 0; i < interp.size(); ++i)
            interp[i] = (1.0 - t) * start[i] + t * x[i];
        const double v =
            loss_vq(constant(interp), constant(x), cfg.img_h, cfg.img_w, w).value().scalar();
        CHECK(v < prev);
        CHECK(v >= 0.0);
        prev = v;
    }
}

TEST_CASE("semantic loss is zero at identity, symmetric, and positive for shuffles") {
    PrecisionGuard g(Precision::f64);
    const Config cfg = small_config();
    const PipelineModel m = PipelineModel::init(cfg);
    const Tensor x = random_images(cfg, 2, 3);
    CHECK(loss_sem(m, constant(x), constant(x)).value().scalar() == 0.0);

    Tensor shuffled = x;
    std::reverse(shuffled.data.begin(), shuffled.data.end());
    const double ab = loss_sem(m, constant(shuffled), constant(x)).value().scalar();
    const double ba = loss_sem(m, constant(x), constant(shuffled)).value().scalar();
    CHECK(ab == ba);
    CHECK(ab > 0.0);
}

TEST_CASE("phase-I loss composes vq and sem with lambda 0.01") {
    PrecisionGuard g(Precision::f64);
    const Config cfg = small_config();
    const PipelineModel m = PipelineModel::init(cfg);
    const LossWeights w;
    const Tensor x = random_images(cfg, 2, 4);
    const Phase1Terms terms = loss_p1(m, constant(x), w);
    CHECK(terms.total.value().scalar() ==
          doctest::Approx(0.01 * terms.vq.value().scalar() + terms.sem.value().scalar())
              .epsilon(1e-12));
}

TEST_CASE("phase-I gradient reaches only the attribute encoder and mapper") {
    PrecisionGuard g(Precision::f64);
    const Config cfg = small_config();
    PipelineModel m = PipelineModel::init(cfg);
    m.e_id.set_trainable(false);
    m.generator.set_trainable(false);
    m.e_attr.set_trainable(true);
    m.mapper.set_trainable(true);

    const Tensor x = random_images(cfg, 2, 5);
    backward(loss_p1(m, constant(x), LossWeights{}).total);

    for (const auto& p : m.e_attr.params()) CHECK(p.has_grad());
    for (const auto& p : m.mapper.params()) CHECK(p.has_grad());
    for (const auto& p : m.e_id.params()) CHECK_FALSE(p.has_grad());
    for (const auto& p : m.generator.params()) CHECK_FALSE(p.has_grad());
}

TEST_CASE("theta_plus and theta_minus endpoints") {
    PrecisionGuard g(Precision::f64);
    const Config cfg = small_config();
    const PipelineModel m = PipelineModel::init(cfg);
    const Tensor x = random_images(cfg, 2, 6);

    CHECK(theta_plus(m, constant(x), constant(x)).value().scalar() == 1.0);
    CHECK(theta_minus(m, constant(x), constant(x)).value().scalar() == 0.0);

    // Engineered embeddings with cosine -0.3 clamp to zero.
    const Tensor base = emb_with_cosine(3, 8, 1.0);
    const Tensor tilted = emb_with_cosine(3, 8, -0.3);
    CHECK(theta_plus_emb(constant(tilted), constant(base)).value().scalar() == 0.0);
    CHECK(theta_minus_emb(constant(tilted), constant(base)).value().scalar() ==
          doctest::Approx(1.3).epsilon(1e-9));

    // theta_minus stays within [0, 2] for arbitrary embeddings.
    Rng rng(7);
    for (int t = 0; t < 50; ++t) {
        const Tensor a = test_support::random_normal({4, 8}, rng);
        const Tensor b = test_support::random_normal({4, 8}, rng);
        const double v = theta_minus_emb(constant(a), constant(b)).value().scalar();
        CHECK(v >= 0.0);
        CHECK(v <= 2.0);
    }
}

TEST_CASE("anonymization loss endpoints and batch averaging") {
    PrecisionGuard g(Precision::f64);
    const Config cfg = small_config();
    const PipelineModel m = PipelineModel::init(cfg);
    const Tensor x = random_images(cfg, 3, 8);
    CHECK(loss_anon(m, constant(x), constant(x)).value().scalar() == 1.0);

    // Orthogonal embeddings give zero.
    Tensor e1({2, 8}, 0.0), e2({2, 8}, 0.0);
    e1[0] = 1.0;
    e1[8 + 1] = 1.0;
    e2[2] = 1.0;
    e2[8 + 3] = 1.0;
    CHECK(theta_plus_emb(constant(e1), constant(e2)).value().scalar() == 0.0);

    // Batch mean of per-sample values: cosines 1 and 0 average to 0.5.
    Tensor f1({2, 8}, 0.0), f2({2, 8}, 0.0);
    f1[0] = 1.0;
    f2[0] = 1.0;  // pair cosine 1
    f1[8 + 0] = 1.0;
    f2[8 + 1] = 1.0;  // pair cosine 0
    CHECK(theta_plus_emb(constant(f1), constant(f2)).value().scalar() ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("diversity loss endpoints and pair enumeration") {
    PrecisionGuard g(Precision::f64);
    // All-identical anonymizations: both terms are 1, total 2.
    Tensor same({3, 8}, 0.0);
    for (int i = 0; i < 3; ++i) same[i * 8] = 1.0;
    CHECK(loss_div_emb({constant(same), constant(same)}).value().scalar() ==
          doctest::Approx(2.0).epsilon(1e-12));

    // Mutually orthogonal embeddings in every direction: total 0.
    Tensor k1({2, 8}, 0.0), k2({2, 8}, 0.0);
    k1[0] = 1.0;
    k1[8 + 1] = 1.0;
    k2[2] = 1.0;
    k2[8 + 3] = 1.0;
    CHECK(loss_div_emb({constant(k1), constant(k2)}).value().scalar() == 0.0);

    // C(n,2) enumeration: batch of 3 with rows (e0, e0, e1) under one key.
    // Same-key pairs have cosines (1, 0, 0) -> mean 1/3 per key.
    Tensor mixed({3, 8}, 0.0);
    mixed[0] = 1.0;
    mixed[8] = 1.0;
    mixed[16 + 1] = 1.0;
    const double v = loss_div_emb({constant(mixed), constant(mixed)}).value().scalar();
    CHECK(v == doctest::Approx(1.0 / 3.0 + 1.0).epsilon(1e-12));

    CHECK_THROWS_AS(loss_div_emb({constant(same)}), ContractError);
    CHECK_THROWS_AS(loss_div_emb({constant(Tensor({1, 8}, 1.0)), constant(Tensor({1, 8}, 1.0))}),
                    ContractError);
}

TEST_CASE("de-anonymization loss endpoints and additivity") {
    PrecisionGuard g(Precision::f64);
    const Config cfg = small_config();
    const PipelineModel m = PipelineModel::init(cfg);

    // Perfect recovery + orthogonal false recovery -> 0, via embeddings.
    Tensor orig({1, 8}, 0.0), ortho({1, 8}, 0.0);
    orig[0] = 1.0;
    ortho[1] = 1.0;
    const double zero = theta_minus_emb(constant(orig), constant(orig)).value().scalar() +
                        theta_plus_emb(constant(ortho), constant(orig)).value().scalar();
    CHECK(zero == 0.0);

    // Orthogonal recovery + identical false recovery -> 1 + 1 = 2.
    const double two = theta_minus_emb(constant(ortho), constant(orig)).value().scalar() +
                       theta_plus_emb(constant(orig), constant(orig)).value().scalar();
    CHECK(two == doctest::Approx(2.0).epsilon(1e-12));

    // Additivity through the image-level op.
    const Tensor x = random_images(cfg, 2, 9);
    const Tensor y = random_images(cfg, 2, 10);
    const Tensor z = random_images(cfg, 2, 11);
    const double total = loss_deanon(m, constant(y), constant(z), constant(x)).value().scalar();
    const double t1 = theta_minus(m, constant(y), constant(x)).value().scalar();
    const double t2 = theta_plus(m, constant(z), constant(x)).value().scalar();
    CHECK(total == doctest::Approx(t1 + t2).epsilon(1e-12));
}

TEST_CASE("image loss vanishes at the original for every kind") {
    PrecisionGuard g(Precision::f64);
    const Config cfg = small_config();
    const PipelineModel m = PipelineModel::init(cfg);
    const LossWeights w;
    const Tensor x = random_images(cfg, 2, 12);
    for (ImageKind kind :
         {ImageKind::recovered, ImageKind::anonymized, ImageKind::false_recovered})
        CHECK(loss_img(m, constant(x), constant(x), kind, w).value().scalar() == 0.0);

    // The recovered schedule weighs raw pixel error far more heavily.
    Tensor y = x;
    for (auto& v : y.data) v = std::min(1.0, v + 0.05);
    const double rec =
        loss_img(m, constant(y), constant(x), ImageKind::recovered, w).value().scalar();
    const double anon =
        loss_img(m, constant(y), constant(x), ImageKind::anonymized, w).value().scalar();
    CHECK(rec > anon);
}

TEST_CASE("phase-II loss decomposes additively and honors ablation flags") {
    PrecisionGuard g(Precision::f64);
    const Config cfg = small_config();
    const PipelineModel m = PipelineModel::init(cfg);
    const LossWeights w;
    const Tensor x = random_images(cfg, 3, 13);
    Rng rng(14);
    std::vector<Tensor> keys;
    for (int j = 0; j < 2; ++j) keys.push_back(test_support::random_normal({3, cfg.d_k}, rng));

    const Phase2Terms t = loss_p2(m, constant(x), keys, Phase2Flags{}, w);
    CHECK(t.total.value().scalar() ==
          doctest::Approx(t.anon.value().scalar() + t.div.value().scalar() +
                          t.deanon.value().scalar() + t.img.value().scalar())
              .epsilon(1e-12));

    const Phase2Terms no_div = loss_p2(m, constant(x), keys, Phase2Flags{true, false, false}, w);
    CHECK_FALSE(no_div.div.defined());
    CHECK(no_div.total.value().scalar() ==
          doctest::Approx(no_div.anon.value().scalar() + no_div.deanon.value().scalar() +
                          no_div.img.value().scalar())
              .epsilon(1e-12));

    const Phase2Terms no_img = loss_p2(m, constant(x), keys, Phase2Flags{false, true, false}, w);
    CHECK_FALSE(no_img.img.defined());

    CHECK_THROWS_AS(loss_p2(m, constant(x), {keys[0]}, Phase2Flags{}, w), ContractError);
}

TEST_CASE("phase-II gradient reaches only the flow and compensation layer") {
    PrecisionGuard g(Precision::f64);
    const Config cfg = small_config();
    PipelineModel m = PipelineModel::init(cfg);
    m.e_id.set_trainable(false);
    m.e_attr.set_trainable(false);
    m.mapper.set_trainable(false);
    m.generator.set_trainable(false);
    m.sif.set_trainable(true);
    m.icl.set_trainable(true);

    const Tensor x = random_images(cfg, 3, 15);
    Rng rng(16);
    std::vector<Tensor> keys;
    for (int j = 0; j < 2; ++j) keys.push_back(test_support::random_normal({3, cfg.d_k}, rng));
    backward(loss_p2(m, constant(x), keys, Phase2Flags{}, LossWeights{}).total);

    std::size_t sif_grads = 0;
    for (const auto& p : m.sif.params())
        if (p.has_grad()) ++sif_grads;
    CHECK(sif_grads > 0);
    for (const auto& p : m.icl.params()) CHECK(p.has_grad());
    for (const auto& p : m.e_attr.params()) CHECK_FALSE(p.has_grad());
    for (const auto& p : m.mapper.params()) CHECK_FALSE(p.has_grad());
    for (const auto& p : m.e_id.params()) CHECK_FALSE(p.has_grad());
    for (const auto& p : m.generator.params()) CHECK_FALSE(p.has_grad());
}

TEST_CASE("perceptual distance is zero at identity and positive otherwise") {
    PrecisionGuard g(Precision::f64);
    const Config cfg = small_config();
    const PipelineModel m = PipelineModel::init(cfg);
    const Tensor x = random_images(cfg, 1, 17);
    const Tensor y = random_images(cfg, 1, 18);
    CHECK(perceptual_distance(m, x, x) == 0.0);
    CHECK(perceptual_distance(m, x, y) > 0.0);
}
