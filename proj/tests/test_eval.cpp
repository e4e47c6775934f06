#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ifadit/checkpoint.hpp"
#include "ifadit/error.hpp"
#include "ifadit/evalreport.hpp"
#include "ifadit/gradcheck.hpp"

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
    cfg.n_blocks = 2;
    cfg.seed = 2024;
    return cfg;
}

struct Fixture {
    Config cfg = small_config();
    SyntheticDataset data =
        gen_dataset(8, 3, DatasetDims{cfg.d_id, cfg.d_attr, cfg.img_h, cfg.img_w}, 11);
    PipelineModel model = PipelineModel::init(cfg);
    Secret secret = Secret::from_string("eval-fixture");
    std::vector<std::size_t> samples = data.test_indices();
};

}  // namespace

TEST_CASE("deid report means recompute from rows") {
    Fixture f;
    const DeidReport r = eval_deid(f.model, f.data, f.samples, f.secret);
    REQUIRE(r.rows.size() == f.samples.size());
    double cos_sum = 0.0, l1_sum = 0.0, recon_sum = 0.0;
    for (const auto& row : r.rows) {
        cos_sum += row.cos_anon;
        l1_sum += row.l1_anon;
        recon_sum += row.cos_recon;
    }
    const double n = static_cast<double>(r.rows.size());
    CHECK(r.mean_cos_anon == doctest::Approx(cos_sum / n).epsilon(1e-12));
    CHECK(r.mean_l1_anon == doctest::Approx(l1_sum / n).epsilon(1e-12));
    CHECK(r.mean_cos_recon == doctest::Approx(recon_sum / n).epsilon(1e-12));
}

TEST_CASE("recovery report computes psnr consistently with mse") {
    Fixture f;
    const RecoveryReport r = eval_recovery(f.model, f.data, f.samples, f.secret);
    REQUIRE(!r.matched.empty());
    for (const auto& row : r.matched) {
        if (row.mse >= 1e-10)
            CHECK(row.psnr == doctest::Approx(10.0 * std::log10(1.0 / row.mse)).epsilon(1e-9));
        else
            CHECK(row.psnr == 100.0);
    }
    // Means recompute from rows.
    double ssim_sum = 0.0;
    for (const auto& row : r.matched) ssim_sum += row.ssim;
    CHECK(r.matched_mean.ssim ==
          doctest::Approx(ssim_sum / static_cast<double>(r.matched.size())).epsilon(1e-12));
    CHECK(r.wrong_key.size() == r.matched.size());
    CHECK(r.recon.size() == r.matched.size());
}

TEST_CASE("identical keys give pairwise cosine 1 and angle 0") {
    Fixture f;
    const std::vector<Secret> same_keys = {f.secret, f.secret, f.secret};
    const DiversityReport r = eval_diversity(f.model, f.data, f.samples, same_keys);
    CHECK(r.n_keys == 3);
    CHECK(r.mean_pairwise_cos == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.kffa_proxy_deg == doctest::Approx(0.0).epsilon(1e-3));
    for (const auto& row : r.rows) {
        CHECK(row.mean_pair_cos == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(row.angle_deg >= 0.0);
        CHECK(row.angle_deg <= 180.0);
    }
    CHECK_THROWS_AS(eval_diversity(f.model, f.data, f.samples, {f.secret}), ContractError);
}

TEST_CASE("distinct derived keys give angles within range and means that recompute") {
    Fixture f;
    const DiversityReport r =
        eval_diversity(f.model, f.data, f.samples, derive_variant_secrets(f.secret, 4));
    double angle_sum = 0.0;
    for (const auto& row : r.rows) {
        CHECK(row.angle_deg >= 0.0);
        CHECK(row.angle_deg <= 180.0);
        angle_sum += row.angle_deg;
    }
    CHECK(r.kffa_proxy_deg ==
          doctest::Approx(angle_sum / static_cast<double>(r.rows.size())).epsilon(1e-12));
}

TEST_CASE("key sensitivity distribution is ordered and self-consistent") {
    Fixture f;
    const SensitivityReport r = eval_key_sensitivity(f.model, f.data, f.samples, f.secret, 3);
    CHECK(r.rows.size() == f.samples.size() * 3);
    CHECK(r.min_gap <= r.median_gap);
    CHECK(r.median_gap <= r.max_gap);
    double mean = 0.0;
    for (const auto& row : r.rows) {
        CHECK(row.gap == doctest::Approx(row.cos_match - row.cos_flipped).epsilon(1e-12));
        mean += row.gap;
    }
    CHECK(r.mean_gap == doctest::Approx(mean / static_cast<double>(r.rows.size())).epsilon(1e-12));

    // Recovering twice with the same secret gives identical embeddings, so
    // the no-flip gap is zero by definition.
    const Tensor originals = f.data.image_batch(f.samples);
    const Tensor anon = anonymize(f.model, originals, f.secret);
    const Tensor rec1 = deanonymize(f.model, anon, f.secret);
    const Tensor rec2 = deanonymize(f.model, anon, f.secret);
    CHECK(rec1.data == rec2.data);

    const SensitivityReport empty = eval_key_sensitivity(f.model, f.data, f.samples, f.secret, 0);
    CHECK(empty.rows.empty());
}

TEST_CASE("flip_secret_bit flips exactly one bit and wraps") {
    const Secret s = Secret::from_string("ab");
    const Secret f0 = flip_secret_bit(s, 0);
    CHECK(f0.bytes[0] == ('a' ^ 1));
    CHECK(f0.bytes[1] == 'b');
    const Secret wrap = flip_secret_bit(s, 16);
    CHECK(wrap.bytes[0] == ('a' ^ 1));
    CHECK_THROWS_AS(flip_secret_bit(Secret{}, 0), ContractError);
}

TEST_CASE("report writers emit json, csv, and svg that agree with the data") {
    Fixture f;
    const auto dir = std::filesystem::temp_directory_path() / "ifadit_reports";
    std::filesystem::remove_all(dir);

    write_deid_report(eval_deid(f.model, f.data, f.samples, f.secret), dir.string());
    write_recovery_report(eval_recovery(f.model, f.data, f.samples, f.secret), dir.string());
    write_diversity_report(
        eval_diversity(f.model, f.data, f.samples, derive_variant_secrets(f.secret, 3)),
        dir.string());
    write_sensitivity_report(eval_key_sensitivity(f.model, f.data, f.samples, f.secret, 2),
                             dir.string());

    for (const char* name : {"deid", "recovery", "diversity", "sensitivity"}) {
        for (const char* ext : {".json", ".csv", ".svg"}) {
            const auto path = dir / (std::string(name) + ext);
            INFO(path.string());
            CHECK(std::filesystem::exists(path));
            CHECK(std::filesystem::file_size(path) > 0);
        }
    }

    // The JSON means equal the mean of the JSON rows (values round-trip).
    std::ifstream is(dir / "deid.json");
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    CHECK(text.find("mean_cos_anon") != std::string::npos);
    CHECK(text.find("rows") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("eval_ablation produces one row per variant") {
    Fixture f;
    Config no_icl_cfg = f.cfg;
    no_icl_cfg.no_icl = true;
    PipelineModel no_icl_model = PipelineModel::init(no_icl_cfg);
    const AblationTable t = eval_ablation(
        {{"full", &f.model}, {"no_icl", &no_icl_model}}, f.data, f.samples, f.secret, 3);
    CHECK(t.rows.size() == 2);
    CHECK(t.find("full") != nullptr);
    CHECK(t.find("no_icl") != nullptr);
    CHECK(t.find("nope") == nullptr);
    for (const auto& row : t.rows) {
        CHECK(row.kffa_deg >= 0.0);
        CHECK(row.quality_proxy >= 0.0);
    }
}

TEST_CASE("gradient checks pass for every trainable sub-network") {
    Config cfg = small_config();
    const auto results = gradcheck_all(cfg, /*points=*/2);
    CHECK(results.size() == 5);
    for (const auto& r : results) {
        INFO(r.network, " max_rel_err=", r.max_rel_err);
        CHECK(r.pass);
        CHECK(r.max_rel_err < 1e-4);
    }
    CHECK(gradcheck_passed(results));
}
