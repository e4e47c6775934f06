#pragma once

#include <string>
#include <vector>

#include "ifadit/dataset.hpp"
#include "ifadit/keygen.hpp"
#include "ifadit/pipeline.hpp"

namespace ifadit {

// Quantitative evaluation over a trained checkpoint. All evaluations are
// read-only; every report keeps per-sample rows and aggregate means that
// recompute exactly from those rows.

struct DeidRow {
    std::size_t sample = 0;
    double cos_anon = 0.0;   // cosine(E_ID(anonymized), E_ID(original))
    double l1_anon = 0.0;    // mean-abs distance of the same embeddings
    double cos_recon = 0.0;  // bypass baseline: cosine(E_ID(recon), E_ID(original))
};
struct DeidReport {
    std::vector<DeidRow> rows;
    double mean_cos_anon = 0.0;
    double mean_l1_anon = 0.0;
    double mean_cos_recon = 0.0;
};

struct RecoveryRow {
    std::size_t sample = 0;
    double mse = 0.0;
    double psnr = 0.0;
    double ssim = 0.0;
    double perc = 0.0;  // perceptual-proxy distance
    double cos = 0.0;   // identity cosine to the original
};
struct RecoveryStats {
    double mse = 0.0, psnr = 0.0, ssim = 0.0, perc = 0.0, cos = 0.0;
};
struct RecoveryReport {
    std::vector<RecoveryRow> matched;    // recovered with the matching secret
    std::vector<RecoveryRow> wrong_key;  // recovered with a one-bit-off secret
    std::vector<RecoveryRow> recon;      // reconstruction upper bound
    RecoveryStats matched_mean, wrong_key_mean, recon_mean;
};

struct DiversityRow {
    std::size_t sample = 0;
    double mean_pair_cos = 0.0;  // mean pairwise cosine among the K variants
    double angle_deg = 0.0;      // mean pairwise angle (KFFA-proxy), degrees
    double mean_cos_orig = 0.0;  // mean cosine of variants to the original
};
struct DiversityReport {
    std::size_t n_keys = 0;
    std::vector<DiversityRow> rows;
    double mean_pairwise_cos = 0.0;
    double kffa_proxy_deg = 0.0;
    double mean_anon_orig_cos = 0.0;
};

struct SensitivityRow {
    std::size_t sample = 0;
    std::size_t flipped_bit = 0;
    double cos_match = 0.0;
    double cos_flipped = 0.0;
    double gap = 0.0;  // cos_match - cos_flipped
};
struct SensitivityReport {
    std::vector<SensitivityRow> rows;
    double mean_gap = 0.0, min_gap = 0.0, median_gap = 0.0, max_gap = 0.0;
};

struct AblationRow {
    std::string variant;
    double anon_cos = 0.0;
    double quality_proxy = 0.0;  // mean perceptual distance of anonymized to original
    double kffa_deg = 0.0;
    double rec_ssim = 0.0;
    double rec_perc = 0.0;
    double rec_cos = 0.0;
};
struct AblationTable {
    std::vector<AblationRow> rows;
    const AblationRow* find(const std::string& variant) const;
};

DeidReport eval_deid(const PipelineModel& m, const SyntheticDataset& data,
                     const std::vector<std::size_t>& samples, const Secret& secret);

RecoveryReport eval_recovery(const PipelineModel& m, const SyntheticDataset& data,
                             const std::vector<std::size_t>& samples, const Secret& secret);

// One anonymization per secret in `secrets` (>= 2, typically K derived
// variants of a base secret).
DiversityReport eval_diversity(const PipelineModel& m, const SyntheticDataset& data,
                               const std::vector<std::size_t>& samples,
                               const std::vector<Secret>& secrets);

// Recover each sample with the matching secret and with `n_flips`
// single-bit-flipped secrets; reports the cosine gap distribution.
SensitivityReport eval_key_sensitivity(const PipelineModel& m, const SyntheticDataset& data,
                                       const std::vector<std::size_t>& samples,
                                       const Secret& secret, std::size_t n_flips);

// Runs the evaluation suite over named model variants (full + ablations).
AblationTable eval_ablation(const std::vector<std::pair<std::string, const PipelineModel*>>& models,
                            const SyntheticDataset& data, const std::vector<std::size_t>& samples,
                            const Secret& secret, std::size_t n_keys);

// K distinct secrets derived from a base secret by appending a counter byte.
std::vector<Secret> derive_variant_secrets(const Secret& base, std::size_t k);
// Copy of the secret with one bit flipped (bit index modulo the length).
Secret flip_secret_bit(const Secret& s, std::size_t bit_index);

// Report emission: <dir>/<name>.json, .csv, and .svg.
void write_deid_report(const DeidReport& r, const std::string& dir);
void write_recovery_report(const RecoveryReport& r, const std::string& dir);
void write_diversity_report(const DiversityReport& r, const std::string& dir);
void write_sensitivity_report(const SensitivityReport& r, const std::string& dir);
void write_ablation_table(const AblationTable& t, const std::string& dir);

}  // namespace ifadit
