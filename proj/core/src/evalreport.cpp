#include "ifadit/evalreport.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "ifadit/error.hpp"
#include "ifadit/metrics.hpp"
#include "ifadit/svg.hpp"

namespace ifadit {

namespace {

using nlohmann::json;

Tensor row_of(const Tensor& batch, std::size_t i) {
    const std::size_t cols = batch.cols();
    Tensor out({cols});
    for (std::size_t j = 0; j < cols; ++j) out[j] = batch[i * cols + j];
    return out;
}

Tensor embed(const PipelineModel& m, const Tensor& images) {
    return e_id_forward(m, constant(images)).value();
}

Tensor perc(const PipelineModel& m, const Tensor& images) {
    return perc_features(m, constant(images)).value();
}

double row_sq_mean(const Tensor& a, const Tensor& b, std::size_t i) {
    const std::size_t cols = a.cols();
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
        const double d = a[i * cols + j] - b[i * cols + j];
        acc += d * d;
    }
    return acc / static_cast<double>(cols);
}

std::vector<RecoveryRow> recovery_rows(const PipelineModel& m, const SyntheticDataset& data,
                                       const std::vector<std::size_t>& samples,
                                       const Tensor& originals, const Tensor& generated) {
    const Tensor orig_emb = embed(m, originals);
    const Tensor gen_emb = embed(m, generated);
    const Tensor orig_perc = perc(m, originals);
    const Tensor gen_perc = perc(m, generated);
    std::vector<RecoveryRow> rows(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Tensor x = row_of(originals, i);
        const Tensor y = row_of(generated, i);
        rows[i].sample = samples[i];
        rows[i].mse = mse(y, x);
        rows[i].psnr = psnr(y, x);
        rows[i].ssim = ssim(y, x, data.dims.img_h, data.dims.img_w);
        rows[i].perc = row_sq_mean(gen_perc, orig_perc, i);
        rows[i].cos = cosine(row_of(gen_emb, i), row_of(orig_emb, i));
    }
    return rows;
}

RecoveryStats stats_of(const std::vector<RecoveryRow>& rows) {
    RecoveryStats s;
    if (rows.empty()) return s;
    for (const auto& r : rows) {
        s.mse += r.mse;
        s.psnr += r.psnr;
        s.ssim += r.ssim;
        s.perc += r.perc;
        s.cos += r.cos;
    }
    const double n = static_cast<double>(rows.size());
    s.mse /= n;
    s.psnr /= n;
    s.ssim /= n;
    s.perc /= n;
    s.cos /= n;
    return s;
}

DeanonymizeOptions deanon_opts(const PipelineModel& m) {
    return DeanonymizeOptions{!m.cfg.no_icl};
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create report directory " + dir);
}

void write_text(const std::string& path, const std::string& body) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path + " for writing");
    os << body;
    if (!os) throw IoError("write failed for " + path);
}

json recovery_rows_json(const std::vector<RecoveryRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows)
        arr.push_back({{"sample", r.sample},
                       {"mse", r.mse},
                       {"psnr", r.psnr},
                       {"ssim", r.ssim},
                       {"perceptual", r.perc},
                       {"cosine", r.cos}});
    return arr;
}

json recovery_stats_json(const RecoveryStats& s) {
    return {{"mse", s.mse}, {"psnr", s.psnr}, {"ssim", s.ssim}, {"perceptual", s.perc},
            {"cosine", s.cos}};
}

}  // namespace

const AblationRow* AblationTable::find(const std::string& variant) const {
    for (const auto& r : rows)
        if (r.variant == variant) return &r;
    return nullptr;
}

std::vector<Secret> derive_variant_secrets(const Secret& base, std::size_t k) {
    std::vector<Secret> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        Secret s = base;
        s.bytes.push_back(static_cast<std::uint8_t>(i));
        out.push_back(std::move(s));
    }
    return out;
}

Secret flip_secret_bit(const Secret& s, std::size_t bit_index) {
    if (s.bytes.empty()) throw ContractError("flip_secret_bit: empty secret");
    Secret out = s;
    const std::size_t bit = bit_index % (out.bytes.size() * 8);
    out.bytes[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    return out;
}

DeidReport eval_deid(const PipelineModel& m, const SyntheticDataset& data,
                     const std::vector<std::size_t>& samples, const Secret& secret) {
    DeidReport report;
    const Tensor originals = data.image_batch(samples);
    const Tensor anon = anonymize(m, originals, secret);
    const Tensor recon = anonymize(m, originals, secret, AnonymizeOptions{/*bypass_sif=*/true});
    const Tensor orig_emb = embed(m, originals);
    const Tensor anon_emb = embed(m, anon);
    const Tensor recon_emb = embed(m, recon);
    report.rows.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        DeidRow& row = report.rows[i];
        row.sample = samples[i];
        const Tensor oe = row_of(orig_emb, i);
        row.cos_anon = cosine(row_of(anon_emb, i), oe);
        row.l1_anon = l1_distance(row_of(anon_emb, i), oe);
        row.cos_recon = cosine(row_of(recon_emb, i), oe);
        report.mean_cos_anon += row.cos_anon;
        report.mean_l1_anon += row.l1_anon;
        report.mean_cos_recon += row.cos_recon;
    }
    const double n = static_cast<double>(std::max<std::size_t>(1, samples.size()));
    report.mean_cos_anon /= n;
    report.mean_l1_anon /= n;
    report.mean_cos_recon /= n;
    return report;
}

RecoveryReport eval_recovery(const PipelineModel& m, const SyntheticDataset& data,
                             const std::vector<std::size_t>& samples, const Secret& secret) {
    RecoveryReport report;
    const Tensor originals = data.image_batch(samples);
    const Tensor anon = anonymize(m, originals, secret);
    const Tensor recovered = deanonymize(m, anon, secret, deanon_opts(m));
    const Tensor wrong = deanonymize(m, anon, flip_secret_bit(secret, 0), deanon_opts(m));
    const Tensor recon = anonymize(m, originals, secret, AnonymizeOptions{/*bypass_sif=*/true});
    report.matched = recovery_rows(m, data, samples, originals, recovered);
    report.wrong_key = recovery_rows(m, data, samples, originals, wrong);
    report.recon = recovery_rows(m, data, samples, originals, recon);
    report.matched_mean = stats_of(report.matched);
    report.wrong_key_mean = stats_of(report.wrong_key);
    report.recon_mean = stats_of(report.recon);
    return report;
}

DiversityReport eval_diversity(const PipelineModel& m, const SyntheticDataset& data,
                               const std::vector<std::size_t>& samples,
                               const std::vector<Secret>& secrets) {
    if (secrets.size() < 2) throw ContractError("eval_diversity: need at least two keys");
    DiversityReport report;
    report.n_keys = secrets.size();
    const Tensor originals = data.image_batch(samples);
    const Tensor orig_emb = embed(m, originals);
    std::vector<Tensor> embs;
    embs.reserve(secrets.size());
    for (const auto& s : secrets) embs.push_back(embed(m, anonymize(m, originals, s)));

    report.rows.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        DiversityRow& row = report.rows[i];
        row.sample = samples[i];
        double pair_cos = 0.0, pair_angle = 0.0, orig_cos = 0.0;
        std::size_t n_pairs = 0;
        for (std::size_t a = 0; a < embs.size(); ++a) {
            orig_cos += cosine(row_of(embs[a], i), row_of(orig_emb, i));
            for (std::size_t b = a + 1; b < embs.size(); ++b) {
                const double c = cosine(row_of(embs[a], i), row_of(embs[b], i));
                pair_cos += c;
                pair_angle += std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / std::numbers::pi;
                ++n_pairs;
            }
        }
        row.mean_pair_cos = pair_cos / static_cast<double>(n_pairs);
        row.angle_deg = pair_angle / static_cast<double>(n_pairs);
        row.mean_cos_orig = orig_cos / static_cast<double>(embs.size());
        report.mean_pairwise_cos += row.mean_pair_cos;
        report.kffa_proxy_deg += row.angle_deg;
        report.mean_anon_orig_cos += row.mean_cos_orig;
    }
    const double n = static_cast<double>(std::max<std::size_t>(1, samples.size()));
    report.mean_pairwise_cos /= n;
    report.kffa_proxy_deg /= n;
    report.mean_anon_orig_cos /= n;
    return report;
}

SensitivityReport eval_key_sensitivity(const PipelineModel& m, const SyntheticDataset& data,
                                       const std::vector<std::size_t>& samples,
                                       const Secret& secret, std::size_t n_flips) {
    SensitivityReport report;
    const Tensor originals = data.image_batch(samples);
    const Tensor orig_emb = embed(m, originals);
    const Tensor anon = anonymize(m, originals, secret);
    const Tensor matched = deanonymize(m, anon, secret, deanon_opts(m));
    const Tensor matched_emb = embed(m, matched);

    for (std::size_t f = 0; f < n_flips; ++f) {
        const Secret flipped = flip_secret_bit(secret, f);
        const Tensor wrong = deanonymize(m, anon, flipped, deanon_opts(m));
        const Tensor wrong_emb = embed(m, wrong);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            SensitivityRow row;
            row.sample = samples[i];
            row.flipped_bit = f;
            row.cos_match = cosine(row_of(matched_emb, i), row_of(orig_emb, i));
            row.cos_flipped = cosine(row_of(wrong_emb, i), row_of(orig_emb, i));
            row.gap = row.cos_match - row.cos_flipped;
            report.rows.push_back(row);
        }
    }
    if (!report.rows.empty()) {
        std::vector<double> gaps;
        gaps.reserve(report.rows.size());
        for (const auto& r : report.rows) {
            report.mean_gap += r.gap;
            gaps.push_back(r.gap);
        }
        report.mean_gap /= static_cast<double>(gaps.size());
        std::sort(gaps.begin(), gaps.end());
        report.min_gap = gaps.front();
        report.max_gap = gaps.back();
        report.median_gap = gaps[gaps.size() / 2];
    }
    return report;
}

AblationTable eval_ablation(const std::vector<std::pair<std::string, const PipelineModel*>>& models,
                            const SyntheticDataset& data, const std::vector<std::size_t>& samples,
                            const Secret& secret, std::size_t n_keys) {
    AblationTable table;
    const auto variant_secrets = derive_variant_secrets(secret, n_keys);
    for (const auto& [name, model] : models) {
        AblationRow row;
        row.variant = name;
        const DeidReport deid = eval_deid(*model, data, samples, secret);
        const RecoveryReport rec = eval_recovery(*model, data, samples, secret);
        const DiversityReport div = eval_diversity(*model, data, samples, variant_secrets);
        row.anon_cos = deid.mean_cos_anon;
        row.kffa_deg = div.kffa_proxy_deg;
        row.rec_ssim = rec.matched_mean.ssim;
        row.rec_perc = rec.matched_mean.perc;
        row.rec_cos = rec.matched_mean.cos;
        // Generation-quality proxy: mean perceptual distance between the
        // anonymized images and the dataset's real synthetic images.
        const Tensor originals = data.image_batch(samples);
        const Tensor anon = anonymize(*model, originals, secret);
        const Tensor po = perc(*model, originals);
        const Tensor pa = perc(*model, anon);
        double q = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) q += row_sq_mean(pa, po, i);
        row.quality_proxy = q / static_cast<double>(std::max<std::size_t>(1, samples.size()));
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_deid_report(const DeidReport& r, const std::string& dir) {
    ensure_dir(dir);
    json doc;
    doc["report"] = "deid";
    doc["mean_cos_anon"] = r.mean_cos_anon;
    doc["mean_l1_anon"] = r.mean_l1_anon;
    doc["mean_cos_recon"] = r.mean_cos_recon;
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"sample", row.sample},
                        {"cos_anon", row.cos_anon},
                        {"l1_anon", row.l1_anon},
                        {"cos_recon", row.cos_recon}});
    doc["rows"] = rows;
    write_text(dir + "/deid.json", doc.dump(2) + "\n");

    std::string csv = "sample,cos_anon,l1_anon,cos_recon\n";
    for (const auto& row : r.rows)
        csv += std::to_string(row.sample) + "," + std::to_string(row.cos_anon) + "," +
               std::to_string(row.l1_anon) + "," + std::to_string(row.cos_recon) + "\n";
    write_text(dir + "/deid.csv", csv);

    svg_bar_chart(dir + "/deid.svg", "De-identification (identity cosine)",
                  {"anonymized", "reconstruction"}, {r.mean_cos_anon, r.mean_cos_recon});
}

void write_recovery_report(const RecoveryReport& r, const std::string& dir) {
    ensure_dir(dir);
    json doc;
    doc["report"] = "recovery";
    doc["matched_mean"] = recovery_stats_json(r.matched_mean);
    doc["wrong_key_mean"] = recovery_stats_json(r.wrong_key_mean);
    doc["recon_mean"] = recovery_stats_json(r.recon_mean);
    doc["matched"] = recovery_rows_json(r.matched);
    doc["wrong_key"] = recovery_rows_json(r.wrong_key);
    doc["recon"] = recovery_rows_json(r.recon);
    write_text(dir + "/recovery.json", doc.dump(2) + "\n");

    std::string csv = "group,sample,mse,psnr,ssim,perceptual,cosine\n";
    auto emit = [&csv](const char* group, const std::vector<RecoveryRow>& rows) {
        for (const auto& row : rows)
            csv += std::string(group) + "," + std::to_string(row.sample) + "," +
                   std::to_string(row.mse) + "," + std::to_string(row.psnr) + "," +
                   std::to_string(row.ssim) + "," + std::to_string(row.perc) + "," +
                   std::to_string(row.cos) + "\n";
    };
    emit("matched", r.matched);
    emit("wrong_key", r.wrong_key);
    emit("recon", r.recon);
    write_text(dir + "/recovery.csv", csv);

    svg_bar_chart(dir + "/recovery.svg", "Recovery identity cosine",
                  {"matched", "wrong_key", "recon"},
                  {r.matched_mean.cos, r.wrong_key_mean.cos, r.recon_mean.cos});
}

void write_diversity_report(const DiversityReport& r, const std::string& dir) {
    ensure_dir(dir);
    json doc;
    doc["report"] = "diversity";
    doc["n_keys"] = r.n_keys;
    doc["mean_pairwise_cos"] = r.mean_pairwise_cos;
    doc["kffa_proxy_deg"] = r.kffa_proxy_deg;
    doc["mean_anon_orig_cos"] = r.mean_anon_orig_cos;
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"sample", row.sample},
                        {"mean_pair_cos", row.mean_pair_cos},
                        {"angle_deg", row.angle_deg},
                        {"mean_cos_orig", row.mean_cos_orig}});
    doc["rows"] = rows;
    write_text(dir + "/diversity.json", doc.dump(2) + "\n");

    std::string csv = "sample,mean_pair_cos,angle_deg,mean_cos_orig\n";
    for (const auto& row : r.rows)
        csv += std::to_string(row.sample) + "," + std::to_string(row.mean_pair_cos) + "," +
               std::to_string(row.angle_deg) + "," + std::to_string(row.mean_cos_orig) + "\n";
    write_text(dir + "/diversity.csv", csv);

    svg_bar_chart(dir + "/diversity.svg", "Diversity",
                  {"pairwise cos", "KFFA-proxy (deg)", "cos to original"},
                  {r.mean_pairwise_cos, r.kffa_proxy_deg, r.mean_anon_orig_cos});
}

void write_sensitivity_report(const SensitivityReport& r, const std::string& dir) {
    ensure_dir(dir);
    json doc;
    doc["report"] = "sensitivity";
    doc["mean_gap"] = r.mean_gap;
    doc["min_gap"] = r.min_gap;
    doc["median_gap"] = r.median_gap;
    doc["max_gap"] = r.max_gap;
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"sample", row.sample},
                        {"flipped_bit", row.flipped_bit},
                        {"cos_match", row.cos_match},
                        {"cos_flipped", row.cos_flipped},
                        {"gap", row.gap}});
    doc["rows"] = rows;
    write_text(dir + "/sensitivity.json", doc.dump(2) + "\n");

    std::string csv = "sample,flipped_bit,cos_match,cos_flipped,gap\n";
    for (const auto& row : r.rows)
        csv += std::to_string(row.sample) + "," + std::to_string(row.flipped_bit) + "," +
               std::to_string(row.cos_match) + "," + std::to_string(row.cos_flipped) + "," +
               std::to_string(row.gap) + "\n";
    write_text(dir + "/sensitivity.csv", csv);

    std::vector<double> gaps;
    gaps.reserve(r.rows.size());
    for (const auto& row : r.rows) gaps.push_back(row.gap);
    std::sort(gaps.begin(), gaps.end());
    svg_line_chart(dir + "/sensitivity.svg", "Key sensitivity gap distribution (sorted)", gaps);
}

void write_ablation_table(const AblationTable& t, const std::string& dir) {
    ensure_dir(dir);
    json doc;
    doc["report"] = "ablation";
    json rows = json::array();
    for (const auto& row : t.rows)
        rows.push_back({{"variant", row.variant},
                        {"anon_cos", row.anon_cos},
                        {"quality_proxy", row.quality_proxy},
                        {"kffa_deg", row.kffa_deg},
                        {"rec_ssim", row.rec_ssim},
                        {"rec_perc", row.rec_perc},
                        {"rec_cos", row.rec_cos}});
    doc["rows"] = rows;
    write_text(dir + "/ablation.json", doc.dump(2) + "\n");

    std::string csv = "variant,anon_cos,quality_proxy,kffa_deg,rec_ssim,rec_perc,rec_cos\n";
    std::vector<std::string> labels;
    std::vector<double> kffa;
    for (const auto& row : t.rows) {
        csv += row.variant + "," + std::to_string(row.anon_cos) + "," +
               std::to_string(row.quality_proxy) + "," + std::to_string(row.kffa_deg) + "," +
               std::to_string(row.rec_ssim) + "," + std::to_string(row.rec_perc) + "," +
               std::to_string(row.rec_cos) + "\n";
        labels.push_back(row.variant);
        kffa.push_back(row.kffa_deg);
    }
    write_text(dir + "/ablation.csv", csv);
    svg_bar_chart(dir + "/ablation.svg", "Ablation: KFFA-proxy (deg)", labels, kffa);
}

}  // namespace ifadit
