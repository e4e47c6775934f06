// Command-line surface for the invertible anonymization engine:
// gen-data, train, anonymize, deanonymize, eval, gradcheck.
//
// Exit codes: 0 success, 1 usage/config error, 2 I/O or format error,
// 3 numeric failure.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ifadit/checkpoint.hpp"
#include "ifadit/config.hpp"
#include "ifadit/dataset.hpp"
#include "ifadit/error.hpp"
#include "ifadit/evalreport.hpp"
#include "ifadit/gradcheck.hpp"
#include "ifadit/imagefile.hpp"
#include "ifadit/pipeline.hpp"
#include "ifadit/training.hpp"

namespace {

using namespace ifadit;

constexpr const char* kSecretEnvVar = "IFADIT_SECRET";
// Default protocol secret for `eval`, which measures metric protocols
// rather than protecting data.
constexpr const char* kDefaultEvalSecret = "ifadit-eval-protocol";

Secret resolve_secret(const std::string& flag_value, bool required) {
    if (!flag_value.empty()) return Secret::from_string(flag_value);
    if (const char* env = std::getenv(kSecretEnvVar); env && *env)
        return Secret::from_string(env);
    if (required) throw ConfigError("no secret given: use --secret or " + std::string(kSecretEnvVar));
    return Secret::from_string(kDefaultEvalSecret);
}

Config load_config_or_default(const std::string& path) {
    return path.empty() ? Config{} : Config::from_json_file(path);
}

void apply_ablations(Config& cfg, const std::vector<std::string>& ablations) {
    for (const std::string& a : ablations) {
        if (a == "no_div")
            cfg.no_div = true;
        else if (a == "no_img")
            cfg.no_img = true;
        else if (a == "no_icl")
            cfg.no_icl = true;
        else if (a == "no_dpt")
            cfg.no_dpt = true;
        else
            throw ConfigError("unknown ablation flag " + a);
    }
}

// Per-sample soft-mask blend; the mask file holds either one shared mask or
// one mask per image.
Tensor apply_mask(const Tensor& generated, const Tensor& originals, const std::string& mask_path,
                  std::size_t h, std::size_t w) {
    const ImageBatchFile mask_file = load_images(mask_path);
    if (mask_file.img_h != h || mask_file.img_w != w)
        throw FormatError("mask size does not match image size");
    const std::size_t count = generated.shape[0];
    const std::size_t n_masks = mask_file.images.shape[0];
    if (n_masks != 1 && n_masks != count)
        throw FormatError("mask file must hold one mask or one per image");
    const std::size_t pixels = h * w;
    Tensor out(generated.shape);
    Tensor gen_row({pixels}), orig_row({pixels}), mask_row({pixels});
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t mi = n_masks == 1 ? 0 : i;
        for (std::size_t p = 0; p < pixels; ++p) {
            gen_row[p] = generated[i * pixels + p];
            orig_row[p] = originals[i * pixels + p];
            mask_row[p] = mask_file.images[mi * pixels + p];
        }
        const Tensor blended = blend(gen_row, orig_row, mask_row);
        for (std::size_t p = 0; p < pixels; ++p) out[i * pixels + p] = blended[p];
    }
    return out;
}

int run(int argc, char** argv) {
    CLI::App app{"Invertible face anonymization engine (desk-scale)"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset");
    std::string gen_out, gen_config;
    std::size_t gen_ids = 200, gen_per_id = 10;
    std::uint64_t gen_seed = 1;
    gen->add_option("--out", gen_out, "Output dataset path")->required();
    gen->add_option("--ids", gen_ids, "Number of identities");
    gen->add_option("--per-id", gen_per_id, "Samples per identity");
    gen->add_option("--seed", gen_seed, "Generation seed");
    gen->add_option("--config", gen_config, "Config JSON (dimension overrides)");

    // train
    auto* train = app.add_subcommand("train", "Run one training phase");
    int train_phase = -1;
    std::string train_config, train_data, train_init, train_out;
    std::vector<std::string> train_ablate;
    train->add_option("--phase", train_phase, "Training phase (0, 1, or 2)")->required();
    train->add_option("--config", train_config, "Config JSON");
    train->add_option("--data", train_data, "Dataset path")->required();
    train->add_option("--init", train_init, "Initial checkpoint (phases 1 and 2)");
    train->add_option("--out", train_out, "Output checkpoint path")->required();
    train->add_option("--ablate", train_ablate, "Ablation: no_div, no_img, no_icl, no_dpt");

    // anonymize / deanonymize
    auto* anon = app.add_subcommand("anonymize", "Anonymize every image in a dataset");
    std::string anon_ckpt, anon_data, anon_secret, anon_out, anon_mask;
    anon->add_option("--ckpt", anon_ckpt, "Checkpoint path")->required();
    anon->add_option("--data", anon_data, "Dataset path")->required();
    anon->add_option("--secret", anon_secret, "Secret (or set IFADIT_SECRET)");
    anon->add_option("--out", anon_out, "Output image batch path")->required();
    anon->add_option("--mask", anon_mask, "Soft-mask image batch for blending");

    auto* deanon = app.add_subcommand("deanonymize", "Recover originals from anonymized images");
    std::string de_ckpt, de_data, de_secret, de_out, de_mask;
    deanon->add_option("--ckpt", de_ckpt, "Checkpoint path")->required();
    deanon->add_option("--data", de_data, "Anonymized image batch path")->required();
    deanon->add_option("--secret", de_secret, "Secret (or set IFADIT_SECRET)");
    deanon->add_option("--out", de_out, "Output image batch path")->required();
    deanon->add_option("--mask", de_mask, "Soft-mask image batch for blending");

    // eval
    auto* eval = app.add_subcommand("eval", "Write evaluation reports for a checkpoint");
    std::string eval_ckpt, eval_data, eval_report, eval_secret;
    std::size_t eval_keys = 4, eval_bitflips = 3;
    eval->add_option("--ckpt", eval_ckpt, "Checkpoint path")->required();
    eval->add_option("--data", eval_data, "Dataset path")->required();
    eval->add_option("--report", eval_report, "Report output directory")->required();
    eval->add_option("--keys", eval_keys, "Keys for the diversity report");
    eval->add_option("--bitflips", eval_bitflips, "Bit-flip trials for key sensitivity");
    eval->add_option("--secret", eval_secret, "Evaluation secret (optional)");

    // gradcheck
    auto* gc = app.add_subcommand("gradcheck", "Finite-difference gradient validation");
    std::string gc_config;
    gc->add_option("--config", gc_config, "Config JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 1;
    }

    if (gen->parsed()) {
        Config cfg = load_config_or_default(gen_config);
        DatasetDims dims{cfg.d_id, cfg.d_attr, cfg.img_h, cfg.img_w};
        const SyntheticDataset ds = gen_dataset(gen_ids, gen_per_id, dims, gen_seed);
        save_dataset(ds, gen_out);
        std::cerr << "wrote dataset " << gen_out << " (" << ds.n_samples() << " samples)\n";
        return 0;
    }

    if (train->parsed()) {
        Config cfg = load_config_or_default(train_config);
        apply_ablations(cfg, train_ablate);
        set_precision(cfg.prec);
        const SyntheticDataset data = load_dataset(train_data);
        Checkpoint out;
        if (train_phase == 0) {
            out = train_phase0(data, cfg, &std::cerr);
        } else if (train_phase == 1 || train_phase == 2) {
            if (train_init.empty())
                throw ConfigError("train --phase " + std::to_string(train_phase) +
                                  " requires --init");
            const Checkpoint init = load_checkpoint(train_init);
            out = train_phase == 1 ? train_phase1(data, cfg, init, &std::cerr)
                                   : train_phase2(data, cfg, init, &std::cerr);
        } else {
            throw ConfigError("--phase must be 0, 1, or 2");
        }
        save_checkpoint(out, train_out);
        std::cerr << "wrote checkpoint " << train_out << "\n";
        return 0;
    }

    if (anon->parsed()) {
        const Secret secret = resolve_secret(anon_secret, /*required=*/true);
        const Checkpoint ckpt = load_checkpoint(anon_ckpt);
        const PipelineModel model = restore_model(ckpt);
        set_precision(model.cfg.prec);
        const SyntheticDataset data = load_dataset(anon_data);
        Tensor images = anonymize(model, data.images, secret);
        if (!anon_mask.empty())
            images = apply_mask(images, data.images, anon_mask, data.dims.img_h, data.dims.img_w);
        save_images(ImageBatchFile{data.dims.img_h, data.dims.img_w, std::move(images)}, anon_out);
        std::cerr << "wrote anonymized images " << anon_out << "\n";
        return 0;
    }

    if (deanon->parsed()) {
        const Secret secret = resolve_secret(de_secret, /*required=*/true);
        const Checkpoint ckpt = load_checkpoint(de_ckpt);
        const PipelineModel model = restore_model(ckpt);
        set_precision(model.cfg.prec);
        const ImageBatchFile batch = load_images(de_data);
        Tensor images =
            deanonymize(model, batch.images, secret, DeanonymizeOptions{!model.cfg.no_icl});
        if (!de_mask.empty())
            images = apply_mask(images, batch.images, de_mask, batch.img_h, batch.img_w);
        save_images(ImageBatchFile{batch.img_h, batch.img_w, std::move(images)}, de_out);
        std::cerr << "wrote recovered images " << de_out << "\n";
        return 0;
    }

    if (eval->parsed()) {
        const Secret secret = resolve_secret(eval_secret, /*required=*/false);
        const Checkpoint ckpt = load_checkpoint(eval_ckpt);
        const PipelineModel model = restore_model(ckpt);
        set_precision(model.cfg.prec);
        const SyntheticDataset data = load_dataset(eval_data);
        std::vector<std::size_t> samples = data.test_indices();
        if (samples.empty()) samples = data.train_indices();
        write_deid_report(eval_deid(model, data, samples, secret), eval_report);
        write_recovery_report(eval_recovery(model, data, samples, secret), eval_report);
        write_diversity_report(
            eval_diversity(model, data, samples, derive_variant_secrets(secret, eval_keys)),
            eval_report);
        write_sensitivity_report(
            eval_key_sensitivity(model, data, samples, secret, eval_bitflips), eval_report);
        std::cerr << "wrote reports to " << eval_report << "\n";
        return 0;
    }

    if (gc->parsed()) {
        Config cfg = load_config_or_default(gc_config);
        const auto results = gradcheck_all(cfg);
        for (const auto& r : results)
            std::cerr << "gradcheck " << r.network << ": max_rel_err=" << r.max_rel_err << " "
                      << (r.pass ? "ok" : "FAIL") << "\n";
        if (!gradcheck_passed(results)) throw NumericError("gradient check failed");
        return 0;
    }

    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
