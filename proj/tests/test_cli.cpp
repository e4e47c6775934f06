// End-to-end checks of the command-line tool, run as subprocesses.

#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "ifadit/checkpoint.hpp"
#include "ifadit/dataset.hpp"
#include "ifadit/imagefile.hpp"
#include "ifadit/metrics.hpp"

using namespace ifadit;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string stderr_text;
};

fs::path work_dir() {
    const fs::path dir = fs::temp_directory_path() / "ifadit_cli_tests";
    fs::create_directories(dir);
    return dir;
}

CliResult run_cli(const std::string& args, const std::string& env = "") {
    const fs::path err_file = work_dir() / "stderr.txt";
    const std::string cmd =
        env + (env.empty() ? "" : " ") + IFADIT_CLI_PATH + " " + args + " 2>" + err_file.string();
    const int raw = std::system(cmd.c_str());
    CliResult res;
    res.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream is(err_file);
    res.stderr_text.assign((std::istreambuf_iterator<char>(is)),
                           std::istreambuf_iterator<char>());
    return res;
}

std::string read_bytes(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is);
    return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

// Small config shared by the CLI tests; written once.
fs::path small_config_path() {
    const fs::path path = work_dir() / "config.json";
    std::ofstream os(path);
    os << R"({
  "dimensions": {"d_z": 16, "d_k": 16, "d_w": 16, "m": 2, "d_id": 8, "d_attr": 8, "H": 16, "W": 16},
  "flow": {"N": 2},
  "training": {"phase0_iters": 40, "phase1_iters": 40, "phase2_iters": 40, "batch": 3, "seed": 7}
})";
    return path;
}

struct Artifacts {
    fs::path config = small_config_path();
    fs::path dataset = work_dir() / "data.ifds";
    fs::path ckpt0 = work_dir() / "p0.ifck";
    fs::path ckpt1 = work_dir() / "p1.ifck";
    fs::path ckpt2 = work_dir() / "p2.ifck";
};

// Build the full artifact chain once; later tests reuse it.
const Artifacts& artifacts() {
    static Artifacts a = [] {
        Artifacts art;
        REQUIRE(run_cli("gen-data --out " + art.dataset.string() +
                        " --ids 8 --per-id 3 --seed 5 --config " + art.config.string())
                    .exit_code == 0);
        REQUIRE(run_cli("train --phase 0 --config " + art.config.string() + " --data " +
                        art.dataset.string() + " --out " + art.ckpt0.string())
                    .exit_code == 0);
        REQUIRE(run_cli("train --phase 1 --config " + art.config.string() + " --data " +
                        art.dataset.string() + " --init " + art.ckpt0.string() + " --out " +
                        art.ckpt1.string())
                    .exit_code == 0);
        REQUIRE(run_cli("train --phase 2 --config " + art.config.string() + " --data " +
                        art.dataset.string() + " --init " + art.ckpt1.string() + " --out " +
                        art.ckpt2.string())
                    .exit_code == 0);
        return art;
    }();
    return a;
}

}  // namespace

TEST_CASE("gen-data writes a deterministic dataset and fails cleanly on bad paths") {
    const Artifacts& art = artifacts();
    CHECK(fs::exists(art.dataset));

    const fs::path again = work_dir() / "data_again.ifds";
    CHECK(run_cli("gen-data --out " + again.string() + " --ids 8 --per-id 3 --seed 5 --config " +
                  art.config.string())
              .exit_code == 0);
    CHECK(read_bytes(art.dataset) == read_bytes(again));

    CHECK(run_cli("gen-data --out /nonexistent-dir/x.ifds --ids 4 --per-id 2 --seed 1")
              .exit_code == 2);
}

TEST_CASE("train validates its usage") {
    const Artifacts& art = artifacts();
    // Phase 1 without --init is a usage error.
    CHECK(run_cli("train --phase 1 --config " + art.config.string() + " --data " +
                  art.dataset.string() + " --out /tmp/nope.ifck")
              .exit_code == 1);
    // Unknown phase.
    CHECK(run_cli("train --phase 7 --config " + art.config.string() + " --data " +
                  art.dataset.string() + " --out /tmp/nope.ifck")
              .exit_code == 1);
    // Unknown ablation flag.
    CHECK(run_cli("train --phase 0 --config " + art.config.string() + " --data " +
                  art.dataset.string() + " --out /tmp/nope.ifck --ablate no_nothing")
              .exit_code == 1);
    // Missing dataset file.
    CHECK(run_cli("train --phase 0 --config " + art.config.string() +
                  " --data /missing.ifds --out /tmp/nope.ifck")
              .exit_code == 2);
}

TEST_CASE("train emits one log line per step") {
    const Artifacts& art = artifacts();
    const fs::path out = work_dir() / "log_probe.ifck";
    const CliResult res = run_cli("train --phase 0 --config " + art.config.string() + " --data " +
                                  art.dataset.string() + " --out " + out.string());
    CHECK(res.exit_code == 0);
    std::size_t lines = 0;
    std::istringstream is(res.stderr_text);
    std::string line;
    while (std::getline(is, line))
        if (line.rfind("phase=0 step=", 0) == 0) ++lines;
    CHECK(lines == 40);
}

TEST_CASE("anonymize requires a secret and honors flag-over-environment") {
    const Artifacts& art = artifacts();
    const fs::path out = work_dir() / "anon.ifim";
    CHECK(run_cli("anonymize --ckpt " + art.ckpt2.string() + " --data " + art.dataset.string() +
                  " --out " + out.string())
              .exit_code == 1);

    CHECK(run_cli("anonymize --ckpt " + art.ckpt2.string() + " --data " + art.dataset.string() +
                      " --out " + out.string(),
                  "IFADIT_SECRET=envsecret")
              .exit_code == 0);
    const std::string from_env = read_bytes(out);

    CHECK(run_cli("anonymize --ckpt " + art.ckpt2.string() + " --data " + art.dataset.string() +
                      " --secret flagsecret --out " + out.string(),
                  "IFADIT_SECRET=envsecret")
              .exit_code == 0);
    const std::string from_flag = read_bytes(out);
    CHECK(from_env != from_flag);

    CHECK(run_cli("anonymize --ckpt " + art.ckpt2.string() + " --data " + art.dataset.string() +
                      " --secret envsecret --out " + out.string())
              .exit_code == 0);
    CHECK(read_bytes(out) == from_env);
}

TEST_CASE("anonymize then deanonymize matches the in-process evaluation") {
    const Artifacts& art = artifacts();
    const fs::path anon_path = work_dir() / "roundtrip_anon.ifim";
    const fs::path rec_path = work_dir() / "roundtrip_rec.ifim";
    const std::string secret = "cli-roundtrip-secret";

    CHECK(run_cli("anonymize --ckpt " + art.ckpt2.string() + " --data " + art.dataset.string() +
                  " --secret " + secret + " --out " + anon_path.string())
              .exit_code == 0);
    CHECK(run_cli("deanonymize --ckpt " + art.ckpt2.string() + " --data " + anon_path.string() +
                  " --secret " + secret + " --out " + rec_path.string())
              .exit_code == 0);

    const SyntheticDataset data = load_dataset(art.dataset.string());
    const ImageBatchFile rec = load_images(rec_path.string());
    REQUIRE(rec.images.shape == data.images.shape);

    // The recovered images reproduce the library path bitwise, so recovery
    // metrics agree with eval_recovery exactly.
    const Checkpoint ckpt = load_checkpoint(art.ckpt2.string());
    const PipelineModel model = restore_model(ckpt);
    set_precision(model.cfg.prec);
    const Secret s = Secret::from_string(secret);
    const Tensor expected = deanonymize(model, anonymize(model, data.images, s), s,
                                        DeanonymizeOptions{!model.cfg.no_icl});
    CHECK(rec.images.data == expected.data);
}

TEST_CASE("masks blend generated output with the blend endpoints") {
    const Artifacts& art = artifacts();
    const SyntheticDataset data = load_dataset(art.dataset.string());
    const std::size_t pixels = data.dims.img_h * data.dims.img_w;

    const fs::path ones_mask = work_dir() / "mask1.ifim";
    save_images(ImageBatchFile{data.dims.img_h, data.dims.img_w, Tensor({1, pixels}, 1.0)},
                ones_mask.string());
    const fs::path zeros_mask = work_dir() / "mask0.ifim";
    save_images(ImageBatchFile{data.dims.img_h, data.dims.img_w, Tensor({1, pixels}, 0.0)},
                zeros_mask.string());

    const fs::path plain = work_dir() / "plain.ifim";
    const fs::path masked1 = work_dir() / "masked1.ifim";
    const fs::path masked0 = work_dir() / "masked0.ifim";
    const std::string base = "anonymize --ckpt " + art.ckpt2.string() + " --data " +
                             art.dataset.string() + " --secret mask-test --out ";
    CHECK(run_cli(base + plain.string()).exit_code == 0);
    CHECK(run_cli(base + masked1.string() + " --mask " + ones_mask.string()).exit_code == 0);
    CHECK(run_cli(base + masked0.string() + " --mask " + zeros_mask.string()).exit_code == 0);

    // Mask of ones: pure generated output; mask of zeros: the original image.
    CHECK(read_bytes(masked1) == read_bytes(plain));
    const ImageBatchFile masked0_images = load_images(masked0.string());
    CHECK(masked0_images.images.data == data.images.data);
}

TEST_CASE("eval writes the report set and leaves inputs untouched") {
    const Artifacts& art = artifacts();
    const fs::path report_dir = work_dir() / "reports";
    fs::remove_all(report_dir);
    const std::string data_before = read_bytes(art.dataset);
    const std::string ckpt_before = read_bytes(art.ckpt2);

    CHECK(run_cli("eval --ckpt " + art.ckpt2.string() + " --data " + art.dataset.string() +
                  " --report " + report_dir.string() + " --keys 3 --bitflips 2")
              .exit_code == 0);

    for (const char* name : {"deid", "recovery", "diversity", "sensitivity"})
        for (const char* ext : {".json", ".csv", ".svg"})
            CHECK(fs::exists(report_dir / (std::string(name) + ext)));

    CHECK(read_bytes(art.dataset) == data_before);
    CHECK(read_bytes(art.ckpt2) == ckpt_before);
}

TEST_CASE("secrets never appear in any persisted artifact or log") {
    const Artifacts& art = artifacts();
    const std::string secret = "XK9-HIGHLY-DISTINCTIVE-SECRET-73Q";
    const fs::path anon_path = work_dir() / "hygiene_anon.ifim";
    const fs::path rec_path = work_dir() / "hygiene_rec.ifim";
    const fs::path report_dir = work_dir() / "hygiene_reports";

    const CliResult r1 =
        run_cli("anonymize --ckpt " + art.ckpt2.string() + " --data " + art.dataset.string() +
                " --secret " + secret + " --out " + anon_path.string());
    CHECK(r1.exit_code == 0);
    const CliResult r2 =
        run_cli("deanonymize --ckpt " + art.ckpt2.string() + " --data " + anon_path.string() +
                " --secret " + secret + " --out " + rec_path.string());
    CHECK(r2.exit_code == 0);
    const CliResult r3 = run_cli("eval --ckpt " + art.ckpt2.string() + " --data " +
                                     art.dataset.string() + " --report " + report_dir.string() +
                                     " --keys 2 --bitflips 1",
                                 "IFADIT_SECRET=" + secret);
    CHECK(r3.exit_code == 0);

    CHECK(r1.stderr_text.find(secret) == std::string::npos);
    CHECK(r2.stderr_text.find(secret) == std::string::npos);
    CHECK(r3.stderr_text.find(secret) == std::string::npos);
    CHECK(read_bytes(anon_path).find(secret) == std::string::npos);
    CHECK(read_bytes(rec_path).find(secret) == std::string::npos);
    CHECK(read_bytes(art.ckpt2).find(secret) == std::string::npos);
    CHECK(read_bytes(art.dataset).find(secret) == std::string::npos);
    for (const auto& entry : fs::recursive_directory_iterator(report_dir))
        if (entry.is_regular_file())
            CHECK(read_bytes(entry.path()).find(secret) == std::string::npos);
}

TEST_CASE("deanonymize rejects non-image inputs with a format error") {
    const Artifacts& art = artifacts();
    CHECK(run_cli("deanonymize --ckpt " + art.ckpt2.string() + " --data " + art.dataset.string() +
                  " --secret x --out /tmp/nope.ifim")
              .exit_code == 2);
}

TEST_CASE("gradcheck command validates gradients end to end") {
    const Artifacts& art = artifacts();
    CHECK(run_cli("gradcheck --config " + art.config.string()).exit_code == 0);
}
