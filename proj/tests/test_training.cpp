#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ifadit/checkpoint.hpp"
#include "ifadit/error.hpp"
#include "ifadit/training.hpp"

using namespace ifadit;

namespace {

Config tiny_config() {
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
    cfg.batch = 3;
    cfg.phase0_iters = 60;
    cfg.phase1_iters = 60;
    cfg.phase2_iters = 60;
    cfg.seed = 1234;
    return cfg;
}

SyntheticDataset tiny_dataset(const Config& cfg) {
    return gen_dataset(10, 4, DatasetDims{cfg.d_id, cfg.d_attr, cfg.img_h, cfg.img_w}, cfg.seed);
}

const Tensor* find_tensor(const Checkpoint& c, const std::string& name) {
    const NamedTensor* t = c.find(name);
    REQUIRE(t != nullptr);
    return &t->value;
}

std::string checkpoint_bytes(Checkpoint& c) {
    const std::string path =
        (std::filesystem::temp_directory_path() / "ifadit_train_tmp.bin").string();
    save_checkpoint(c, path);
    std::ifstream is(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    std::remove(path.c_str());
    return bytes;
}

}  // namespace

TEST_CASE("phase 0 trains the identity encoder, freezes it, and logs per step") {
    const Config cfg = tiny_config();
    const SyntheticDataset data = tiny_dataset(cfg);
    std::ostringstream log;
    Checkpoint ckpt = train_phase0(data, cfg, &log);
    CHECK(ckpt.phase == 0);

    // One log line per step.
    std::size_t lines = 0;
    std::string line;
    std::istringstream in(log.str());
    double first_loss = -1.0, last_loss = -1.0;
    while (std::getline(in, line)) {
        if (line.rfind("phase=0", 0) == 0) {
            ++lines;
            const auto pos = line.find("loss=");
            const double v = std::stod(line.substr(pos + 5));
            if (first_loss < 0) first_loss = v;
            last_loss = v;
        }
    }
    CHECK(lines == cfg.phase0_iters);
    CHECK(last_loss < first_loss);

    // Every tensor in a phase-0 checkpoint is frozen.
    for (const auto& t : ckpt.tensors) CHECK(t.frozen);
}

TEST_CASE("phase 0 is deterministic in the seed") {
    const Config cfg = tiny_config();
    const SyntheticDataset data = tiny_dataset(cfg);
    Checkpoint a = train_phase0(data, cfg, nullptr);
    Checkpoint b = train_phase0(data, cfg, nullptr);
    CHECK(checkpoint_bytes(a) == checkpoint_bytes(b));

    Config other = cfg;
    other.seed = 4321;
    Checkpoint c = train_phase0(data, other, nullptr);
    CHECK(checkpoint_bytes(a) != checkpoint_bytes(c));
}

TEST_CASE("phase 1 leaves frozen components bitwise unchanged") {
    const Config cfg = tiny_config();
    const SyntheticDataset data = tiny_dataset(cfg);
    const Checkpoint ckpt0 = train_phase0(data, cfg, nullptr);
    std::ostringstream log;
    const Checkpoint ckpt1 = train_phase1(data, cfg, ckpt0, &log);
    CHECK(ckpt1.phase == 1);

    for (const char* name : {"e_id.w0", "e_id.b1", "generator.w0", "generator.w1", "keymap.w0",
                             "lm_proxy.w0", "fp_proxy.w0", "perc_proxy.w1"}) {
        CHECK(find_tensor(ckpt0, name)->data == find_tensor(ckpt1, name)->data);
    }
    // The attribute encoder and mapper did move.
    CHECK(find_tensor(ckpt0, "e_attr.w0")->data != find_tensor(ckpt1, "e_attr.w0")->data);
    CHECK(find_tensor(ckpt0, "mapper.w0")->data != find_tensor(ckpt1, "mapper.w0")->data);

    CHECK(log.str().find("vq=") != std::string::npos);
    CHECK(log.str().find("sem=") != std::string::npos);
}

TEST_CASE("phase 2 updates only the flow and compensation layer") {
    const Config cfg = tiny_config();
    const SyntheticDataset data = tiny_dataset(cfg);
    const Checkpoint ckpt0 = train_phase0(data, cfg, nullptr);
    const Checkpoint ckpt1 = train_phase1(data, cfg, ckpt0, nullptr);
    std::ostringstream log;
    const Checkpoint ckpt2 = train_phase2(data, cfg, ckpt1, &log);
    CHECK(ckpt2.phase == 2);

    for (const char* name : {"e_id.w0", "e_attr.w0", "mapper.w0", "generator.w0", "keymap.w0"}) {
        CHECK(find_tensor(ckpt1, name)->data == find_tensor(ckpt2, name)->data);
    }
    CHECK(find_tensor(ckpt1, "sif.b0.omega.w1")->data !=
          find_tensor(ckpt2, "sif.b0.omega.w1")->data);
    CHECK(find_tensor(ckpt1, "icl.w3")->data != find_tensor(ckpt2, "icl.w3")->data);

    for (const char* term : {"anon=", "div=", "deanon=", "img=", "wall="})
        CHECK(log.str().find(term) != std::string::npos);
}

TEST_CASE("phase sequencing is validated") {
    const Config cfg = tiny_config();
    const SyntheticDataset data = tiny_dataset(cfg);
    const Checkpoint ckpt0 = train_phase0(data, cfg, nullptr);
    CHECK_THROWS_AS(train_phase2(data, cfg, ckpt0, nullptr), ConfigError);
    const Checkpoint ckpt1 = train_phase1(data, cfg, ckpt0, nullptr);
    CHECK_THROWS_AS(train_phase1(data, cfg, ckpt1, nullptr), ConfigError);

    Config joint = cfg;
    joint.no_dpt = true;
    CHECK_THROWS_AS(train_phase2(data, joint, ckpt1, nullptr), ConfigError);
}

TEST_CASE("ablation flags shape the phase-2 run") {
    Config cfg = tiny_config();
    cfg.phase2_iters = 30;
    const SyntheticDataset data = tiny_dataset(cfg);
    const Checkpoint ckpt0 = train_phase0(data, cfg, nullptr);
    const Checkpoint ckpt1 = train_phase1(data, cfg, ckpt0, nullptr);

    Config no_icl = cfg;
    no_icl.no_icl = true;
    const Checkpoint ck = train_phase2(data, no_icl, ckpt1, nullptr);
    // The compensation layer stays untouched when ablated.
    CHECK(find_tensor(ckpt1, "icl.w3")->data == find_tensor(ck, "icl.w3")->data);

    Config no_div = cfg;
    no_div.no_div = true;
    std::ostringstream log;
    train_phase2(data, no_div, ckpt1, &log);
    CHECK(log.str().find("div=") == std::string::npos);

    // Joint single-phase run from the phase-0 checkpoint trains everything.
    Config joint = cfg;
    joint.no_dpt = true;
    joint.phase1_iters = 20;
    joint.phase2_iters = 20;
    const Checkpoint ckj = train_phase2(data, joint, ckpt0, nullptr);
    CHECK(ckj.phase == 2);
    CHECK(find_tensor(ckpt0, "e_attr.w0")->data != find_tensor(ckj, "e_attr.w0")->data);
    CHECK(find_tensor(ckpt0, "sif.b0.omega.w1")->data !=
          find_tensor(ckj, "sif.b0.omega.w1")->data);
    CHECK(find_tensor(ckpt0, "generator.w0")->data == find_tensor(ckj, "generator.w0")->data);
}

TEST_CASE("phase-0 targets are unit rows determined by identity latents") {
    const Config cfg = tiny_config();
    const SyntheticDataset data = tiny_dataset(cfg);
    PrecisionGuard g(Precision::f64);
    const Tensor targets = phase0_targets(cfg, data.id_latents);
    CHECK(targets.shape == Shape{data.n_ids, cfg.d_z});
    for (std::size_t i = 0; i < data.n_ids; ++i) {
        double n2 = 0.0;
        for (std::size_t j = 0; j < cfg.d_z; ++j)
            n2 += targets[i * cfg.d_z + j] * targets[i * cfg.d_z + j];
        CHECK(n2 == doctest::Approx(1.0).epsilon(1e-9));
    }
}
