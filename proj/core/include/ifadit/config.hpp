#pragma once

#include <cstdint>
#include <string>

#include "ifadit/tensor.hpp"

namespace ifadit {

// Runtime configuration. Defaults are the desk-scale values; every field
// can be overridden from a single JSON document with sections
// "dimensions", "flow", "training", "ablation" plus a top-level
// "precision". Unknown keys are rejected.
struct Config {
    // dimensions
    std::size_t d_z = 64;
    std::size_t d_k = 64;
    std::size_t d_w = 64;
    std::size_t m_slots = 4;
    std::size_t d_id = 16;
    std::size_t d_attr = 16;
    std::size_t img_h = 32;
    std::size_t img_w = 32;

    // flow
    std::size_t n_blocks = 8;
    double clamp = 2.0;
    std::size_t d_hidden = 0;  // 0 means d_z + d_k

    // training
    std::size_t phase0_iters = 3000;
    std::size_t phase1_iters = 10000;
    std::size_t phase2_iters = 20000;
    std::size_t batch = 4;
    std::size_t keys_per_batch = 2;
    double lr = 4e-4;
    double beta1 = 0.0;
    double beta2 = 0.999;
    std::uint64_t seed = 1;

    // ablation
    bool no_div = false;
    bool no_img = false;
    bool no_icl = false;
    bool no_dpt = false;

    Precision prec = Precision::f32;

    std::size_t flow_hidden() const { return d_hidden == 0 ? d_z + d_k : d_hidden; }
    std::size_t pixels() const { return img_h * img_w; }

    void validate() const;

    static Config from_json_text(const std::string& text);
    static Config from_json_file(const std::string& path);
    std::string to_json_text() const;
};

}  // namespace ifadit
