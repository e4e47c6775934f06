#include "ifadit/config.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "ifadit/error.hpp"

namespace ifadit {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) ok = true;
        if (!ok) throw ConfigError("unknown config key \"" + it.key() + "\" in " + where);
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config key \"") + key + "\" has the wrong type");
    }
}

}  // namespace

void Config::validate() const {
    if (d_z == 0 || d_z % 2 != 0) throw ConfigError("d_z must be positive and even");
    if (d_k == 0 || d_w == 0 || m_slots == 0 || d_id == 0 || d_attr == 0)
        throw ConfigError("dimensions must be positive");
    if (img_h < 7 || img_w < 7) throw ConfigError("images must be at least 7x7");
    if (n_blocks == 0) throw ConfigError("n_blocks must be positive");
    if (clamp <= 0.0) throw ConfigError("clamp must be positive");
    if (batch == 0) throw ConfigError("batch must be positive");
    if (keys_per_batch < 2) throw ConfigError("keys_per_batch must be at least 2");
    if (lr <= 0.0) throw ConfigError("lr must be positive");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
        throw ConfigError("beta1/beta2 must lie in [0,1)");
}

Config Config::from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
    reject_unknown(doc, {"dimensions", "flow", "training", "ablation", "precision"}, "root");

    Config c;
    if (doc.contains("dimensions")) {
        const json& d = doc["dimensions"];
        reject_unknown(d, {"d_z", "d_k", "d_w", "m", "d_id", "d_attr", "H", "W"}, "dimensions");
        read(d, "d_z", c.d_z);
        read(d, "d_k", c.d_k);
        read(d, "d_w", c.d_w);
        read(d, "m", c.m_slots);
        read(d, "d_id", c.d_id);
        read(d, "d_attr", c.d_attr);
        read(d, "H", c.img_h);
        read(d, "W", c.img_w);
    }
    if (doc.contains("flow")) {
        const json& f = doc["flow"];
        reject_unknown(f, {"N", "c", "d_hidden"}, "flow");
        read(f, "N", c.n_blocks);
        read(f, "c", c.clamp);
        read(f, "d_hidden", c.d_hidden);
    }
    if (doc.contains("training")) {
        const json& t = doc["training"];
        reject_unknown(t,
                       {"phase0_iters", "phase1_iters", "phase2_iters", "batch", "keys_per_batch",
                        "lr", "beta1", "beta2", "seed"},
                       "training");
        read(t, "phase0_iters", c.phase0_iters);
        read(t, "phase1_iters", c.phase1_iters);
        read(t, "phase2_iters", c.phase2_iters);
        read(t, "batch", c.batch);
        read(t, "keys_per_batch", c.keys_per_batch);
        read(t, "lr", c.lr);
        read(t, "beta1", c.beta1);
        read(t, "beta2", c.beta2);
        read(t, "seed", c.seed);
    }
    if (doc.contains("ablation")) {
        const json& a = doc["ablation"];
        reject_unknown(a, {"no_div", "no_img", "no_icl", "no_dpt"}, "ablation");
        read(a, "no_div", c.no_div);
        read(a, "no_img", c.no_img);
        read(a, "no_icl", c.no_icl);
        read(a, "no_dpt", c.no_dpt);
    }
    if (doc.contains("precision")) {
        const std::string p = doc["precision"].get<std::string>();
        if (p == "float32")
            c.prec = Precision::f32;
        else if (p == "float64")
            c.prec = Precision::f64;
        else
            throw ConfigError("precision must be \"float32\" or \"float64\"");
    }
    c.validate();
    return c;
}

Config Config::from_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_text(text);
}

std::string Config::to_json_text() const {
    json doc;
    doc["dimensions"] = {{"d_z", d_z},   {"d_k", d_k}, {"d_w", d_w},       {"m", m_slots},
                         {"d_id", d_id}, {"d_attr", d_attr}, {"H", img_h}, {"W", img_w}};
    doc["flow"] = {{"N", n_blocks}, {"c", clamp}, {"d_hidden", d_hidden}};
    doc["training"] = {{"phase0_iters", phase0_iters},
                       {"phase1_iters", phase1_iters},
                       {"phase2_iters", phase2_iters},
                       {"batch", batch},
                       {"keys_per_batch", keys_per_batch},
                       {"lr", lr},
                       {"beta1", beta1},
                       {"beta2", beta2},
                       {"seed", seed}};
    doc["ablation"] = {{"no_div", no_div}, {"no_img", no_img}, {"no_icl", no_icl},
                       {"no_dpt", no_dpt}};
    doc["precision"] = prec == Precision::f32 ? "float32" : "float64";
    return doc.dump(2);
}

}  // namespace ifadit
