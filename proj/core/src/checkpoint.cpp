#include "ifadit/checkpoint.hpp"

#include <fstream>
#include <functional>
#include <map>

#include "binio.hpp"
#include "ifadit/config.hpp"
#include "ifadit/error.hpp"

namespace ifadit {

namespace {

constexpr char kMagic[4] = {'I', 'F', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

void for_each_component(PipelineModel& m,
                        const std::function<void(const std::string&, MlpParams&)>& fn) {
    fn("e_id", m.e_id);
    fn("e_attr", m.e_attr);
    fn("mapper", m.mapper);
    fn("generator", m.generator);
    fn("icl", m.icl);
    for (std::size_t b = 0; b < m.sif.blocks.size(); ++b) {
        const std::string prefix = "sif.b" + std::to_string(b) + ".";
        fn(prefix + "omega", m.sif.blocks[b].omega);
        fn(prefix + "phi", m.sif.blocks[b].phi);
        fn(prefix + "rho", m.sif.blocks[b].rho);
        fn(prefix + "eta", m.sif.blocks[b].eta);
    }
    fn("keymap", m.keymap.mlp);
    fn("lm_proxy", m.lm_proxy);
    fn("fp_proxy", m.fp_proxy);
    fn("perc_proxy", m.perc_proxy);
}

Tensor to_f32(const Tensor& t) {
    Tensor out = t;
    for (auto& v : out.data) v = static_cast<double>(static_cast<float>(v));
    return out;
}

}  // namespace

const NamedTensor* Checkpoint::find(const std::string& name) const {
    for (const auto& t : tensors)
        if (t.name == name) return &t;
    return nullptr;
}

Checkpoint snapshot(PipelineModel& model, std::uint8_t phase) {
    Checkpoint ckpt;
    ckpt.config_json = model.cfg.to_json_text();
    ckpt.phase = phase;
    for_each_component(model, [&](const std::string& name, MlpParams& mlp) {
        for (std::size_t l = 0; l < mlp.spec.n_layers(); ++l) {
            for (auto [suffix, var] : {std::pair{"w", &mlp.weights[l]}, {"b", &mlp.biases[l]}}) {
                Tensor stored = to_f32(var->value());
                var->mutable_value() = stored;
                ckpt.tensors.push_back(NamedTensor{name + "." + suffix + std::to_string(l),
                                                   std::move(stored), !var->requires_grad()});
            }
        }
    });
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path + " for writing");
    binio::write_bytes(os, kMagic, 4);
    binio::write_u32(os, ckpt.version);
    binio::write_u32(os, static_cast<std::uint32_t>(ckpt.config_json.size()));
    binio::write_bytes(os, ckpt.config_json.data(), ckpt.config_json.size());
    binio::write_u32(os, static_cast<std::uint32_t>(ckpt.tensors.size()));
    for (const auto& t : ckpt.tensors) {
        binio::write_u16(os, static_cast<std::uint16_t>(t.name.size()));
        binio::write_bytes(os, t.name.data(), t.name.size());
        binio::write_u8(os, static_cast<std::uint8_t>(t.value.shape.size()));
        for (std::size_t d : t.value.shape) binio::write_u32(os, static_cast<std::uint32_t>(d));
        binio::write_f32_array(os, t.value.data);
    }
    for (const auto& t : ckpt.tensors) binio::write_u8(os, t.frozen ? 1 : 0);
    binio::write_u8(os, ckpt.phase);
    os.flush();
    if (!os) throw IoError("write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    char magic[4];
    binio::read_bytes(is, magic, 4, "magic");
    if (std::string_view(magic, 4) != std::string_view(kMagic, 4))
        throw FormatError(path + " is not a checkpoint file (bad magic)");
    Checkpoint ckpt;
    ckpt.version = binio::read_u32(is, "version");
    if (ckpt.version != kVersion)
        throw VersionError(path + ": unsupported checkpoint version " +
                           std::to_string(ckpt.version));
    const std::uint32_t cfg_len = binio::read_u32(is, "config length");
    ckpt.config_json.resize(cfg_len);
    binio::read_bytes(is, ckpt.config_json.data(), cfg_len, "config echo");
    const std::uint32_t count = binio::read_u32(is, "tensor count");
    ckpt.tensors.resize(count);
    for (auto& t : ckpt.tensors) {
        const std::uint16_t name_len = binio::read_u16(is, "tensor name length");
        t.name.resize(name_len);
        binio::read_bytes(is, t.name.data(), name_len, "tensor name");
        const std::uint8_t rank = binio::read_u8(is, "tensor rank");
        Shape shape(rank);
        for (auto& d : shape) d = binio::read_u32(is, "tensor dims");
        t.value = Tensor(shape);
        binio::read_f32_array(is, t.value.data, numel(shape), "tensor data");
    }
    for (auto& t : ckpt.tensors) t.frozen = binio::read_u8(is, "frozen flags") != 0;
    ckpt.phase = binio::read_u8(is, "phase");
    return ckpt;
}

PipelineModel restore_model(const Checkpoint& ckpt) {
    const Config cfg = Config::from_json_text(ckpt.config_json);
    PipelineModel model = PipelineModel::init(cfg);
    std::size_t used = 0;
    for_each_component(model, [&](const std::string& name, MlpParams& mlp) {
        bool frozen = false;
        for (std::size_t l = 0; l < mlp.spec.n_layers(); ++l) {
            for (auto [suffix, var] : {std::pair{"w", &mlp.weights[l]}, {"b", &mlp.biases[l]}}) {
                const std::string key = name + "." + suffix + std::to_string(l);
                const NamedTensor* stored = ckpt.find(key);
                if (!stored) throw FormatError("checkpoint is missing tensor " + key);
                if (stored->value.shape != var->value().shape)
                    throw FormatError("checkpoint tensor " + key + " has shape " +
                                      shape_str(stored->value.shape) + ", expected " +
                                      shape_str(var->value().shape));
                var->mutable_value() = stored->value;
                var->node()->requires_grad = !stored->frozen;
                frozen = stored->frozen;
                ++used;
            }
        }
        mlp.trainable = !frozen;
    });
    if (used != ckpt.tensors.size())
        throw FormatError("checkpoint holds " + std::to_string(ckpt.tensors.size()) +
                          " tensors, model expects " + std::to_string(used));
    return model;
}

}  // namespace ifadit
