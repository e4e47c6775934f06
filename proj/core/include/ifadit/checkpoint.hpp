#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ifadit/pipeline.hpp"
#include "ifadit/tensor.hpp"

namespace ifadit {

struct NamedTensor {
    std::string name;
    Tensor value;
    bool frozen = false;
};

// On-disk model state: config echo, every named parameter tensor as
// float32, per-tensor frozen flags, and the training phase that produced
// it. Loading a checkpoint reproduces inference bitwise.
struct Checkpoint {
    std::uint32_t version = 1;
    std::string config_json;
    std::uint8_t phase = 0;
    std::vector<NamedTensor> tensors;

    const NamedTensor* find(const std::string& name) const;
};

// Captures the model. Values are quantized to float32 and written back
// into the model as they are captured, so inference after snapshotting
// matches inference after reloading exactly.
Checkpoint snapshot(PipelineModel& model, std::uint8_t phase);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Rebuilds the model from the config echo and the stored tensors.
PipelineModel restore_model(const Checkpoint& ckpt);

}  // namespace ifadit
