#pragma once

#include <iosfwd>

#include "ifadit/checkpoint.hpp"
#include "ifadit/config.hpp"
#include "ifadit/dataset.hpp"
#include "ifadit/losses.hpp"
#include "ifadit/pipeline.hpp"

namespace ifadit {

// Dual-phase training. Phase 0 pretrains the identity encoder against the
// dataset's ground-truth identity latents (the stand-in for a pretrained
// face recognizer); phase I trains the attribute encoder and mapping
// network on the reconstruction objective; phase II trains the flow and
// the compensation layer on the anonymization objectives with everything
// else frozen. With cfg.no_dpt set, phase 2 instead runs every loss
// jointly in a single pass from a phase-0 checkpoint.
//
// Each function logs one line per step ("phase=.. step=.. <terms> wall=..")
// to `log` when given. Runs are deterministic in cfg.seed: identical seeds
// produce bitwise-identical checkpoints on the same build.

Checkpoint train_phase0(const SyntheticDataset& data, const Config& cfg,
                        std::ostream* log = nullptr);
Checkpoint train_phase1(const SyntheticDataset& data, const Config& cfg, const Checkpoint& init,
                        std::ostream* log = nullptr);
Checkpoint train_phase2(const SyntheticDataset& data, const Config& cfg, const Checkpoint& init,
                        std::ostream* log = nullptr);

// Phase-0 regression target: the ground-truth identity latents pushed
// through a fixed seeded embedding and row-normalized, [n, d_z].
Tensor phase0_targets(const Config& cfg, const Tensor& id_latents);

}  // namespace ifadit
