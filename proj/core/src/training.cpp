#include "ifadit/training.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <set>

#include "ifadit/adam.hpp"
#include "ifadit/error.hpp"

namespace ifadit {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void freeze_all(PipelineModel& m) {
    m.e_id.set_trainable(false);
    m.e_attr.set_trainable(false);
    m.mapper.set_trainable(false);
    m.generator.set_trainable(false);
    m.icl.set_trainable(false);
    m.sif.set_trainable(false);
}

std::vector<std::size_t> sample_batch(Rng& rng, const std::vector<std::size_t>& pool,
                                      std::size_t batch) {
    std::vector<std::size_t> out(batch);
    for (auto& idx : out) idx = pool[rng.below(pool.size())];
    return out;
}

// Batch with at least two distinct identities, as the diversity loss needs.
std::vector<std::size_t> sample_batch_multi_id(Rng& rng, const std::vector<std::size_t>& pool,
                                               std::size_t batch, const SyntheticDataset& data) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        auto idx = sample_batch(rng, pool, batch);
        std::set<std::size_t> idents;
        for (std::size_t s : idx) idents.insert(data.identity_of(s));
        if (idents.size() >= 2) return idx;
    }
    throw ContractError("phase 2 needs batches with at least two distinct identities");
}

std::vector<Secret> draw_distinct_secrets(Rng& rng, std::size_t count) {
    std::vector<Secret> out;
    while (out.size() < count) {
        Secret s{rng.bytes(16)};
        bool dup = false;
        for (const auto& prev : out) dup = dup || prev.bytes == s.bytes;
        if (!dup) out.push_back(std::move(s));
    }
    return out;
}

Var phase0_loss(const PipelineModel& m, const Var& images, const Var& targets) {
    return mean(add_const(neg(cos_rows(e_id_forward(m, images), targets)), 1.0));
}

}  // namespace

Tensor phase0_targets(const Config& cfg, const Tensor& id_latents) {
    if (id_latents.shape.size() != 2 || id_latents.shape[1] != cfg.d_id)
        throw DimensionError("phase0_targets: latents must be [n," + std::to_string(cfg.d_id) +
                             "]");
    Rng rng = Rng(cfg.seed).fork("phase0_target");
    Tensor proj({cfg.d_id, cfg.d_z});
    const double stddev = 1.0 / std::sqrt(static_cast<double>(cfg.d_id));
    for (auto& v : proj.data) v = rng.normal(0.0, stddev);
    quantize_inplace(proj);
    return normalize_rows(matmul(constant(id_latents), constant(std::move(proj)))).value();
}

Checkpoint train_phase0(const SyntheticDataset& data, const Config& cfg, std::ostream* log) {
    cfg.validate();
    PrecisionGuard guard(cfg.prec);
    PipelineModel model = PipelineModel::init(cfg);
    freeze_all(model);
    model.e_id.set_trainable(true);

    const Tensor targets_all = phase0_targets(cfg, data.id_latents);
    const std::vector<std::size_t> pool = data.train_indices();
    if (pool.empty()) throw ContractError("train_phase0: dataset has no training samples");
    Rng batch_rng = Rng(cfg.seed).fork("batch_p0");
    AdamState adam({cfg.lr, cfg.beta1, cfg.beta2}, model.e_id.params());

    const std::size_t d_z = cfg.d_z;
    for (std::size_t step = 1; step <= cfg.phase0_iters; ++step) {
        const auto t0 = Clock::now();
        const auto idx = sample_batch(batch_rng, pool, cfg.batch);
        Var images = constant(data.image_batch(idx));
        Tensor targets({idx.size(), d_z});
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const std::size_t ident = data.identity_of(idx[i]);
            for (std::size_t j = 0; j < d_z; ++j)
                targets[i * d_z + j] = targets_all[ident * d_z + j];
        }
        Var loss = phase0_loss(model, images, constant(std::move(targets)));
        backward(loss);
        adam.step_update();
        if (log)
            *log << "phase=0 step=" << step << " loss=" << loss.value().scalar()
                 << " wall=" << seconds_since(t0) << "\n";
    }

    model.e_id.set_trainable(false);
    return snapshot(model, 0);
}

Checkpoint train_phase1(const SyntheticDataset& data, const Config& cfg, const Checkpoint& init,
                        std::ostream* log) {
    cfg.validate();
    PrecisionGuard guard(cfg.prec);
    if (init.phase != 0)
        throw ConfigError("train_phase1: initial checkpoint must come from phase 0");
    PipelineModel model = restore_model(init);
    freeze_all(model);
    model.e_attr.set_trainable(true);
    model.mapper.set_trainable(true);

    const std::vector<std::size_t> pool = data.train_indices();
    if (pool.empty()) throw ContractError("train_phase1: dataset has no training samples");
    Rng batch_rng = Rng(cfg.seed).fork("batch_p1");
    std::vector<Var> params = model.e_attr.params();
    {
        auto mp = model.mapper.params();
        params.insert(params.end(), mp.begin(), mp.end());
    }
    AdamState adam({cfg.lr, cfg.beta1, cfg.beta2}, params);
    const LossWeights wts;

    for (std::size_t step = 1; step <= cfg.phase1_iters; ++step) {
        const auto t0 = Clock::now();
        const auto idx = sample_batch(batch_rng, pool, cfg.batch);
        Var images = constant(data.image_batch(idx));
        Phase1Terms terms = loss_p1(model, images, wts);
        backward(terms.total);
        adam.step_update();
        if (log)
            *log << "phase=1 step=" << step << " total=" << terms.total.value().scalar()
                 << " vq=" << terms.vq.value().scalar() << " sem=" << terms.sem.value().scalar()
                 << " wall=" << seconds_since(t0) << "\n";
    }
    return snapshot(model, 1);
}

Checkpoint train_phase2(const SyntheticDataset& data, const Config& cfg, const Checkpoint& init,
                        std::ostream* log) {
    cfg.validate();
    PrecisionGuard guard(cfg.prec);
    const bool joint = cfg.no_dpt;
    if (joint && init.phase != 0)
        throw ConfigError("train_phase2: the joint (no_dpt) run starts from a phase-0 checkpoint");
    if (!joint && init.phase != 1)
        throw ConfigError("train_phase2: initial checkpoint must come from phase 1");

    PipelineModel model = restore_model(init);
    freeze_all(model);
    model.sif.set_trainable(true);
    if (!cfg.no_icl) model.icl.set_trainable(true);
    if (joint) {
        model.e_attr.set_trainable(true);
        model.mapper.set_trainable(true);
    }

    const std::vector<std::size_t> pool = data.train_indices();
    if (pool.empty()) throw ContractError("train_phase2: dataset has no training samples");
    {
        std::set<std::size_t> train_ids;
        for (std::size_t s : pool) train_ids.insert(data.identity_of(s));
        if (train_ids.size() < 2)
            throw ContractError("train_phase2: need at least two training identities");
    }

    Rng batch_rng = Rng(cfg.seed).fork("batch_p2");
    Rng secret_rng = Rng(cfg.seed).fork("secrets");

    std::vector<Var> params = model.sif.params();
    if (!cfg.no_icl) {
        auto ip = model.icl.params();
        params.insert(params.end(), ip.begin(), ip.end());
    }
    if (joint) {
        for (const MlpParams* c : {&model.e_attr, &model.mapper}) {
            auto cp = c->params();
            params.insert(params.end(), cp.begin(), cp.end());
        }
    }
    AdamState adam({cfg.lr, cfg.beta1, cfg.beta2}, params);
    const LossWeights wts;
    const Phase2Flags flags{cfg.no_div, cfg.no_img, cfg.no_icl};
    const std::size_t iters = joint ? cfg.phase1_iters + cfg.phase2_iters : cfg.phase2_iters;

    for (std::size_t step = 1; step <= iters; ++step) {
        const auto t0 = Clock::now();
        const auto idx = sample_batch_multi_id(batch_rng, pool, cfg.batch, data);
        Var images = constant(data.image_batch(idx));

        const auto secrets = draw_distinct_secrets(secret_rng, cfg.keys_per_batch);
        std::vector<Tensor> keys;
        keys.reserve(secrets.size());
        for (const auto& s : secrets) keys.push_back(model.key_batch(s, idx.size()));

        Phase2Terms terms = loss_p2(model, images, keys, flags, wts);
        Var total = terms.total;
        Phase1Terms p1;
        if (joint) {
            p1 = loss_p1(model, images, wts);
            total = add(total, p1.total);
        }
        backward(total);
        adam.step_update();

        if (log) {
            *log << "phase=2 step=" << step << " total=" << total.value().scalar()
                 << " anon=" << terms.anon.value().scalar();
            if (!cfg.no_div) *log << " div=" << terms.div.value().scalar();
            *log << " deanon=" << terms.deanon.value().scalar();
            if (!cfg.no_img) *log << " img=" << terms.img.value().scalar();
            if (joint) *log << " p1=" << p1.total.value().scalar();
            *log << " wall=" << seconds_since(t0) << "\n";
        }
    }
    return snapshot(model, 2);
}

}  // namespace ifadit
