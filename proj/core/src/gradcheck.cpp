#include "ifadit/gradcheck.hpp"

#include <cmath>

#include "ifadit/error.hpp"
#include "ifadit/losses.hpp"
#include "ifadit/pipeline.hpp"
#include "ifadit/training.hpp"

namespace ifadit {

namespace {

struct CheckPoint {
    PipelineModel model;
    Tensor images;   // [B, HW]
    Tensor targets;  // [B, d_z] phase-0 regression targets
    std::vector<Tensor> keys;
};

CheckPoint make_point(const Config& cfg, std::uint64_t point_seed) {
    Config c = cfg;
    c.seed = point_seed;
    CheckPoint pt{PipelineModel::init(c), Tensor(), Tensor(), {}};
    Rng rng(point_seed);

    // Re-draw the flow and ICL at random: the production init zeroes their
    // output layers, which would leave parts of the parameter space
    // unexercised here. The flow uses the moderate regime; unmoderated
    // stacks saturate the generator and push finite differences out of
    // their numerically meaningful range.
    Rng sif_rng = rng.fork("gc_sif");
    pt.model.sif = SifModel::init(c.n_blocks, c.d_z, c.d_k, c.flow_hidden(), c.clamp, sif_rng,
                                  true, FlowInit::random_moderate);
    Rng icl_rng = rng.fork("gc_icl");
    pt.model.icl = MlpParams::init({{c.d_z, 2 * c.d_z, 2 * c.d_z, 2 * c.d_z, c.d_z}}, icl_rng,
                                   true);

    const std::size_t batch = 3;
    Rng img_rng = rng.fork("gc_images");
    pt.images = Tensor({batch, c.pixels()});
    for (auto& v : pt.images.data) v = img_rng.uniform();

    Rng target_rng = rng.fork("gc_targets");
    Tensor raw({batch, c.d_z});
    for (auto& v : raw.data) v = target_rng.normal();
    pt.targets = normalize_rows(constant(std::move(raw))).value();

    Rng key_rng = rng.fork("gc_keys");
    for (int j = 0; j < 2; ++j) {
        Tensor k({batch, c.d_k});
        for (auto& v : k.data) v = key_rng.normal();
        pt.keys.push_back(std::move(k));
    }
    return pt;
}

double loss_for(const CheckPoint& pt, const std::string& network) {
    const PipelineModel& m = pt.model;
    Var images = constant(pt.images);
    if (network == "e_id") {
        Var cos = cos_rows(e_id_forward(m, images), constant(pt.targets));
        return mean(add_const(neg(cos), 1.0)).value().scalar();
    }
    if (network == "e_attr" || network == "mapper")
        return loss_p1(m, images, LossWeights{}).total.value().scalar();
    // sif / icl
    return loss_p2(m, images, pt.keys, Phase2Flags{}, LossWeights{}).total.value().scalar();
}

Var loss_graph_for(const CheckPoint& pt, const std::string& network) {
    const PipelineModel& m = pt.model;
    Var images = constant(pt.images);
    if (network == "e_id")
        return mean(add_const(neg(cos_rows(e_id_forward(m, images), constant(pt.targets))), 1.0));
    if (network == "e_attr" || network == "mapper")
        return loss_p1(m, images, LossWeights{}).total;
    return loss_p2(m, images, pt.keys, Phase2Flags{}, LossWeights{}).total;
}

std::vector<Var> network_params(PipelineModel& m, const std::string& network) {
    if (network == "e_id") return m.e_id.params();
    if (network == "e_attr") return m.e_attr.params();
    if (network == "mapper") return m.mapper.params();
    if (network == "sif") return m.sif.params();
    if (network == "icl") return m.icl.params();
    throw ContractError("unknown network " + network);
}

}  // namespace

std::vector<GradCheckResult> gradcheck_all(const Config& cfg, std::size_t points, double eps,
                                           double tol) {
    PrecisionGuard guard(Precision::f64);
    std::vector<GradCheckResult> results;
    for (const char* network : {"e_id", "e_attr", "mapper", "sif", "icl"}) {
        GradCheckResult res{network, points, 0.0, true};
        for (std::size_t p = 0; p < points; ++p) {
            CheckPoint pt = make_point(cfg, cfg.seed + 7919 * (p + 1));
            auto params = network_params(pt.model, network);

            // Random unit direction over the network's flattened parameters.
            Rng dir_rng = Rng(cfg.seed).fork("gc_dir", p);
            std::vector<Tensor> dir;
            double norm2 = 0.0;
            for (const auto& param : params) {
                Tensor d(param.shape());
                for (auto& v : d.data) {
                    v = dir_rng.normal();
                    norm2 += v * v;
                }
                dir.push_back(std::move(d));
            }
            const double inv_norm = 1.0 / std::sqrt(norm2);
            for (auto& d : dir)
                for (auto& v : d.data) v *= inv_norm;

            Var loss = loss_graph_for(pt, network);
            backward(loss);
            double analytic = 0.0;
            for (std::size_t i = 0; i < params.size(); ++i) {
                if (!params[i].has_grad()) continue;
                const Tensor& g = params[i].grad();
                for (std::size_t j = 0; j < g.size(); ++j) analytic += g[j] * dir[i][j];
            }
            for (auto& param : params) param.zero_grad();

            auto shift = [&](double step) {
                for (std::size_t i = 0; i < params.size(); ++i) {
                    Tensor& v = params[i].mutable_value();
                    for (std::size_t j = 0; j < v.size(); ++j) v[j] += step * dir[i][j];
                }
            };
            shift(eps);
            const double plus = loss_for(pt, network);
            shift(-2.0 * eps);
            const double minus = loss_for(pt, network);
            shift(eps);

            const double fd = (plus - minus) / (2.0 * eps);
            const double denom = std::max({std::fabs(fd), std::fabs(analytic), 1e-10});
            const double rel = std::fabs(fd - analytic) / denom;
            res.max_rel_err = std::max(res.max_rel_err, rel);
            if (rel >= tol) res.pass = false;
        }
        results.push_back(std::move(res));
    }
    return results;
}

bool gradcheck_passed(const std::vector<GradCheckResult>& results) {
    for (const auto& r : results)
        if (!r.pass) return false;
    return true;
}

}  // namespace ifadit
