#include "ifadit/adam.hpp"

#include <cmath>

#include "ifadit/error.hpp"

namespace ifadit {

Tensor adam_step(const AdamConfig& cfg, std::uint64_t step, const Tensor& param,
                 const Tensor& grad, Tensor& m, Tensor& v) {
    require_same_shape(param, grad, "adam_step");
    require_same_shape(param, m, "adam_step (first moment)");
    require_same_shape(param, v, "adam_step (second moment)");
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
    Tensor out(param.shape);
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad[i];
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        out[i] = param[i] - cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
    quantize_inplace(out);
    require_finite(out, "adam_step");
    return out;
}

AdamState::AdamState(AdamConfig cfg, const std::vector<Var>& params)
    : cfg_(cfg), params_(params) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const auto& p : params_) {
        m_.emplace_back(Tensor::zeros(p.shape()));
        v_.emplace_back(Tensor::zeros(p.shape()));
    }
}

void AdamState::step_update() {
    ++step_;
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Var& p = params_[i];
        if (!p.requires_grad() || !p.has_grad()) continue;
        p.mutable_value() = adam_step(cfg_, step_, p.value(), p.grad(), m_[i], v_[i]);
        p.zero_grad();
    }
}

}  // namespace ifadit
