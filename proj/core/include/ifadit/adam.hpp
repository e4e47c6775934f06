#pragma once

#include <cstdint>
#include <vector>

#include "ifadit/graph.hpp"
#include "ifadit/tensor.hpp"

namespace ifadit {

struct AdamConfig {
    double lr = 4e-4;
    double beta1 = 0.0;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Standard Adam with bias correction. Moments are kept per parameter in
// registration order; the step counter increases once per step_update.
class AdamState {
  public:
    AdamState(AdamConfig cfg, const std::vector<Var>& params);

    // Applies one update using each parameter's accumulated gradient, then
    // clears the gradients. Parameters without a gradient (frozen or
    // unreached) are left untouched.
    void step_update();

    std::uint64_t step() const { return step_; }
    const AdamConfig& config() const { return cfg_; }

  private:
    AdamConfig cfg_;
    std::vector<Var> params_;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
    std::uint64_t step_ = 0;
};

// Single-tensor Adam update, exposed for direct use and testing:
// returns the updated parameter; moments and step live in the caller.
Tensor adam_step(const AdamConfig& cfg, std::uint64_t step, const Tensor& param,
                 const Tensor& grad, Tensor& m, Tensor& v);

}  // namespace ifadit
