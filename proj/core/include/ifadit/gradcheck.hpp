#pragma once

#include <string>
#include <vector>

#include "ifadit/config.hpp"

namespace ifadit {

struct GradCheckResult {
    std::string network;
    std::size_t points = 0;
    double max_rel_err = 0.0;
    bool pass = false;
};

// Central finite-difference validation of every trainable sub-network
// (identity encoder, attribute encoder, mapping network, flow, ICL), run
// in float64. At each random point the analytic directional derivative of
// that network's training loss is compared against (L(p+eps*d) -
// L(p-eps*d)) / (2*eps) along a random unit direction.
std::vector<GradCheckResult> gradcheck_all(const Config& cfg, std::size_t points = 5,
                                           double eps = 1e-5, double tol = 1e-4);

bool gradcheck_passed(const std::vector<GradCheckResult>& results);

}  // namespace ifadit
