#pragma once

// Shared test helpers: finite-difference oracles and tensor construction.

#include <cmath>
#include <functional>
#include <vector>

#include "ifadit/graph.hpp"
#include "ifadit/rng.hpp"
#include "ifadit/tensor.hpp"

namespace test_support {

inline ifadit::Tensor random_tensor(ifadit::Shape shape, ifadit::Rng& rng, double lo = -1.0,
                                    double hi = 1.0) {
    ifadit::Tensor t(std::move(shape));
    for (auto& v : t.data) v = rng.uniform(lo, hi);
    return t;
}

inline ifadit::Tensor random_normal(ifadit::Shape shape, ifadit::Rng& rng, double stddev = 1.0) {
    ifadit::Tensor t(std::move(shape));
    for (auto& v : t.data) v = rng.normal(0.0, stddev);
    return t;
}

// Central finite differences of a scalar function with respect to every
// entry of `at`, the independent oracle used to validate reverse-mode
// gradients.
inline ifadit::Tensor fd_gradient(const std::function<double(const ifadit::Tensor&)>& f,
                                  const ifadit::Tensor& at, double eps = 1e-6) {
    ifadit::Tensor grad(at.shape);
    ifadit::Tensor point = at;
    for (std::size_t i = 0; i < point.size(); ++i) {
        const double saved = point[i];
        point[i] = saved + eps;
        const double plus = f(point);
        point[i] = saved - eps;
        const double minus = f(point);
        point[i] = saved;
        grad[i] = (plus - minus) / (2.0 * eps);
    }
    return grad;
}

inline double max_abs_diff(const ifadit::Tensor& a, const ifadit::Tensor& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

inline double max_rel_diff(const ifadit::Tensor& a, const ifadit::Tensor& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = std::max({std::fabs(a[i]), std::fabs(b[i]), 1e-8});
        m = std::max(m, std::fabs(a[i] - b[i]) / denom);
    }
    return m;
}

// Analytic gradient of f(x) (a scalar graph expression) with respect to x.
inline ifadit::Tensor analytic_gradient(
    const std::function<ifadit::Var(const ifadit::Var&)>& f, const ifadit::Tensor& at) {
    ifadit::Var x(at, /*requires_grad=*/true);
    ifadit::Var loss = f(x);
    ifadit::backward(loss);
    return x.grad();
}

// FD-vs-analytic comparison for a graph scalar function of one tensor.
inline double check_gradient(const std::function<ifadit::Var(const ifadit::Var&)>& graph_fn,
                             const ifadit::Tensor& at, double eps = 1e-6) {
    const ifadit::Tensor analytic = analytic_gradient(graph_fn, at);
    const ifadit::Tensor fd = fd_gradient(
        [&](const ifadit::Tensor& t) { return graph_fn(ifadit::constant(t)).value().scalar(); },
        at, eps);
    return max_rel_diff(analytic, fd);
}

}  // namespace test_support
