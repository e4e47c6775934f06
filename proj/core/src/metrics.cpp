#include "ifadit/metrics.hpp"

#include <cmath>

#include "ifadit/error.hpp"

namespace ifadit {

Var ssim_graph(const Var& x, const Var& y, std::size_t h, std::size_t w) {
    require_same_shape(x.value(), y.value(), "ssim");
    if (h < kSsimWindow || w < kSsimWindow)
        throw ContractError("ssim: image smaller than the 7x7 window");

    Var mu_x = box_mean(x, h, w, kSsimWindow);
    Var mu_y = box_mean(y, h, w, kSsimWindow);
    Var mu_xx = mul(mu_x, mu_x);
    Var mu_yy = mul(mu_y, mu_y);
    Var mu_xy = mul(mu_x, mu_y);
    Var var_x = sub(box_mean(mul(x, x), h, w, kSsimWindow), mu_xx);
    Var var_y = sub(box_mean(mul(y, y), h, w, kSsimWindow), mu_yy);
    Var cov = sub(box_mean(mul(x, y), h, w, kSsimWindow), mu_xy);

    Var num = mul(add_const(scale(mu_xy, 2.0), kSsimC1), add_const(scale(cov, 2.0), kSsimC2));
    Var den = mul(add_const(add(mu_xx, mu_yy), kSsimC1), add_const(add(var_x, var_y), kSsimC2));
    return mean(div(num, den));
}

double ssim(const Tensor& x, const Tensor& y, std::size_t h, std::size_t w) {
    Tensor xb = x, yb = y;
    xb.shape = {1, numel(x.shape)};
    yb.shape = {1, numel(y.shape)};
    return ssim_graph(constant(std::move(xb)), constant(std::move(yb)), h, w).value().scalar();
}

double mse(const Tensor& x, const Tensor& y) {
    require_same_shape(x, y, "mse");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        acc += d * d;
    }
    return acc / static_cast<double>(x.size());
}

double psnr(const Tensor& x, const Tensor& y) {
    const double m = mse(x, y);
    if (m < 1e-10) return kPsnrCap;
    return 10.0 * std::log10(1.0 / m);
}

double cosine(const Tensor& u, const Tensor& v) {
    require_same_shape(u, v, "cosine");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) throw ContractError("cosine: zero-norm input");
    return dot / std::sqrt(nu * nv);
}

double l1_distance(const Tensor& x, const Tensor& y) {
    require_same_shape(x, y, "l1_distance");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += std::fabs(x[i] - y[i]);
    return acc / static_cast<double>(x.size());
}

}  // namespace ifadit
