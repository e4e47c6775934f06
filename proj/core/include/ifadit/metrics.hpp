#pragma once

#include <cstddef>

#include "ifadit/graph.hpp"
#include "ifadit/tensor.hpp"

namespace ifadit {

// SSIM constants for a [0,1] dynamic range, 7x7 uniform window.
inline constexpr std::size_t kSsimWindow = 7;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

// Differentiable SSIM of image batches [B, h*w] -> [1] (mean over windows
// and batch). Throws if the image is smaller than the window.
Var ssim_graph(const Var& x, const Var& y, std::size_t h, std::size_t w);

// Plain metrics over single images/vectors (eval path). ssim() runs the
// same computation as ssim_graph, so the two can never disagree.
double ssim(const Tensor& x, const Tensor& y, std::size_t h, std::size_t w);
double mse(const Tensor& x, const Tensor& y);
// 10*log10(1/mse); reported as 100 dB once mse < 1e-10.
double psnr(const Tensor& x, const Tensor& y);
inline constexpr double kPsnrCap = 100.0;

// Cosine similarity of two equal-length vectors; exact 1 (resp. -1) for a
// vector against itself (its negation). Zero-norm input is a contract error.
double cosine(const Tensor& u, const Tensor& v);

// Mean absolute elementwise difference.
double l1_distance(const Tensor& x, const Tensor& y);

}  // namespace ifadit
