#include "ifadit/fields.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "ifadit/error.hpp"

namespace ifadit {

Tensor smooth_field_matrix(std::size_t rows, std::size_t h, std::size_t w, std::size_t bandwidth,
                           double scale, Rng& rng) {
    if (rows == 0 || h == 0 || w == 0 || bandwidth == 0)
        throw ContractError("smooth_field_matrix: sizes must be positive");
    const std::size_t n_modes = bandwidth * bandwidth;
    const std::size_t pixels = h * w;

    // DCT-II style modes, each normalized to unit pixel RMS.
    std::vector<double> modes(n_modes * pixels);
    std::vector<double> amp(n_modes);
    double amp_norm = 0.0;
    for (std::size_t fy = 0; fy < bandwidth; ++fy) {
        for (std::size_t fx = 0; fx < bandwidth; ++fx) {
            const std::size_t f = fy * bandwidth + fx;
            double rms = 0.0;
            for (std::size_t y = 0; y < h; ++y) {
                const double cy =
                    std::cos(std::numbers::pi * static_cast<double>(fy) * (y + 0.5) / h);
                for (std::size_t x = 0; x < w; ++x) {
                    const double cx =
                        std::cos(std::numbers::pi * static_cast<double>(fx) * (x + 0.5) / w);
                    const double v = cy * cx;
                    modes[f * pixels + y * w + x] = v;
                    rms += v * v;
                }
            }
            rms = std::sqrt(rms / static_cast<double>(pixels));
            for (std::size_t p = 0; p < pixels; ++p) modes[f * pixels + p] /= rms;
            amp[f] = 1.0 / (1.0 + static_cast<double>(fx + fy));
            amp_norm += amp[f] * amp[f];
        }
    }
    for (double& a : amp) a *= scale / std::sqrt(amp_norm);

    Tensor out({rows, pixels});
    for (std::size_t r = 0; r < rows; ++r) {
        double* dst = out.data.data() + r * pixels;
        for (std::size_t f = 0; f < n_modes; ++f) {
            const double coeff = rng.normal() * amp[f];
            const double* mode = modes.data() + f * pixels;
            for (std::size_t p = 0; p < pixels; ++p) dst[p] += coeff * mode[p];
        }
    }
    quantize_inplace(out);
    return out;
}

}  // namespace ifadit
