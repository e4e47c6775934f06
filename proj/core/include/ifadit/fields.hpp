#pragma once

#include <cstddef>

#include "ifadit/rng.hpp"
#include "ifadit/tensor.hpp"

namespace ifadit {

// Random spatially-smooth weight rows for image-producing layers: each row
// is a seeded random combination of the lowest `bandwidth` x `bandwidth`
// 2-D cosine modes of an h x w grid, with amplitude decaying toward higher
// frequencies. Per-row pixel RMS is `scale`. Decoders initialized this way
// emit smooth, face-like intensity fields instead of white noise.
Tensor smooth_field_matrix(std::size_t rows, std::size_t h, std::size_t w, std::size_t bandwidth,
                           double scale, Rng& rng);

}  // namespace ifadit
