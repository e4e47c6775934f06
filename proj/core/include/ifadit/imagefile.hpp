#pragma once

#include <string>

#include "ifadit/tensor.hpp"

namespace ifadit {

// Flat container for image batches produced by the anonymize/deanonymize
// commands: magic "IFIM" | u32 version=1 | u32 count | u32 H | u32 W |
// float32 LE pixel data. Round trips are bitwise exact.
struct ImageBatchFile {
    std::size_t img_h = 0;
    std::size_t img_w = 0;
    Tensor images;  // [count, H*W]
};

void save_images(const ImageBatchFile& batch, const std::string& path);
ImageBatchFile load_images(const std::string& path);

}  // namespace ifadit
