#include "ifadit/imagefile.hpp"

#include <fstream>

#include "binio.hpp"
#include "ifadit/error.hpp"

namespace ifadit {

namespace {
constexpr char kMagic[4] = {'I', 'F', 'I', 'M'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_images(const ImageBatchFile& batch, const std::string& path) {
    if (batch.images.shape.size() != 2 ||
        batch.images.shape[1] != batch.img_h * batch.img_w)
        throw DimensionError("save_images: images must be [count, H*W]");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path + " for writing");
    binio::write_bytes(os, kMagic, 4);
    binio::write_u32(os, kVersion);
    binio::write_u32(os, static_cast<std::uint32_t>(batch.images.shape[0]));
    binio::write_u32(os, static_cast<std::uint32_t>(batch.img_h));
    binio::write_u32(os, static_cast<std::uint32_t>(batch.img_w));
    binio::write_f32_array(os, batch.images.data);
    os.flush();
    if (!os) throw IoError("write failed for " + path);
}

ImageBatchFile load_images(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    char magic[4];
    binio::read_bytes(is, magic, 4, "magic");
    if (std::string_view(magic, 4) != std::string_view(kMagic, 4))
        throw FormatError(path + " is not an image batch file (bad magic)");
    const std::uint32_t version = binio::read_u32(is, "version");
    if (version != kVersion)
        throw VersionError(path + ": unsupported image file version " + std::to_string(version));
    ImageBatchFile batch;
    const std::uint32_t count = binio::read_u32(is, "count");
    batch.img_h = binio::read_u32(is, "H");
    batch.img_w = binio::read_u32(is, "W");
    if (count == 0 || batch.img_h == 0 || batch.img_w == 0)
        throw FormatError(path + ": invalid header counts");
    batch.images = Tensor({count, batch.img_h * batch.img_w});
    binio::read_f32_array(is, batch.images.data, batch.images.size(), "pixel data");
    return batch;
}

}  // namespace ifadit
