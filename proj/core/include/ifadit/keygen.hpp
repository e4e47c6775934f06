#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "ifadit/mlp.hpp"
#include "ifadit/rng.hpp"
#include "ifadit/tensor.hpp"

namespace ifadit {

// Arbitrary-length user secret. Secret bytes are never written to
// checkpoints, datasets, reports, or logs.
struct Secret {
    std::vector<std::uint8_t> bytes;

    static Secret from_string(std::string_view s);
};

// Conditioning vector fed to every coupling block.
struct SecretVector {
    Tensor k;  // [d_k]
};

// SHA-256 / HMAC / HKDF (RFC 5869) primitives, deterministic and
// self-contained. Exposed so tests can pin them to published vectors.
std::array<std::uint8_t, 32> sha256(const std::uint8_t* data, std::size_t len);
std::array<std::uint8_t, 32> hmac_sha256(const std::vector<std::uint8_t>& key,
                                         const std::vector<std::uint8_t>& data);
std::vector<std::uint8_t> hkdf_sha256(const std::vector<std::uint8_t>& salt,
                                      const std::vector<std::uint8_t>& ikm,
                                      const std::vector<std::uint8_t>& info, std::size_t out_len);

// Fixed domain separation for this artifact's key schedule.
inline constexpr std::string_view kKdfSalt = "iFADIT-v1";
inline constexpr std::string_view kKdfInfo = "sif-key";

// HKDF-SHA256 with the fixed salt/info above. Deterministic; out_len >= 1;
// an empty secret is a contract error.
std::vector<std::uint8_t> kdf(const Secret& s, std::size_t out_len);

// Linear byte normalization: b -> 2*b/255 - 1, each entry in [-1, 1].
Tensor byte_norm(const std::vector<std::uint8_t>& bytes);

// Frozen seed-initialized 2-layer tanh mapping network (d_k -> d_k) that
// adapts the normalized pseudorandom vector to the latent space used by
// the rest of the pipeline. Never trained.
struct KeyMapper {
    MlpParams mlp;

    static KeyMapper init(std::size_t d_k, Rng& rng);
    std::size_t d_k() const { return mlp.spec.in_dim(); }
    Tensor map(const Tensor& v) const;
};

// k = mapping(norm(kdf(s, d_k))); deterministic end to end.
SecretVector keygen(const Secret& s, const KeyMapper& mapper);

}  // namespace ifadit
