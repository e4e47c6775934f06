#include "ifadit/keygen.hpp"

#include <cstring>

#include "ifadit/error.hpp"
#include "ifadit/graph.hpp"

namespace ifadit {

namespace {

constexpr std::array<std::uint32_t, 64> kSha256K = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
    0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
    0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
    0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
    0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
    0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
    0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
    0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
    0xc67178f2};

constexpr std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

void sha256_block(std::array<std::uint32_t, 8>& state, const std::uint8_t* block) {
    std::uint32_t w[64];
    for (int i = 0; i < 16; ++i)
        w[i] = (std::uint32_t(block[4 * i]) << 24) | (std::uint32_t(block[4 * i + 1]) << 16) |
               (std::uint32_t(block[4 * i + 2]) << 8) | std::uint32_t(block[4 * i + 3]);
    for (int i = 16; i < 64; ++i) {
        const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
        const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
        w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    auto [a, b, c, d, e, f, g, h] = state;
    for (int i = 0; i < 64; ++i) {
        const std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
        const std::uint32_t ch = (e & f) ^ (~e & g);
        const std::uint32_t t1 = h + s1 + ch + kSha256K[i] + w[i];
        const std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
        const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
        const std::uint32_t t2 = s0 + maj;
        h = g;
        g = f;
        f = e;
        e = d + t1;
        d = c;
        c = b;
        b = a;
        a = t1 + t2;
    }
    state[0] += a;
    state[1] += b;
    state[2] += c;
    state[3] += d;
    state[4] += e;
    state[5] += f;
    state[6] += g;
    state[7] += h;
}

}  // namespace

std::array<std::uint8_t, 32> sha256(const std::uint8_t* data, std::size_t len) {
    std::array<std::uint32_t, 8> state = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                                          0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
    std::size_t full = len / 64;
    for (std::size_t i = 0; i < full; ++i) sha256_block(state, data + 64 * i);

    std::uint8_t tail[128] = {0};
    const std::size_t rem = len - 64 * full;
    std::memcpy(tail, data + 64 * full, rem);
    tail[rem] = 0x80;
    const std::size_t tail_len = rem + 9 <= 64 ? 64 : 128;
    const std::uint64_t bits = static_cast<std::uint64_t>(len) * 8;
    for (int i = 0; i < 8; ++i)
        tail[tail_len - 1 - i] = static_cast<std::uint8_t>((bits >> (8 * i)) & 0xff);
    sha256_block(state, tail);
    if (tail_len == 128) sha256_block(state, tail + 64);

    std::array<std::uint8_t, 32> out;
    for (int i = 0; i < 8; ++i) {
        out[4 * i] = static_cast<std::uint8_t>(state[i] >> 24);
        out[4 * i + 1] = static_cast<std::uint8_t>(state[i] >> 16);
        out[4 * i + 2] = static_cast<std::uint8_t>(state[i] >> 8);
        out[4 * i + 3] = static_cast<std::uint8_t>(state[i]);
    }
    return out;
}

std::array<std::uint8_t, 32> hmac_sha256(const std::vector<std::uint8_t>& key,
                                         const std::vector<std::uint8_t>& data) {
    std::array<std::uint8_t, 64> k = {0};
    if (key.size() > 64) {
        const auto digest = sha256(key.data(), key.size());
        std::memcpy(k.data(), digest.data(), digest.size());
    } else {
        std::memcpy(k.data(), key.data(), key.size());
    }
    std::vector<std::uint8_t> inner(64 + data.size());
    for (int i = 0; i < 64; ++i) inner[i] = k[i] ^ 0x36;
    std::memcpy(inner.data() + 64, data.data(), data.size());
    const auto inner_hash = sha256(inner.data(), inner.size());

    std::vector<std::uint8_t> outer(64 + 32);
    for (int i = 0; i < 64; ++i) outer[i] = k[i] ^ 0x5c;
    std::memcpy(outer.data() + 64, inner_hash.data(), 32);
    return sha256(outer.data(), outer.size());
}

std::vector<std::uint8_t> hkdf_sha256(const std::vector<std::uint8_t>& salt,
                                      const std::vector<std::uint8_t>& ikm,
                                      const std::vector<std::uint8_t>& info,
                                      std::size_t out_len) {
    if (out_len == 0 || out_len > 255 * 32)
        throw ContractError("hkdf: output length out of range");
    // Extract.
    std::vector<std::uint8_t> salt_or_zero = salt.empty() ? std::vector<std::uint8_t>(32, 0) : salt;
    const auto prk_arr = hmac_sha256(salt_or_zero, ikm);
    const std::vector<std::uint8_t> prk(prk_arr.begin(), prk_arr.end());
    // Expand.
    std::vector<std::uint8_t> out;
    out.reserve(out_len);
    std::vector<std::uint8_t> t;
    std::uint8_t counter = 1;
    while (out.size() < out_len) {
        std::vector<std::uint8_t> block = t;
        block.insert(block.end(), info.begin(), info.end());
        block.push_back(counter++);
        const auto digest = hmac_sha256(prk, block);
        t.assign(digest.begin(), digest.end());
        for (std::uint8_t byte : t) {
            if (out.size() == out_len) break;
            out.push_back(byte);
        }
    }
    return out;
}

Secret Secret::from_string(std::string_view s) {
    return Secret{std::vector<std::uint8_t>(s.begin(), s.end())};
}

std::vector<std::uint8_t> kdf(const Secret& s, std::size_t out_len) {
    if (s.bytes.empty()) throw ContractError("kdf: secret must be non-empty");
    if (out_len == 0) throw ContractError("kdf: output length must be positive");
    const std::vector<std::uint8_t> salt(kKdfSalt.begin(), kKdfSalt.end());
    const std::vector<std::uint8_t> info(kKdfInfo.begin(), kKdfInfo.end());
    return hkdf_sha256(salt, s.bytes, info, out_len);
}

Tensor byte_norm(const std::vector<std::uint8_t>& bytes) {
    if (bytes.empty()) throw ContractError("byte_norm: empty input");
    Tensor out({bytes.size()});
    for (std::size_t i = 0; i < bytes.size(); ++i)
        out[i] = 2.0 * static_cast<double>(bytes[i]) / 255.0 - 1.0;
    quantize_inplace(out);
    return out;
}

KeyMapper KeyMapper::init(std::size_t d_k, Rng& rng) {
    MlpSpec spec{{d_k, d_k, d_k}, Activation::tanh, Activation::none};
    // Slightly hot init keeps the tanh units active so distinct inputs stay
    // decorrelated after mapping.
    return KeyMapper{MlpParams::init(spec, rng, /*trainable=*/false, MlpInit{1.5})};
}

Tensor KeyMapper::map(const Tensor& v) const {
    if (v.shape != Shape{d_k()})
        throw DimensionError("KeyMapper: input length " + shape_str(v.shape) +
                             " does not match d_k " + std::to_string(d_k()));
    Tensor row = v;
    row.shape = {1, v.size()};
    Tensor out = mlp_forward(mlp, constant(std::move(row))).value();
    out.shape = {out.size()};
    return out;
}

SecretVector keygen(const Secret& s, const KeyMapper& mapper) {
    return SecretVector{mapper.map(byte_norm(kdf(s, mapper.d_k())))};
}

}  // namespace ifadit
