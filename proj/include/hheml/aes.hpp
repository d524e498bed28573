#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace hheml::aes {

/// 16 bytes; the cipher maps byte i to state cell (row i%4, column i/4),
/// FIPS 197 column-major order.
using Block128 = std::array<std::uint8_t, 16>;

/// Expanded AES-128 key: 11 round keys of 16 bytes. Round key r, byte 4c+j
/// is byte j (most significant first) of schedule word w[4r+c].
struct AesKeySchedule {
    static constexpr unsigned kRounds = 10;
    std::array<Block128, kRounds + 1> round_keys;
};

/// FIPS 197 key expansion. Only the 128-bit variant is supported; other key
/// lengths throw BadKeyLength.
AesKeySchedule key_expansion(std::span<const std::uint8_t> key);

/// Forward cipher: AddRoundKey, 9 full rounds, final round without MixColumns.
Block128 cipher(const Block128& in, const AesKeySchedule& ks);

/// Inverse cipher (InvShiftRows / InvSubBytes / AddRoundKey / InvMixColumns
/// ordering); exact inverse of cipher.
Block128 inv_cipher(const Block128& in, const AesKeySchedule& ks);

/// CTR keystream XOR: block j of the keystream is cipher(iv with its low 4
/// bytes replaced by big-endian (counter + j)). Self-inverse; used to wrap
/// key files at rest.
std::vector<std::uint8_t> ctr_wrap(std::span<const std::uint8_t> key, const Block128& iv,
                                   std::span<const std::uint8_t> data);

} // namespace hheml::aes
