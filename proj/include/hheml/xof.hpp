#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "hheml/errors.hpp"

namespace hheml {

/// Public (nonce, block counter) pair addressing one keystream block.
/// A pair must never be reused for distinct plaintext blocks under one key.
struct StreamPosition {
    std::uint64_t nonce = 0;
    std::uint64_t counter = 0;

    bool operator==(const StreamPosition&) const = default;
};

/// Deterministic SHAKE128 byte stream with incremental squeezing.
///
/// The absorbed seed is exactly
///     domain_tag || 0x00 || nonce (8 bytes LE) || counter (8 bytes LE)
/// and contains only public data: the server re-derives identical streams
/// for transciphering without ever holding the symmetric key.
class XofStream {
public:
    /// Domain tag must be non-empty and at most 16 bytes.
    XofStream(std::string_view domain_tag, StreamPosition pos);

    void squeeze(std::span<std::uint8_t> out);

    std::vector<std::uint8_t> squeeze_bytes(std::size_t n) {
        std::vector<std::uint8_t> out(n);
        squeeze(out);
        return out;
    }

private:
    static constexpr std::size_t kRate = 168; // SHAKE128 rate in bytes

    std::array<std::uint64_t, 25> state_{};
    std::size_t block_offset_ = kRate; // forces a permute before first read

    void absorb_seed(std::span<const std::uint8_t> seed);
};

inline XofStream xof_init(std::string_view domain_tag, StreamPosition pos) {
    return XofStream(domain_tag, pos);
}

/// One-shot SHAKE128 over an arbitrary message (FIPS 202). XofStream is this
/// plus the fixed seed layout; the free function exists so callers and tests
/// can hash arbitrary byte strings.
std::vector<std::uint8_t> shake128(std::span<const std::uint8_t> input,
                                   std::size_t out_len);

/// Domain tag for Pasta round-material derivation.
inline constexpr std::string_view kRoundMaterialTag = "HHEML-PASTA-RM";

} // namespace hheml
