#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "hheml/errors.hpp"

namespace hheml {

/// A field element reduced into [0, p). Stored in 64 bits so that products of
/// 32-bit values never overflow before reduction.
using FieldElement = std::uint64_t;

/// Validated prime modulus for F_p with 3 < p < 2^32. Primality is checked at
/// construction with a deterministic Miller-Rabin (witnesses 2, 7, 61 cover
/// the full 32-bit range). Arithmetic helpers below take the raw value; this
/// class is the validation and sampling-geometry carrier.
class PrimeModulus {
public:
    explicit PrimeModulus(std::uint64_t p);

    std::uint64_t value() const { return p_; }

    /// Smallest k with 2^(k-1) < p <= 2^k. Used by rejection sampling.
    unsigned sample_bits() const { return bits_; }
    std::uint64_t sample_mask() const { return (std::uint64_t{1} << bits_) - 1; }

    bool operator==(const PrimeModulus& o) const { return p_ == o.p_; }

private:
    std::uint64_t p_;
    unsigned bits_;
};

/// Deterministic 32-bit primality test (Miller-Rabin, witnesses {2, 7, 61}).
bool is_prime_u32(std::uint64_t n);

// Modular arithmetic on reduced inputs; p < 2^32 keeps every intermediate
// below 2^64.

inline FieldElement fe_add(FieldElement a, FieldElement b, std::uint64_t p) {
    std::uint64_t s = a + b;
    if (s >= p) s -= p;
    return s;
}

inline FieldElement fe_sub(FieldElement a, FieldElement b, std::uint64_t p) {
    return a >= b ? a - b : a + p - b;
}

inline FieldElement fe_neg(FieldElement a, std::uint64_t p) {
    return a == 0 ? 0 : p - a;
}

inline FieldElement fe_mul(FieldElement a, FieldElement b, std::uint64_t p) {
    return (a * b) % p;
}

/// a^e mod p by square-and-multiply.
FieldElement fe_pow(FieldElement a, std::uint64_t e, std::uint64_t p);

/// Multiplicative inverse (p must be prime). Throws ZeroInverse for a = 0.
FieldElement fe_inv(FieldElement a, std::uint64_t p);

/// Uniform field element from a byte stream by masked rejection sampling:
/// draw 4 bytes little-endian, mask to sample_bits(), accept if below p,
/// otherwise redraw 4 fresh bytes. Rejection probability is below 1/2 per
/// draw; after 1,000 rejected draws the stream is considered broken and
/// SamplingStall is thrown.
template <typename Stream>
FieldElement sample_field_element(Stream& stream, const PrimeModulus& p) {
    for (int draws = 0; draws < 1000; ++draws) {
        std::uint8_t raw[4];
        stream.squeeze(std::span<std::uint8_t>(raw, 4));
        std::uint64_t u = std::uint64_t(raw[0]) | std::uint64_t(raw[1]) << 8 |
                          std::uint64_t(raw[2]) << 16 | std::uint64_t(raw[3]) << 24;
        u &= p.sample_mask();
        if (u < p.value()) return u;
    }
    throw SamplingStall("rejection sampling did not accept within 1000 draws");
}

/// M*x over F_p for a dim x dim row-major matrix.
std::vector<FieldElement> matrix_vector_mul(std::span<const FieldElement> matrix,
                                            std::span<const FieldElement> x,
                                            std::uint64_t p);

/// Nonsingularity over F_p by Gaussian elimination on a copy.
bool matrix_invertible(std::span<const FieldElement> matrix, std::size_t dim,
                       std::uint64_t p);

} // namespace hheml
