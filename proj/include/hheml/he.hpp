#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <span>
#include <vector>

#include "hheml/field.hpp"
#include "hheml/xof.hpp"

namespace hheml {

/// Two interchangeable backends behind one contract:
///  - Transparent carries the plaintext scalar and mirrors the depth/budget
///    bookkeeping. It is the functional oracle for differential tests.
///  - BfvToy is a real (insecure, desk-scale) leveled BFV: scalar encoding in
///    the constant coefficient, schoolbook negacyclic arithmetic, base-w
///    relinearization.
enum class HeBackend : std::uint8_t { Transparent = 0, BfvToy = 1 };

const char* to_string(HeBackend b);

struct HeParams {
    HeBackend backend = HeBackend::BfvToy;
    std::uint64_t plaintext_modulus = 65537;
    std::uint32_t ring_degree = 1024; // n, power of two
    std::uint32_t log2_q = 300;       // ciphertext modulus q = 2^log2_q
    std::uint32_t decomp_log2w = 20;  // relinearization base w = 2^decomp_log2w
    double error_stddev = 3.2;

    /// Depth-accounting oracle over F_p.
    static HeParams transparent(std::uint64_t p);

    /// Desk-scale BFV defaults. q = 2^300 is sized (empirically, with margin)
    /// for the depth-5 keystream circuit at p = 65537 followed by a linear
    /// model pass with square activation (depth 6, ~266 bits of noise); see
    /// the README for the measured ladder. The parameters are
    /// correctness-only and cryptographically insecure.
    static HeParams bfv_toy(std::uint64_t p);

    void validate() const; // throws BadParams

    mpz_class modulus_q() const;        // 2^log2_q
    mpz_class delta() const;            // floor(q / plaintext_modulus)
    std::uint32_t relin_digits() const; // ceil(log2_q / decomp_log2w)
    std::uint32_t error_bound() const;  // floor(6 * error_stddev)
    std::size_t coeff_bytes() const { return (log2_q + 7) / 8; }

    bool operator==(const HeParams&) const = default;
};

using Poly = std::vector<mpz_class>; // n coefficients in [0, q)

/// Ternary secret, one entry in {-1, 0, +1} per coefficient. Empty for the
/// transparent backend.
struct HeSecretKey {
    HeParams params;
    std::vector<std::int8_t> s;
};

/// One relinearization digit: (b_i, a_i) with b_i = -(a_i s + e_i) + w^i s^2.
struct RelinDigitKey {
    Poly b, a;
};

/// Everything the evaluating party holds: encryption pair (b, a) with
/// b = -(a s + e), plus the relinearization key. No secret material.
struct HePublicMaterial {
    HeParams params;
    Poly pk_b, pk_a;
    std::vector<RelinDigitKey> relin;
};

struct HeKeyPair {
    HeSecretKey sk;
    HePublicMaterial pk;
};

/// Degree-1 ciphertext (c0, c1) plus tracked multiplicative depth. The
/// transparent backend stores the scalar in `value` and leaves the
/// polynomials empty.
struct HeCiphertext {
    HeParams params;
    std::uint32_t depth = 0;
    Poly c0, c1;
    FieldElement value = 0;
};

struct NoiseReport {
    std::uint32_t depth = 0;
    double noise_budget_bits = 0; // +infinity on the transparent backend
};

/// Deterministic under seed (all randomness from one XOF stream).
HeKeyPair he_keygen(const HeParams& params, std::uint64_t seed);

/// Encrypts a reduced scalar; the caller owns the randomness stream so runs
/// are reproducible.
HeCiphertext he_encrypt(const HePublicMaterial& pk, FieldElement m, XofStream& rng);

/// Decrypts the constant coefficient. Throws NoiseOverflow when the residual
/// noise reaches q/(2p) -- a best-effort detector: noise that wraps entirely
/// is indistinguishable from a valid ciphertext.
FieldElement he_decrypt(const HeSecretKey& sk, const HeCiphertext& ct);

// Homomorphic ops. Binary ops throw ParamsMismatch unless both sides carry
// identical params. Depth: mul is max+1, everything else max.
HeCiphertext he_add(const HeCiphertext& a, const HeCiphertext& b);
HeCiphertext he_sub(const HeCiphertext& a, const HeCiphertext& b);
HeCiphertext he_neg(const HeCiphertext& a);
HeCiphertext he_add_plain(const HeCiphertext& a, FieldElement k);
HeCiphertext he_mul_plain(const HeCiphertext& a, FieldElement k);

/// Tensor product, rescale by p/q, then relinearize back to degree 1 with
/// pk's base-w key.
HeCiphertext he_mul(const HeCiphertext& a, const HeCiphertext& b,
                    const HePublicMaterial& pk);

/// Exact noise via c0 + c1 s - delta*m (test/diagnostic API; needs sk).
NoiseReport he_noise_budget(const HeSecretKey& sk, const HeCiphertext& ct);

/// The ring primitive underneath everything: schoolbook product in
/// Z_q[X]/(X^n + 1) with q = 2^log2_q, inputs reduced. Exposed so the ring
/// arithmetic can be verified directly against convolution oracles.
Poly negacyclic_mul_mod(const Poly& a, const Poly& b, std::uint32_t log2_q);

// Serialization: length-prefixed little-endian coefficient arrays, fixed
// coeff_bytes() per coefficient. Parsing validates against the expected
// params and throws TruncatedFrame / BadHeader.
std::vector<std::uint8_t> serialize_ciphertext(const HeCiphertext& ct);
HeCiphertext parse_ciphertext(const HeParams& params, std::span<const std::uint8_t> data);

std::vector<std::uint8_t> serialize_public_material(const HePublicMaterial& pk);
HePublicMaterial parse_public_material(const HeParams& params,
                                       std::span<const std::uint8_t> data);

std::vector<std::uint8_t> serialize_secret_key(const HeSecretKey& sk);
HeSecretKey parse_secret_key(const HeParams& params, std::span<const std::uint8_t> data);

} // namespace hheml
