#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hheml/field.hpp"
#include "hheml/xof.hpp"

namespace hheml {

/// Cipher geometry: field, words per half-state, rounds. The cube layer
/// requires gcd(3, p-1) = 1 so x -> x^3 is a bijection.
struct PastaParams {
    PrimeModulus p;
    std::uint32_t t; // words per half-state
    std::uint32_t r; // rounds
    bool mix_halves; // cross-half mix after each affine layer

    PastaParams(PrimeModulus p_, std::uint32_t t_, std::uint32_t r_, bool mix = true);

    std::uint32_t state_words() const { return 2 * t; }

    static PastaParams pasta3_edge() { return {PrimeModulus(65537), 17, 3}; }
    static PastaParams pasta4_edge() { return {PrimeModulus(65537), 17, 4}; }

    bool operator==(const PastaParams& o) const {
        return p == o.p && t == o.t && r == o.r && mix_halves == o.mix_halves;
    }
};

/// 2t key words, all reduced mod p.
struct PastaSecretKey {
    std::vector<FieldElement> words;

    /// Samples 2t uniform words from the given stream.
    static PastaSecretKey sample(const PastaParams& params, XofStream& stream);
};

struct PastaState {
    std::vector<FieldElement> left;
    std::vector<FieldElement> right;

    std::vector<FieldElement> concat() const;
    static PastaState from_concat(std::span<const FieldElement> words);
};

/// One XOF-derived affine layer: per-half invertible matrices (row-major)
/// plus round-constant vectors.
struct AffineLayer {
    std::uint32_t dim = 0;
    std::vector<FieldElement> m_left;  // dim x dim
    std::vector<FieldElement> m_right; // dim x dim
    std::vector<FieldElement> c_left;  // dim
    std::vector<FieldElement> c_right; // dim
};

/// The r+1 affine layers for one (nonce, counter) position.
struct RoundMaterial {
    std::vector<AffineLayer> layers;
};

/// Additive stream ciphertext: keystream blocks are indexed i = 0, 1, ...
/// implicitly by word position.
struct SymCiphertext {
    std::uint64_t nonce = 0;
    std::vector<FieldElement> words;
};

/// Derives the affine layers for one position from the public XOF stream.
///
/// The stream is XofStream(kRoundMaterialTag, pos); per layer j = 0..r the
/// sampling order is: m_left row-major (t^2 elements), m_right row-major,
/// c_left (t), c_right (t). Each matrix is checked for invertibility by
/// Gaussian elimination right after it is sampled; a singular draw discards
/// the whole matrix and resamples t^2 fresh elements from the continuing
/// stream. Depends only on (params, nonce, counter) -- no key material.
RoundMaterial derive_round_material(const PastaParams& params, StreamPosition pos);

/// y_h = m_h * x_h + c_h per half; if mixing is enabled the halves are then
/// combined as (y_L + u, y_R + u) with u = y_L + y_R.
PastaState affine_apply(const AffineLayer& layer, const PastaState& s,
                        const PastaParams& params);

/// out_0 = x_0, out_i = x_i + x_{i-1}^2 over the flat word vector; squares
/// always take the original inputs, never chained outputs.
void sbox_feistel_inplace(std::vector<FieldElement>& words, const PrimeModulus& p);

/// Element-wise x -> x^3.
void sbox_cube_inplace(std::vector<FieldElement>& words, const PrimeModulus& p);

PastaState sbox_feistel(const PastaState& s, const PrimeModulus& p);
PastaState sbox_cube(const PastaState& s, const PrimeModulus& p);

/// Core permutation: A_r o S o A_{r-1} o S' o ... o A_1 o S' o A_0 applied
/// to the key loaded as (left, right) = (words[0..t), words[t..2t)).
PastaState pasta_permutation(const PastaSecretKey& key, StreamPosition pos,
                             const PastaParams& params);

/// Same permutation but with the round material supplied by the caller
/// (the per-position material is public and may be cached).
PastaState pasta_permutation_with_material(const PastaSecretKey& key,
                                           const RoundMaterial& material,
                                           const PastaParams& params);

/// First t words of the permutation output.
std::vector<FieldElement> keystream_block(const PastaSecretKey& key, StreamPosition pos,
                                          const PastaParams& params);

/// c_i = m_i + keystream block i; the last block may be short and uses the
/// keystream prefix. Message words must be reduced mod p.
SymCiphertext encrypt(const PastaSecretKey& key, std::uint64_t nonce,
                      std::span<const FieldElement> message, const PastaParams& params);

std::vector<FieldElement> decrypt(const PastaSecretKey& key, const SymCiphertext& ct,
                                  const PastaParams& params);

/// One cross-implementation test-vector line:
///   p t r nonce counter key... -> keystream...
/// (decimal, space-separated; keystream is block `counter` under `nonce`).
std::string format_test_vector(const PastaParams& params, StreamPosition pos,
                               const PastaSecretKey& key);

} // namespace hheml
