#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hheml/he.hpp"
#include "hheml/pasta.hpp"

namespace hheml {

using EncryptedVector = std::vector<HeCiphertext>;

/// The client's stream-cipher key, word-by-word under the HE scheme, plus the
/// parameter pair it binds to. This is the only key material the server ever
/// holds; the state words are fresh (depth 0) at provisioning.
struct EncryptedPastaKey {
    PastaParams pasta;
    HeParams he;
    EncryptedVector words; // 2t ciphertexts
};

/// Toy linear classifier evaluated under encryption: weights are row-major
/// (classes x features), everything reduced mod p. Accuracy is a non-goal;
/// the point is exercising plain-mul / add / mul on real ciphertexts.
struct LinearModel {
    std::uint32_t classes = 0;
    std::uint32_t features = 0;
    std::vector<FieldElement> weights;
    std::vector<FieldElement> bias;

    void validate(std::uint64_t p) const; // throws DimensionMismatch / UnreducedWord
};

/// XOF personalization tag for model derivation (model id = stream nonce).
inline constexpr std::string_view kModelTag = "HHEML-MODEL";

/// Deterministic pseudo-random model: weights then biases sampled from
/// XofStream(kModelTag, {model_id, 0}). Stands in for trained weights.
LinearModel derive_linear_model(std::uint32_t classes, std::uint32_t features,
                                const PrimeModulus& p, std::uint64_t model_id);

// ---- client side -----------------------------------------------------------

/// Encrypts each of the 2t key words as a fresh HE ciphertext. Requires the
/// cipher's field and the HE plaintext space to agree.
EncryptedPastaKey encrypt_pasta_key(const PastaParams& pasta, const PastaSecretKey& key,
                                    const HePublicMaterial& pk, XofStream& rng);

// ---- server side -----------------------------------------------------------
// Nothing below accepts secret key material of either scheme, or plaintext
// message words: only public round material, public HE material, stream
// positions, and ciphertexts. (tests audit these declarations for exactly
// that property)

/// One affine layer on the encrypted 2t-state. The matrices and constants are
/// public, so every product is ciphertext-times-plain: depth is unchanged.
EncryptedVector he_affine(const AffineLayer& layer, const EncryptedVector& st,
                          bool mix_halves);

/// out_0 = st_0, out_i = st_i + st_{i-1}^2 across the flat vector; squares use
/// the original inputs. One ciphertext-ciphertext multiplication per word
/// beyond the first: depth +1.
EncryptedVector he_sbox_feistel(const EncryptedVector& st, const HePublicMaterial& pk);

/// Element-wise cube via square-then-multiply: depth +2.
EncryptedVector he_sbox_cube(const EncryptedVector& st, const HePublicMaterial& pk);

/// Homomorphic keystream block: runs the full permutation
/// A_r o S o A_{r-1} o S' o ... o A_1 o S' o A_0 on the encrypted key and
/// returns the first t words. Total multiplicative depth is (r-1) + 2.
EncryptedVector he_keystream(const EncryptedPastaKey& ek, const HePublicMaterial& pk,
                             StreamPosition pos);

/// Same, with caller-supplied round material (public per-position data that a
/// server may cache across blocks).
EncryptedVector he_keystream_with_material(const EncryptedPastaKey& ek,
                                           const HePublicMaterial& pk,
                                           const RoundMaterial& material);

/// Turns up to t stream-ciphertext words into HE ciphertexts of the message:
/// out_j = (-keystream_j) + c_j with the public word c_j folded in as a
/// plaintext constant.
EncryptedVector transcipher_block(const EncryptedPastaKey& ek, const HePublicMaterial& pk,
                                  StreamPosition pos,
                                  std::span<const FieldElement> c_block);

/// score_c = sum_j W[c,j] * f_j + bias_c, all products ciphertext-times-plain
/// (depth unchanged). With `square_activation` each score is then multiplied
/// by itself: one ciphertext-ciphertext product, depth +1.
EncryptedVector he_linear_model(const EncryptedVector& features, const LinearModel& model,
                                const HePublicMaterial& pk,
                                bool square_activation = false);

} // namespace hheml
