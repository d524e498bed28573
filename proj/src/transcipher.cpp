#include "hheml/transcipher.hpp"

#include <string>

#include "hheml/errors.hpp"

namespace hheml {

namespace {

void require_state_size(const EncryptedVector& st, std::size_t want, const char* what) {
    if (st.size() != want)
        throw DimensionMismatch(std::string(what) + ": expected " + std::to_string(want) +
                                " state words, got " + std::to_string(st.size()));
}

} // namespace

void LinearModel::validate(std::uint64_t p) const {
    if (classes == 0 || features == 0)
        throw DimensionMismatch("model must have at least one class and one feature");
    if (weights.size() != std::size_t(classes) * features)
        throw DimensionMismatch("weight matrix is not classes x features");
    if (bias.size() != classes) throw DimensionMismatch("bias length is not classes");
    for (FieldElement w : weights)
        if (w >= p) throw UnreducedWord("model weight out of range");
    for (FieldElement b : bias)
        if (b >= p) throw UnreducedWord("model bias out of range");
}

LinearModel derive_linear_model(std::uint32_t classes, std::uint32_t features,
                                const PrimeModulus& p, std::uint64_t model_id) {
    LinearModel model;
    model.classes = classes;
    model.features = features;
    XofStream stream(kModelTag, {model_id, 0});
    model.weights.reserve(std::size_t(classes) * features);
    for (std::size_t i = 0; i < std::size_t(classes) * features; ++i)
        model.weights.push_back(sample_field_element(stream, p));
    model.bias.reserve(classes);
    for (std::uint32_t c = 0; c < classes; ++c)
        model.bias.push_back(sample_field_element(stream, p));
    model.validate(p.value());
    return model;
}

EncryptedPastaKey encrypt_pasta_key(const PastaParams& pasta, const PastaSecretKey& key,
                                    const HePublicMaterial& pk, XofStream& rng) {
    if (pasta.p.value() != pk.params.plaintext_modulus)
        throw ParamsMismatch("cipher field and HE plaintext space disagree");
    if (key.words.size() != pasta.state_words())
        throw BadKeyLength("key must hold 2t words");
    EncryptedPastaKey ek{pasta, pk.params, {}};
    ek.words.reserve(key.words.size());
    for (FieldElement w : key.words) ek.words.push_back(he_encrypt(pk, w, rng));
    return ek;
}

EncryptedVector he_affine(const AffineLayer& layer, const EncryptedVector& st,
                          bool mix_halves) {
    const std::size_t t = layer.dim;
    require_state_size(st, 2 * t, "affine layer");
    if (layer.m_left.size() != t * t || layer.m_right.size() != t * t ||
        layer.c_left.size() != t || layer.c_right.size() != t)
        throw DimensionMismatch("affine layer material does not match its dim");

    // y_h = M_h * x_h + c_h, one half at a time; row products are all
    // ciphertext-times-plain.
    EncryptedVector out;
    out.reserve(2 * t);
    for (std::size_t half = 0; half < 2; ++half) {
        const auto& m = half == 0 ? layer.m_left : layer.m_right;
        const auto& c = half == 0 ? layer.c_left : layer.c_right;
        const std::size_t base = half * t;
        for (std::size_t row = 0; row < t; ++row) {
            HeCiphertext acc = he_mul_plain(st[base], m[row * t]);
            for (std::size_t k = 1; k < t; ++k)
                acc = he_add(acc, he_mul_plain(st[base + k], m[row * t + k]));
            out.push_back(he_add_plain(acc, c[row]));
        }
    }

    if (mix_halves) {
        for (std::size_t i = 0; i < t; ++i) {
            HeCiphertext u = he_add(out[i], out[t + i]);
            out[i] = he_add(out[i], u);
            out[t + i] = he_add(out[t + i], u);
        }
    }
    return out;
}

EncryptedVector he_sbox_feistel(const EncryptedVector& st, const HePublicMaterial& pk) {
    EncryptedVector out;
    out.reserve(st.size());
    out.push_back(st[0]);
    for (std::size_t i = 1; i < st.size(); ++i)
        out.push_back(he_add(st[i], he_mul(st[i - 1], st[i - 1], pk)));
    return out;
}

EncryptedVector he_sbox_cube(const EncryptedVector& st, const HePublicMaterial& pk) {
    EncryptedVector out;
    out.reserve(st.size());
    for (const auto& x : st) out.push_back(he_mul(he_mul(x, x, pk), x, pk));
    return out;
}

EncryptedVector he_keystream_with_material(const EncryptedPastaKey& ek,
                                           const HePublicMaterial& pk,
                                           const RoundMaterial& material) {
    const std::uint32_t r = ek.pasta.r;
    const bool mix = ek.pasta.mix_halves;
    if (material.layers.size() != r + 1)
        throw DimensionMismatch("round material does not cover r+1 affine layers");
    EncryptedVector st = ek.words;
    require_state_size(st, ek.pasta.state_words(), "encrypted key");

    st = he_affine(material.layers[0], st, mix);
    for (std::uint32_t j = 1; j < r; ++j)
        st = he_affine(material.layers[j], he_sbox_feistel(st, pk), mix);
    st = he_affine(material.layers[r], he_sbox_cube(st, pk), mix);

    st.resize(ek.pasta.t);
    return st;
}

EncryptedVector he_keystream(const EncryptedPastaKey& ek, const HePublicMaterial& pk,
                             StreamPosition pos) {
    return he_keystream_with_material(ek, pk, derive_round_material(ek.pasta, pos));
}

EncryptedVector transcipher_block(const EncryptedPastaKey& ek, const HePublicMaterial& pk,
                                  StreamPosition pos,
                                  std::span<const FieldElement> c_block) {
    if (c_block.size() > ek.pasta.t)
        throw DimensionMismatch("stream block longer than t words");
    const std::uint64_t p = ek.pasta.p.value();
    for (FieldElement c : c_block)
        if (c >= p) throw UnreducedWord("stream ciphertext word out of range");

    EncryptedVector ks = he_keystream(ek, pk, pos);
    EncryptedVector out;
    out.reserve(c_block.size());
    for (std::size_t j = 0; j < c_block.size(); ++j)
        out.push_back(he_add_plain(he_neg(ks[j]), c_block[j]));
    return out;
}

EncryptedVector he_linear_model(const EncryptedVector& features, const LinearModel& model,
                                const HePublicMaterial& pk, bool square_activation) {
    model.validate(pk.params.plaintext_modulus);
    if (features.size() != model.features)
        throw DimensionMismatch("feature count does not match the model");

    EncryptedVector scores;
    scores.reserve(model.classes);
    for (std::uint32_t c = 0; c < model.classes; ++c) {
        const FieldElement* row = &model.weights[std::size_t(c) * model.features];
        HeCiphertext acc = he_mul_plain(features[0], row[0]);
        for (std::size_t j = 1; j < model.features; ++j)
            acc = he_add(acc, he_mul_plain(features[j], row[j]));
        acc = he_add_plain(acc, model.bias[c]);
        if (square_activation) acc = he_mul(acc, acc, pk);
        scores.push_back(std::move(acc));
    }
    return scores;
}

} // namespace hheml
