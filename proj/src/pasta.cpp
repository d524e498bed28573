#include "hheml/pasta.hpp"

#include <numeric>
#include <sstream>

#include "hheml/errors.hpp"

namespace hheml {

PastaParams::PastaParams(PrimeModulus p_, std::uint32_t t_, std::uint32_t r_, bool mix)
    : p(p_), t(t_), r(r_), mix_halves(mix) {
    if (t < 1)
        throw BadParams("pasta: t must be >= 1");
    if (r < 1)
        throw BadParams("pasta: r must be >= 1");
    if (std::gcd(std::uint64_t{3}, p.value() - 1) != 1)
        throw BadParams("pasta: gcd(3, p-1) != 1, cube layer would not be a bijection");
}

PastaSecretKey PastaSecretKey::sample(const PastaParams& params, XofStream& stream) {
    PastaSecretKey key;
    key.words.reserve(params.state_words());
    for (std::uint32_t i = 0; i < params.state_words(); ++i)
        key.words.push_back(sample_field_element(stream, params.p));
    return key;
}

std::vector<FieldElement> PastaState::concat() const {
    std::vector<FieldElement> out;
    out.reserve(left.size() + right.size());
    out.insert(out.end(), left.begin(), left.end());
    out.insert(out.end(), right.begin(), right.end());
    return out;
}

PastaState PastaState::from_concat(std::span<const FieldElement> words) {
    if (words.size() % 2 != 0)
        throw DimensionMismatch("pasta state must have an even number of words");
    std::size_t t = words.size() / 2;
    PastaState s;
    s.left.assign(words.begin(), words.begin() + t);
    s.right.assign(words.begin() + t, words.end());
    return s;
}

namespace {

// Samples a dim x dim matrix, resampling in full until it is invertible.
// The singular-draw probability is ~1/p so this almost never loops, but the
// resample-the-whole-matrix rule is part of the stream format.
std::vector<FieldElement> sample_invertible_matrix(XofStream& stream, std::uint32_t dim,
                                                   const PrimeModulus& p) {
    std::vector<FieldElement> m(static_cast<std::size_t>(dim) * dim);
    for (;;) {
        for (auto& e : m)
            e = sample_field_element(stream, p);
        if (matrix_invertible(m, dim, p.value()))
            return m;
    }
}

std::vector<FieldElement> sample_vector(XofStream& stream, std::uint32_t dim,
                                        const PrimeModulus& p) {
    std::vector<FieldElement> v(dim);
    for (auto& e : v)
        e = sample_field_element(stream, p);
    return v;
}

} // namespace

RoundMaterial derive_round_material(const PastaParams& params, StreamPosition pos) {
    XofStream stream(kRoundMaterialTag, pos);
    RoundMaterial material;
    material.layers.resize(params.r + 1);
    for (auto& layer : material.layers) {
        layer.dim = params.t;
        layer.m_left = sample_invertible_matrix(stream, params.t, params.p);
        layer.m_right = sample_invertible_matrix(stream, params.t, params.p);
        layer.c_left = sample_vector(stream, params.t, params.p);
        layer.c_right = sample_vector(stream, params.t, params.p);
    }
    return material;
}

PastaState affine_apply(const AffineLayer& layer, const PastaState& s,
                        const PastaParams& params) {
    if (layer.dim != params.t || s.left.size() != params.t || s.right.size() != params.t)
        throw DimensionMismatch("affine layer / state dimension mismatch");
    const std::uint64_t p = params.p.value();

    PastaState out;
    out.left = matrix_vector_mul(layer.m_left, s.left, p);
    out.right = matrix_vector_mul(layer.m_right, s.right, p);
    for (std::uint32_t i = 0; i < params.t; ++i) {
        out.left[i] = fe_add(out.left[i], layer.c_left[i], p);
        out.right[i] = fe_add(out.right[i], layer.c_right[i], p);
    }
    if (params.mix_halves) {
        // (y_L, y_R) -> (2 y_L + y_R, y_L + 2 y_R), i.e. add u = y_L + y_R
        // to each half.
        for (std::uint32_t i = 0; i < params.t; ++i) {
            FieldElement u = fe_add(out.left[i], out.right[i], p);
            out.left[i] = fe_add(out.left[i], u, p);
            out.right[i] = fe_add(out.right[i], u, p);
        }
    }
    return out;
}

void sbox_feistel_inplace(std::vector<FieldElement>& words, const PrimeModulus& p) {
    const std::uint64_t pv = p.value();
    // Walk backwards so each square sees the original input, not the output
    // of the previous position.
    for (std::size_t i = words.size(); i-- > 1;) {
        FieldElement sq = fe_mul(words[i - 1], words[i - 1], pv);
        words[i] = fe_add(words[i], sq, pv);
    }
}

void sbox_cube_inplace(std::vector<FieldElement>& words, const PrimeModulus& p) {
    const std::uint64_t pv = p.value();
    for (auto& w : words) {
        FieldElement sq = fe_mul(w, w, pv);
        w = fe_mul(sq, w, pv);
    }
}

// Both S-boxes act on the state as one flat 2t-vector, so the Feistel square
// at position t reaches across the half boundary.
PastaState sbox_feistel(const PastaState& s, const PrimeModulus& p) {
    std::vector<FieldElement> words = s.concat();
    sbox_feistel_inplace(words, p);
    return PastaState::from_concat(words);
}

PastaState sbox_cube(const PastaState& s, const PrimeModulus& p) {
    std::vector<FieldElement> words = s.concat();
    sbox_cube_inplace(words, p);
    return PastaState::from_concat(words);
}

PastaState pasta_permutation_with_material(const PastaSecretKey& key,
                                           const RoundMaterial& material,
                                           const PastaParams& params) {
    if (key.words.size() != params.state_words())
        throw BadKeyLength("pasta key must have 2t words");
    if (material.layers.size() != params.r + 1)
        throw DimensionMismatch("round material has wrong number of layers");
    for (FieldElement w : key.words)
        if (w >= params.p.value())
            throw UnreducedWord("pasta key word out of range");

    PastaState s = PastaState::from_concat(key.words);
    s = affine_apply(material.layers[0], s, params);
    for (std::uint32_t round = 1; round <= params.r; ++round) {
        if (round < params.r)
            s = sbox_feistel(s, params.p);
        else
            s = sbox_cube(s, params.p);
        s = affine_apply(material.layers[round], s, params);
    }
    return s;
}

PastaState pasta_permutation(const PastaSecretKey& key, StreamPosition pos,
                             const PastaParams& params) {
    RoundMaterial material = derive_round_material(params, pos);
    return pasta_permutation_with_material(key, material, params);
}

std::vector<FieldElement> keystream_block(const PastaSecretKey& key, StreamPosition pos,
                                          const PastaParams& params) {
    return pasta_permutation(key, pos, params).left;
}

SymCiphertext encrypt(const PastaSecretKey& key, std::uint64_t nonce,
                      std::span<const FieldElement> message, const PastaParams& params) {
    const std::uint64_t p = params.p.value();
    for (FieldElement w : message)
        if (w >= p)
            throw UnreducedWord("message word out of range");

    SymCiphertext ct;
    ct.nonce = nonce;
    ct.words.reserve(message.size());
    std::vector<FieldElement> ks;
    for (std::size_t i = 0; i < message.size(); ++i) {
        std::size_t block = i / params.t;
        std::size_t off = i % params.t;
        if (off == 0)
            ks = keystream_block(key, {nonce, block}, params);
        ct.words.push_back(fe_add(message[i], ks[off], p));
    }
    return ct;
}

std::vector<FieldElement> decrypt(const PastaSecretKey& key, const SymCiphertext& ct,
                                  const PastaParams& params) {
    const std::uint64_t p = params.p.value();
    for (FieldElement w : ct.words)
        if (w >= p)
            throw UnreducedWord("ciphertext word out of range");

    std::vector<FieldElement> msg;
    msg.reserve(ct.words.size());
    std::vector<FieldElement> ks;
    for (std::size_t i = 0; i < ct.words.size(); ++i) {
        std::size_t block = i / params.t;
        std::size_t off = i % params.t;
        if (off == 0)
            ks = keystream_block(key, {ct.nonce, block}, params);
        msg.push_back(fe_sub(ct.words[i], ks[off], p));
    }
    return msg;
}

std::string format_test_vector(const PastaParams& params, StreamPosition pos,
                               const PastaSecretKey& key) {
    std::ostringstream os;
    os << params.p.value() << ' ' << params.t << ' ' << params.r << ' ' << pos.nonce << ' '
       << pos.counter;
    for (FieldElement w : key.words)
        os << ' ' << w;
    os << " ->";
    for (FieldElement w : keystream_block(key, pos, params))
        os << ' ' << w;
    return os.str();
}

} // namespace hheml
