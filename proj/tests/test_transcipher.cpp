#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "hheml/errors.hpp"
#include "hheml/he.hpp"
#include "hheml/pasta.hpp"
#include "hheml/transcipher.hpp"
#include "hheml/xof.hpp"

using namespace hheml;

namespace {

// The differential workhorse: a small ring keeps ct-ct muls cheap while the
// modulus still covers depth 4-5 circuits.
HeParams small_bfv(std::uint64_t p) {
    HeParams params = HeParams::bfv_toy(p);
    params.ring_degree = 64;
    params.log2_q = 220;
    params.validate();
    return params;
}

struct TestCtx {
    HeKeyPair keys;
    XofStream enc_rng;

    TestCtx(const HeParams& params, std::uint64_t seed)
        : keys(he_keygen(params, seed)), enc_rng("test-tc-enc", {seed, 0}) {}

    EncryptedVector encrypt_words(std::span<const FieldElement> words) {
        EncryptedVector out;
        for (FieldElement w : words) out.push_back(he_encrypt(keys.pk, w, enc_rng));
        return out;
    }

    std::vector<FieldElement> decrypt_words(const EncryptedVector& cts) {
        std::vector<FieldElement> out;
        for (const auto& ct : cts) out.push_back(he_decrypt(keys.sk, ct));
        return out;
    }
};

std::uint32_t max_depth(const EncryptedVector& v) {
    std::uint32_t d = 0;
    for (const auto& ct : v) d = std::max(d, ct.depth);
    return d;
}

AffineLayer identity_layer(std::uint32_t t) {
    AffineLayer layer;
    layer.dim = t;
    layer.m_left.assign(std::size_t(t) * t, 0);
    layer.m_right.assign(std::size_t(t) * t, 0);
    for (std::uint32_t i = 0; i < t; ++i) {
        layer.m_left[std::size_t(i) * t + i] = 1;
        layer.m_right[std::size_t(i) * t + i] = 1;
    }
    layer.c_left.assign(t, 0);
    layer.c_right.assign(t, 0);
    return layer;
}

std::vector<FieldElement> random_words(std::mt19937_64& gen, std::size_t n,
                                       std::uint64_t p) {
    std::vector<FieldElement> out(n);
    for (auto& w : out) w = gen() % p;
    return out;
}

} // namespace

TEST_CASE("identity affine layer with mixing off returns the input") {
    const PastaParams pasta(PrimeModulus(257), 2, 3);
    TestCtx ctx(small_bfv(257), 1);
    std::mt19937_64 gen(31);

    const auto words = random_words(gen, 4, 257);
    auto st = ctx.encrypt_words(words);
    auto out = he_affine(identity_layer(2), st, /*mix_halves=*/false);
    CHECK(ctx.decrypt_words(out) == words);
    CHECK(max_depth(out) == 0); // plain ops only
}

TEST_CASE("affine layer matches the plaintext evaluation on derived material") {
    const PastaParams pasta(PrimeModulus(257), 2, 3);
    TestCtx ctx(small_bfv(257), 2);
    std::mt19937_64 gen(32);

    // 5 positions x 4 layers = 20 distinct XOF-derived layers.
    for (std::uint64_t nonce = 0; nonce < 5; ++nonce) {
        const auto material = derive_round_material(pasta, {nonce, nonce});
        for (const auto& layer : material.layers) {
            const auto words = random_words(gen, 4, 257);
            const auto expect =
                affine_apply(layer, PastaState::from_concat(words), pasta).concat();

            auto out = he_affine(layer, ctx.encrypt_words(words), pasta.mix_halves);
            CHECK(ctx.decrypt_words(out) == expect);
            CHECK(max_depth(out) == 0);
        }
    }
}

TEST_CASE("affine layer rejects mismatched state") {
    const PastaParams pasta(PrimeModulus(257), 2, 3);
    TestCtx ctx(small_bfv(257), 3);
    auto st = ctx.encrypt_words(std::vector<FieldElement>{1, 2, 3}); // 3 != 2t
    CHECK_THROWS_AS(he_affine(identity_layer(2), st, true), DimensionMismatch);
}

TEST_CASE("encrypted Feistel S-box") {
    const PrimeModulus p(257);
    TestCtx ctx(small_bfv(257), 4);
    std::mt19937_64 gen(33);

    auto zeros = ctx.encrypt_words(std::vector<FieldElement>(4, 0));
    CHECK(ctx.decrypt_words(he_sbox_feistel(zeros, ctx.keys.pk)) ==
          std::vector<FieldElement>(4, 0));

    for (int rep = 0; rep < 10; ++rep) {
        auto words = random_words(gen, 4, 257);
        std::vector<FieldElement> expect = words;
        sbox_feistel_inplace(expect, p);

        auto out = he_sbox_feistel(ctx.encrypt_words(words), ctx.keys.pk);
        CHECK(ctx.decrypt_words(out) == expect);
        CHECK(max_depth(out) == 1);   // one multiplication layer
        CHECK(out[0].depth == 0);     // word 0 passes through untouched
    }
}

TEST_CASE("encrypted cube S-box") {
    const PrimeModulus p(257);
    TestCtx ctx(small_bfv(257), 5);
    std::mt19937_64 gen(34);

    auto zeros = ctx.encrypt_words(std::vector<FieldElement>(4, 0));
    CHECK(ctx.decrypt_words(he_sbox_cube(zeros, ctx.keys.pk)) ==
          std::vector<FieldElement>(4, 0));
    auto ones = ctx.encrypt_words(std::vector<FieldElement>(4, 1));
    CHECK(ctx.decrypt_words(he_sbox_cube(ones, ctx.keys.pk)) ==
          std::vector<FieldElement>(4, 1));

    for (int rep = 0; rep < 10; ++rep) {
        auto words = random_words(gen, 4, 257);
        std::vector<FieldElement> expect = words;
        sbox_cube_inplace(expect, p);

        auto out = he_sbox_cube(ctx.encrypt_words(words), ctx.keys.pk);
        CHECK(ctx.decrypt_words(out) == expect);
        CHECK(max_depth(out) == 2); // square then multiply
    }
}

TEST_CASE("key provisioning binds parameters and yields fresh ciphertexts") {
    const PastaParams pasta(PrimeModulus(257), 2, 3);
    TestCtx ctx(small_bfv(257), 6);
    XofStream key_rng("test-tc-key", {0, 0});
    const auto key = PastaSecretKey::sample(pasta, key_rng);

    auto ek = encrypt_pasta_key(pasta, key, ctx.keys.pk, ctx.enc_rng);
    CHECK(ek.words.size() == 4);
    for (const auto& ct : ek.words) CHECK(ct.depth == 0);
    CHECK(ctx.decrypt_words(ek.words) == key.words);

    // field/plaintext-space mismatch
    TestCtx other(small_bfv(65537), 7);
    CHECK_THROWS_AS(encrypt_pasta_key(pasta, key, other.keys.pk, other.enc_rng),
                    ParamsMismatch);
    PastaSecretKey bad;
    bad.words = {1, 2, 3};
    CHECK_THROWS_AS(encrypt_pasta_key(pasta, bad, ctx.keys.pk, ctx.enc_rng),
                    BadKeyLength);
}

TEST_CASE("homomorphic keystream depth: (r-1) + 2 on the transparent counter") {
    // Transparent ops are O(1), so this runs the real edge profiles.
    for (auto [pasta, want] :
         {std::pair{PastaParams::pasta3_edge(), 4u}, {PastaParams::pasta4_edge(), 5u}}) {
        TestCtx ctx(HeParams::transparent(65537), 8);
        XofStream key_rng("test-tc-key", {1, pasta.r});
        const auto key = PastaSecretKey::sample(pasta, key_rng);
        auto ek = encrypt_pasta_key(pasta, key, ctx.keys.pk, ctx.enc_rng);

        auto ks = he_keystream(ek, ctx.keys.pk, {9, 4});
        CHECK(ks.size() == pasta.t);
        for (const auto& ct : ks) CHECK(ct.depth == want);
        CHECK(ctx.decrypt_words(ks) == keystream_block(key, {9, 4}, pasta));
    }
}

TEST_CASE("homomorphic keystream equals the plaintext keystream under BFV") {
    const PastaParams pasta(PrimeModulus(257), 2, 3);
    TestCtx ctx(small_bfv(257), 9);

    for (std::uint64_t trial = 0; trial < 10; ++trial) {
        XofStream key_rng("test-tc-key", {2, trial});
        const auto key = PastaSecretKey::sample(pasta, key_rng);
        auto ek = encrypt_pasta_key(pasta, key, ctx.keys.pk, ctx.enc_rng);

        const StreamPosition pos{trial, trial % 3};
        auto ks = he_keystream(ek, ctx.keys.pk, pos);
        CHECK(ctx.decrypt_words(ks) == keystream_block(key, pos, pasta));
        CHECK(max_depth(ks) == 4);
        for (const auto& ct : ks)
            CHECK(he_noise_budget(ctx.keys.sk, ct).noise_budget_bits > 0.0);
    }
}

TEST_CASE("transciphering inverts the stream cipher") {
    const PastaParams pasta(PrimeModulus(257), 2, 3);
    std::mt19937_64 gen(35);

    auto run = [&](const HeParams& he_params, std::uint64_t seed, int trials) {
        TestCtx ctx(he_params, seed);
        for (int trial = 0; trial < trials; ++trial) {
            XofStream key_rng("test-tc-key", {3, std::uint64_t(trial) + 10 * seed});
            const auto key = PastaSecretKey::sample(pasta, key_rng);
            auto ek = encrypt_pasta_key(pasta, key, ctx.keys.pk, ctx.enc_rng);

            const std::uint64_t nonce = gen();
            const std::size_t len = 1 + gen() % pasta.t; // short blocks included
            const auto msg = random_words(gen, len, 257);
            const auto sym = encrypt(key, nonce, msg, pasta);

            auto cts = transcipher_block(ek, ctx.keys.pk, {nonce, 0}, sym.words);
            CHECK(ctx.decrypt_words(cts) == msg);
        }
    };
    run(HeParams::transparent(257), 10, 10);
    run(small_bfv(257), 11, 2);

    // zero message is not a special case
    TestCtx ctx(small_bfv(257), 12);
    XofStream key_rng("test-tc-key", {4, 0});
    const auto key = PastaSecretKey::sample(pasta, key_rng);
    auto ek = encrypt_pasta_key(pasta, key, ctx.keys.pk, ctx.enc_rng);
    const std::vector<FieldElement> zeros(2, 0);
    const auto sym = encrypt(key, 77, zeros, pasta);
    CHECK(ctx.decrypt_words(transcipher_block(ek, ctx.keys.pk, {77, 0}, sym.words)) ==
          zeros);

    // block longer than t
    const auto long_block = random_words(gen, pasta.t + 1, 257);
    CHECK_THROWS_AS(transcipher_block(ek, ctx.keys.pk, {0, 0}, long_block),
                    DimensionMismatch);
}

TEST_CASE("a full MNIST-shaped upload transciphers block by block") {
    const PastaParams pasta = PastaParams::pasta4_edge();
    TestCtx ctx(HeParams::transparent(65537), 13);
    XofStream key_rng("test-tc-key", {5, 0});
    const auto key = PastaSecretKey::sample(pasta, key_rng);
    auto ek = encrypt_pasta_key(pasta, key, ctx.keys.pk, ctx.enc_rng);

    std::mt19937_64 gen(36);
    const auto msg = random_words(gen, 784, 65537);
    const std::uint64_t nonce = 20260814;
    const auto sym = encrypt(key, nonce, msg, pasta);

    std::vector<FieldElement> recovered;
    for (std::size_t block = 0; block * pasta.t < msg.size(); ++block) {
        const std::size_t lo = block * pasta.t;
        const std::size_t hi = std::min(lo + pasta.t, msg.size());
        auto cts = transcipher_block(
            ek, ctx.keys.pk, {nonce, block},
            std::span<const FieldElement>(sym.words).subspan(lo, hi - lo));
        for (const auto& ct : cts) recovered.push_back(he_decrypt(ctx.keys.sk, ct));
    }
    CHECK(recovered.size() == 784);          // 47 blocks, last one short (784 = 46*17 + 2)
    CHECK(recovered == msg);
}

TEST_CASE("encrypted linear model") {
    const std::uint64_t p = 257;
    TestCtx ctx(small_bfv(p), 14);
    std::mt19937_64 gen(37);

    const auto feats = random_words(gen, 8, p);
    auto enc_feats = ctx.encrypt_words(feats);

    LinearModel model;
    model.classes = 3;
    model.features = 8;
    model.bias = {5, 6, 7};

    SUBCASE("zero weights return the bias") {
        model.weights.assign(24, 0);
        auto scores = he_linear_model(enc_feats, model, ctx.keys.pk);
        CHECK(ctx.decrypt_words(scores) == model.bias);
        CHECK(max_depth(scores) == 0);
    }

    SUBCASE("identity rows select features") {
        model.weights.assign(24, 0);
        model.bias = {0, 0, 0};
        model.weights[0 * 8 + 2] = 1;
        model.weights[1 * 8 + 5] = 1;
        model.weights[2 * 8 + 7] = 1;
        auto scores = he_linear_model(enc_feats, model, ctx.keys.pk);
        CHECK(ctx.decrypt_words(scores) ==
              std::vector<FieldElement>{feats[2], feats[5], feats[7]});
    }

    SUBCASE("random weights match the plaintext dot product") {
        model.weights = random_words(gen, 24, p);
        model.bias = random_words(gen, 3, p);

        std::vector<FieldElement> expect;
        for (std::uint32_t c = 0; c < 3; ++c) {
            FieldElement s = model.bias[c];
            for (std::size_t j = 0; j < 8; ++j)
                s = fe_add(s, fe_mul(model.weights[c * 8 + j], feats[j], p), p);
            expect.push_back(s);
        }

        auto scores = he_linear_model(enc_feats, model, ctx.keys.pk);
        CHECK(ctx.decrypt_words(scores) == expect);

        // square activation: one ct-ct mul per score
        auto squared = he_linear_model(enc_feats, model, ctx.keys.pk, true);
        for (auto& s : expect) s = fe_mul(s, s, p);
        CHECK(ctx.decrypt_words(squared) == expect);
        CHECK(max_depth(squared) == 1);
    }

    SUBCASE("dimension checks") {
        model.weights = random_words(gen, 24, p);
        auto short_feats = ctx.encrypt_words(random_words(gen, 7, p));
        CHECK_THROWS_AS(he_linear_model(short_feats, model, ctx.keys.pk),
                        DimensionMismatch);
        model.bias = {1, 2};
        CHECK_THROWS_AS(he_linear_model(enc_feats, model, ctx.keys.pk),
                        DimensionMismatch);
    }
}

TEST_CASE("derived models are deterministic per id and reduced") {
    const PrimeModulus p(65537);
    auto m1 = derive_linear_model(10, 784, p, 1);
    auto m2 = derive_linear_model(10, 784, p, 1);
    auto m3 = derive_linear_model(10, 784, p, 2);
    CHECK(m1.weights == m2.weights);
    CHECK(m1.bias == m2.bias);
    CHECK(m1.weights != m3.weights);
    CHECK(m1.weights.size() == 7840);
    for (FieldElement w : m1.weights) CHECK(w < 65537);
}

TEST_CASE("full-size pipeline: depth 6 still decrypts at default parameters") {
    // pasta4-edge keystream (depth 5) + square activation (depth 6) at the
    // shipped bfv defaults; this is the circuit the modulus is sized for.
    const PastaParams pasta = PastaParams::pasta4_edge();
    TestCtx ctx(HeParams::bfv_toy(65537), 15);
    XofStream key_rng("test-tc-key", {6, 0});
    const auto key = PastaSecretKey::sample(pasta, key_rng);
    auto ek = encrypt_pasta_key(pasta, key, ctx.keys.pk, ctx.enc_rng);

    std::mt19937_64 gen(38);
    const auto msg = random_words(gen, pasta.t, 65537);
    const auto sym = encrypt(key, 5, msg, pasta);
    auto cts = transcipher_block(ek, ctx.keys.pk, {5, 0}, sym.words);
    CHECK(max_depth(cts) == 5);
    CHECK(ctx.decrypt_words(cts) == msg);

    const double after_ks = he_noise_budget(ctx.keys.sk, cts[0]).noise_budget_bits;
    CHECK(after_ks > 0.0);

    auto model = derive_linear_model(3, pasta.t, PrimeModulus(65537), 7);
    auto scores = he_linear_model(cts, model, ctx.keys.pk, /*square_activation=*/true);
    CHECK(max_depth(scores) == 6);

    std::vector<FieldElement> expect;
    for (std::uint32_t c = 0; c < 3; ++c) {
        FieldElement s = model.bias[c];
        for (std::size_t j = 0; j < pasta.t; ++j)
            s = fe_add(s, fe_mul(model.weights[c * pasta.t + j], msg[j], 65537), 65537);
        expect.push_back(fe_mul(s, s, 65537));
    }
    CHECK(ctx.decrypt_words(scores) == expect);
    for (const auto& s : scores)
        CHECK(he_noise_budget(ctx.keys.sk, s).noise_budget_bits > 0.0);
}

TEST_CASE("server-side declarations never accept secret material") {
    // Structural audit: everything declared after the server-side marker in
    // the transcipher header takes only public material, ciphertexts, and
    // stream positions.
    std::ifstream header(TRANSCIPHER_HEADER);
    REQUIRE(header.good());
    std::string text((std::istreambuf_iterator<char>(header)),
                     std::istreambuf_iterator<char>());

    const auto marker = text.find("---- server side ----");
    REQUIRE(marker != std::string::npos);
    const std::string server_part = text.substr(marker);
    CHECK(server_part.find("PastaSecretKey") == std::string::npos);
    CHECK(server_part.find("HeSecretKey") == std::string::npos);
    CHECK(server_part.find("he_decrypt") == std::string::npos);
}
