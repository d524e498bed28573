#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "hheml/errors.hpp"
#include "hheml/field.hpp"
#include "hheml/he.hpp"
#include "hheml/xof.hpp"

using namespace hheml;

namespace {

// Small, fast ring for most functional checks (still depth >= 4 capable).
HeParams small_bfv(std::uint64_t p = 257) {
    HeParams params = HeParams::bfv_toy(p);
    params.ring_degree = 64;
    params.log2_q = 180;
    params.validate();
    return params;
}

// Brute-force negacyclic convolution: index arithmetic + sign folding written
// completely differently from the library's accumulate-then-fold loop.
Poly brute_negacyclic(const Poly& a, const Poly& b, const mpz_class& q) {
    const std::size_t n = a.size();
    Poly res(n, mpz_class(0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            mpz_class prod = a[i] * b[j];
            if (i + j < n)
                res[(i + j)] += prod;
            else
                res[(i + j) % n] -= prod;
        }
    for (auto& v : res) {
        v %= q;
        if (v < 0) v += q;
    }
    return res;
}

Poly ternary_to_poly(const std::vector<std::int8_t>& t, const mpz_class& q) {
    Poly out(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        out[i] = t[i] < 0 ? mpz_class(q - 1) : mpz_class(t[i]);
    return out;
}

mpz_class center_coeff(mpz_class v, const mpz_class& q) {
    if (v >= q / 2) v -= q;
    return v;
}

} // namespace

TEST_CASE("params validation") {
    CHECK_NOTHROW(HeParams::bfv_toy(65537));
    CHECK_NOTHROW(HeParams::transparent(257));

    HeParams bad = HeParams::bfv_toy(65537);
    bad.ring_degree = 100; // not a power of two
    CHECK_THROWS_AS(bad.validate(), BadParams);
    bad = HeParams::bfv_toy(65537);
    bad.log2_q = 16; // smaller than the plaintext modulus allows
    CHECK_THROWS_AS(bad.validate(), BadParams);
    bad = HeParams::bfv_toy(65537);
    bad.error_stddev = 0.0;
    CHECK_THROWS_AS(bad.validate(), BadParams);
    CHECK_THROWS_AS(HeParams::bfv_toy(65536), BadParams); // p not prime

    const HeParams defaults = HeParams::bfv_toy(65537);
    CHECK(defaults.ring_degree == 1024);
    CHECK(defaults.relin_digits() == (defaults.log2_q + 19) / 20);
    CHECK(defaults.error_bound() == 19); // floor(6 * 3.2)
}

TEST_CASE("negacyclic ring multiplication matches a convolution oracle at n=8") {
    std::mt19937_64 rng(21);
    const std::uint32_t L = 61;
    mpz_class q;
    mpz_setbit(q.get_mpz_t(), L);
    for (int rep = 0; rep < 50; ++rep) {
        Poly a(8), b(8);
        for (auto& v : a) v = static_cast<unsigned long>(rng() & ((1ull << 61) - 1));
        for (auto& v : b) v = static_cast<unsigned long>(rng() & ((1ull << 61) - 1));
        CHECK(negacyclic_mul_mod(a, b, L) == brute_negacyclic(a, b, q));
    }
    // X * X^7 = X^8 = -1
    Poly x(8, mpz_class(0)), x7(8, mpz_class(0));
    x[1] = 1;
    x7[7] = 1;
    Poly prod = negacyclic_mul_mod(x, x7, L);
    CHECK(prod[0] == q - 1);
}

TEST_CASE("keygen is deterministic under seed") {
    const HeParams params = small_bfv();
    auto kp1 = he_keygen(params, 42);
    auto kp2 = he_keygen(params, 42);
    CHECK(serialize_secret_key(kp1.sk) == serialize_secret_key(kp2.sk));
    CHECK(serialize_public_material(kp1.pk) == serialize_public_material(kp2.pk));

    auto kp3 = he_keygen(params, 43);
    CHECK(serialize_secret_key(kp1.sk) != serialize_secret_key(kp3.sk));
}

TEST_CASE("public pair satisfies b + a*s = -e with bounded e") {
    const HeParams params = small_bfv();
    auto kp = he_keygen(params, 7);
    const mpz_class q = params.modulus_q();

    Poly as = brute_negacyclic(kp.pk.pk_a, ternary_to_poly(kp.sk.s, q), q);
    for (std::size_t i = 0; i < as.size(); ++i) {
        mpz_class e = center_coeff((kp.pk.pk_b[i] + as[i]) % q, q);
        CHECK(abs(e) <= params.error_bound()); // 6 * stddev, rounded down
    }
}

TEST_CASE("encrypt/decrypt roundtrip on random scalars") {
    const HeParams params = small_bfv();
    auto kp = he_keygen(params, 1);
    XofStream rng("test-he-enc", {0, 0});
    std::mt19937_64 gen(22);
    for (int i = 0; i < 100; ++i) {
        FieldElement m = gen() % params.plaintext_modulus;
        auto ct = he_encrypt(kp.pk, m, rng);
        CHECK(he_decrypt(kp.sk, ct) == m);
        CHECK(ct.depth == 0);
    }
    CHECK(he_decrypt(kp.sk, he_encrypt(kp.pk, 0, rng)) == 0);
    CHECK_THROWS_AS(he_encrypt(kp.pk, 257, rng), UnreducedWord);
}

TEST_CASE("fresh budget above 100 bits at the full-size defaults") {
    const HeParams params = HeParams::bfv_toy(65537);
    auto kp = he_keygen(params, 2);
    XofStream rng("test-he-enc", {1, 0});
    auto ct = he_encrypt(kp.pk, 12345, rng);
    auto report = he_noise_budget(kp.sk, ct);
    CHECK(report.depth == 0);
    CHECK(report.noise_budget_bits > 100.0);
    CHECK(he_decrypt(kp.sk, ct) == 12345);
}

TEST_CASE("additive homomorphism") {
    const HeParams params = small_bfv();
    const std::uint64_t p = params.plaintext_modulus;
    auto kp = he_keygen(params, 3);
    XofStream rng("test-he-enc", {2, 0});
    std::mt19937_64 gen(23);

    for (int i = 0; i < 100; ++i) {
        FieldElement a = gen() % p, b = gen() % p;
        auto ca = he_encrypt(kp.pk, a, rng);
        auto cb = he_encrypt(kp.pk, b, rng);
        CHECK(he_decrypt(kp.sk, he_add(ca, cb)) == (a + b) % p);
        CHECK(he_decrypt(kp.sk, he_sub(ca, cb)) == (a + p - b) % p);
    }

    auto ct = he_encrypt(kp.pk, 99, rng);
    CHECK(he_decrypt(kp.sk, he_add(ct, he_neg(ct))) == 0);

    // one addition costs at most ~2 bits of budget
    auto before = he_noise_budget(kp.sk, ct).noise_budget_bits;
    auto after = he_noise_budget(kp.sk, he_add(ct, ct)).noise_budget_bits;
    CHECK(before - after <= 2.0);
}

TEST_CASE("plaintext operand ops") {
    const HeParams params = small_bfv();
    const std::uint64_t p = params.plaintext_modulus;
    auto kp = he_keygen(params, 4);
    XofStream rng("test-he-enc", {3, 0});
    std::mt19937_64 gen(24);

    for (int i = 0; i < 100; ++i) {
        FieldElement a = gen() % p, k = gen() % p;
        auto ct = he_encrypt(kp.pk, a, rng);
        CHECK(he_decrypt(kp.sk, he_add_plain(ct, k)) == (a + k) % p);
        CHECK(he_decrypt(kp.sk, he_mul_plain(ct, k)) == a * k % p);
        CHECK(he_mul_plain(ct, k).depth == ct.depth);
    }
    auto ct = he_encrypt(kp.pk, 123, rng);
    CHECK(he_decrypt(kp.sk, he_mul_plain(ct, 1)) == 123);
    CHECK(he_decrypt(kp.sk, he_mul_plain(ct, 0)) == 0);
}

TEST_CASE("multiplicative homomorphism and depth accounting") {
    const HeParams params = small_bfv();
    const std::uint64_t p = params.plaintext_modulus;
    auto kp = he_keygen(params, 5);
    XofStream rng("test-he-enc", {4, 0});
    std::mt19937_64 gen(25);

    for (int i = 0; i < 50; ++i) {
        FieldElement a = gen() % p, b = gen() % p;
        auto ca = he_encrypt(kp.pk, a, rng);
        auto cb = he_encrypt(kp.pk, b, rng);
        auto prod = he_mul(ca, cb, kp.pk);
        CHECK(he_decrypt(kp.sk, prod) == a * b % p);
        CHECK(prod.depth == 1);
    }

    auto ca = he_encrypt(kp.pk, 77, rng);
    CHECK(he_decrypt(kp.sk, he_mul(ca, he_encrypt(kp.pk, 1, rng), kp.pk)) == 77);

    // depth = max + 1; add preserves
    auto c2 = he_mul(ca, ca, kp.pk);
    auto c3 = he_mul(c2, ca, kp.pk);
    CHECK(c3.depth == 2);
    CHECK(he_add(c3, ca).depth == 2);
    CHECK(he_mul(c3, c2, kp.pk).depth == 3);
}

TEST_CASE("five chained multiplications at the full-size defaults") {
    const HeParams params = HeParams::bfv_toy(65537);
    const std::uint64_t p = params.plaintext_modulus;
    auto kp = he_keygen(params, 6);
    XofStream rng("test-he-enc", {5, 0});

    FieldElement value = 3;
    auto ct = he_encrypt(kp.pk, value, rng);
    double last_budget = he_noise_budget(kp.sk, ct).noise_budget_bits;
    for (int i = 0; i < 5; ++i) {
        FieldElement factor = 1000 + 17 * FieldElement(i);
        auto cf = he_encrypt(kp.pk, factor, rng);
        ct = he_mul(ct, cf, kp.pk);
        value = value * factor % p;

        const double budget = he_noise_budget(kp.sk, ct).noise_budget_bits;
        CHECK(budget < last_budget); // strictly decreasing across muls
        CHECK(budget > 0.0);
        last_budget = budget;
    }
    CHECK(ct.depth == 5);
    CHECK(he_decrypt(kp.sk, ct) == value);
}

TEST_CASE("budget matches an independent computation on a tiny ring") {
    HeParams params = HeParams::bfv_toy(17);
    params.ring_degree = 8;
    params.log2_q = 40;
    params.validate();
    auto kp = he_keygen(params, 8);
    XofStream rng("test-he-enc", {6, 0});
    auto ct = he_encrypt(kp.pk, 11, rng);

    const mpz_class q = params.modulus_q();
    Poly c1s = brute_negacyclic(ct.c1, ternary_to_poly(kp.sk.s, q), q);
    mpz_class max_noise = 0;
    for (std::size_t i = 0; i < 8; ++i) {
        mpz_class u = (ct.c0[i] + c1s[i]) % q;
        if (i == 0) u = (u - params.delta() * 11) % q;
        if (u < 0) u += q;
        mpz_class v = abs(center_coeff(u, q));
        if (v > max_noise) max_noise = v;
    }
    REQUIRE(max_noise > 0);
    const double expected = std::log2(mpz_get_d(mpz_class(q / (2 * 17)).get_mpz_t())) -
                            std::log2(mpz_get_d(max_noise.get_mpz_t()));
    const double reported = he_noise_budget(kp.sk, ct).noise_budget_bits;
    CHECK(reported == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("decrypt detects drowned ciphertexts") {
    // Small modulus so two multiplications push the noise past q/(2p).
    HeParams params = HeParams::bfv_toy(257);
    params.ring_degree = 64;
    params.log2_q = 48;
    params.validate();
    auto kp = he_keygen(params, 9);
    XofStream rng("test-he-enc", {7, 0});

    auto ct = he_encrypt(kp.pk, 2, rng);
    CHECK(he_decrypt(kp.sk, ct) == 2);
    for (int i = 0; i < 3; ++i) ct = he_mul(ct, ct, kp.pk);
    CHECK(he_noise_budget(kp.sk, ct).noise_budget_bits <= 0.0);
    CHECK_THROWS_AS(he_decrypt(kp.sk, ct), NoiseOverflow);
}

TEST_CASE("params mismatch is rejected") {
    auto kp_a = he_keygen(small_bfv(257), 10);
    auto kp_b = he_keygen(small_bfv(65537), 11);
    XofStream rng("test-he-enc", {8, 0});
    auto ca = he_encrypt(kp_a.pk, 1, rng);
    auto cb = he_encrypt(kp_b.pk, 1, rng);
    CHECK_THROWS_AS(he_add(ca, cb), ParamsMismatch);
    CHECK_THROWS_AS(he_mul(ca, cb, kp_a.pk), ParamsMismatch);
    CHECK_THROWS_AS(he_mul(ca, ca, kp_b.pk), ParamsMismatch);
    CHECK_THROWS_AS(he_decrypt(kp_b.sk, ca), ParamsMismatch);
}

TEST_CASE("transparent backend mirrors values and reports infinite budget") {
    const HeParams params = HeParams::transparent(257);
    auto kp = he_keygen(params, 12);
    XofStream rng("test-he-enc", {9, 0});

    auto ca = he_encrypt(kp.pk, 200, rng);
    auto cb = he_encrypt(kp.pk, 100, rng);
    CHECK(he_decrypt(kp.sk, ca) == 200);
    CHECK(he_decrypt(kp.sk, he_add(ca, cb)) == 43);             // 300 mod 257
    CHECK(he_decrypt(kp.sk, he_mul(ca, cb, kp.pk)) == 211);     // 20000 mod 257
    CHECK(he_mul(ca, cb, kp.pk).depth == 1);
    CHECK(std::isinf(he_noise_budget(kp.sk, ca).noise_budget_bits));
}

TEST_CASE("differential: both backends agree on random straight-line programs") {
    const std::uint64_t p = 257;
    const HeParams tparams = HeParams::transparent(p);
    HeParams bparams = small_bfv(p);
    auto tk = he_keygen(tparams, 13);
    auto bk = he_keygen(bparams, 14);
    XofStream trng("test-he-enc", {10, 0});
    XofStream brng("test-he-enc", {11, 0});
    std::mt19937_64 gen(26);

    struct Entry {
        HeCiphertext t, b;
        FieldElement ref;
        int score; // coarse upper bound on accumulated noise bits
    };
    std::vector<Entry> pool;
    auto push = [&](FieldElement m) {
        pool.push_back({he_encrypt(tk.pk, m, trng), he_encrypt(bk.pk, m, brng), m, 14});
    };
    for (int i = 0; i < 4; ++i) push(gen() % p);

    const int score_cap = int(bparams.log2_q) - 40;
    int applied = 0;
    while (applied < 200) {
        const auto& a = pool[gen() % pool.size()];
        const auto& b = pool[gen() % pool.size()];
        const FieldElement k = gen() % p;
        Entry next;
        switch (gen() % 6) {
        case 0:
            next = {he_add(a.t, b.t), he_add(a.b, b.b), fe_add(a.ref, b.ref, p),
                    std::max(a.score, b.score) + 1};
            break;
        case 1:
            next = {he_sub(a.t, b.t), he_sub(a.b, b.b), fe_sub(a.ref, b.ref, p),
                    std::max(a.score, b.score) + 1};
            break;
        case 2:
            next = {he_neg(a.t), he_neg(a.b), fe_neg(a.ref, p), a.score};
            break;
        case 3:
            next = {he_add_plain(a.t, k), he_add_plain(a.b, k), fe_add(a.ref, k, p),
                    a.score + 1};
            break;
        case 4:
            next = {he_mul_plain(a.t, k), he_mul_plain(a.b, k), fe_mul(a.ref, k, p),
                    a.score + 9};
            break;
        case 5:
            next = {he_mul(a.t, b.t, tk.pk), he_mul(a.b, b.b, bk.pk),
                    fe_mul(a.ref, b.ref, p), std::max({a.score, b.score, 24}) + 18};
            break;
        }
        if (next.score > score_cap) continue;
        pool.push_back(std::move(next));
        ++applied;
    }

    for (const auto& e : pool) {
        CHECK(he_noise_budget(bk.sk, e.b).noise_budget_bits > 0.0);
        CHECK(he_decrypt(tk.sk, e.t) == e.ref);
        CHECK(he_decrypt(bk.sk, e.b) == e.ref);
        CHECK(e.t.depth == e.b.depth);
    }
}

TEST_CASE("serialization roundtrips") {
    const HeParams params = small_bfv();
    auto kp = he_keygen(params, 15);
    XofStream rng("test-he-enc", {12, 0});
    auto ct = he_mul(he_encrypt(kp.pk, 33, rng), he_encrypt(kp.pk, 44, rng), kp.pk);

    auto bytes = serialize_ciphertext(ct);
    auto back = parse_ciphertext(params, bytes);
    CHECK(serialize_ciphertext(back) == bytes);
    CHECK(back.depth == 1);
    CHECK(he_decrypt(kp.sk, back) == 33 * 44 % 257);

    auto pk_bytes = serialize_public_material(kp.pk);
    CHECK(serialize_public_material(parse_public_material(params, pk_bytes)) == pk_bytes);

    auto sk_bytes = serialize_secret_key(kp.sk);
    CHECK(serialize_secret_key(parse_secret_key(params, sk_bytes)) == sk_bytes);

    // transparent flavor
    const HeParams tparams = HeParams::transparent(257);
    auto tk = he_keygen(tparams, 16);
    auto tct = he_encrypt(tk.pk, 7, rng);
    CHECK(he_decrypt(tk.sk, parse_ciphertext(tparams, serialize_ciphertext(tct))) == 7);
}

TEST_CASE("serialization rejects malformed input") {
    const HeParams params = small_bfv();
    auto kp = he_keygen(params, 17);
    XofStream rng("test-he-enc", {13, 0});
    auto bytes = serialize_ciphertext(he_encrypt(kp.pk, 5, rng));

    // truncated
    auto cut = bytes;
    cut.resize(cut.size() - 1);
    CHECK_THROWS_AS(parse_ciphertext(params, cut), TruncatedFrame);

    // trailing garbage
    auto extra = bytes;
    extra.push_back(0);
    CHECK_THROWS_AS(parse_ciphertext(params, extra), BadHeader);

    // wrong backend tag
    auto flipped = bytes;
    flipped[0] = std::uint8_t(HeBackend::Transparent);
    CHECK_THROWS_AS(parse_ciphertext(params, flipped), BadHeader);

    // oversized coefficient: set the top coefficient bytes beyond q
    auto hot = bytes;
    hot[hot.size() - 1] = 0xff;
    CHECK_THROWS_AS(parse_ciphertext(params, hot), BadHeader);
}
