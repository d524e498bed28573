#include "hheml/he.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "hheml/errors.hpp"
#include "hheml/serialize.hpp"

namespace hheml {

namespace {

constexpr std::string_view kKeygenTag = "HHEML-HE-KEYGEN";

// ---- samplers --------------------------------------------------------------

std::int8_t sample_ternary(XofStream& rng) {
    for (;;) {
        std::uint8_t b;
        rng.squeeze({&b, 1});
        if (b < 255) return std::int8_t(b % 3) - 1; // 255 rejected: 255 = 3*85
    }
}

// Uniform integer in [-bound, bound], two-byte rejection sampling.
std::int64_t sample_error(XofStream& rng, std::uint32_t bound) {
    const std::uint32_t range = 2 * bound + 1;
    const std::uint32_t limit = (65536 / range) * range;
    for (;;) {
        std::uint8_t b[2];
        rng.squeeze({b, 2});
        const std::uint32_t v = std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8;
        if (v < limit) return std::int64_t(v % range) - bound;
    }
}

// Uniform in [0, 2^log2_q): exactly log2_q fresh bits.
mpz_class sample_uniform_q(XofStream& rng, std::uint32_t log2_q) {
    const std::size_t nbytes = (log2_q + 7) / 8;
    std::vector<std::uint8_t> buf(nbytes);
    rng.squeeze(buf);
    const unsigned extra = unsigned(nbytes * 8 - log2_q);
    buf[nbytes - 1] &= std::uint8_t(0xff >> extra);
    mpz_class v;
    mpz_import(v.get_mpz_t(), nbytes, -1, 1, 0, 0, buf.data());
    return v;
}

// ---- coefficient helpers ----------------------------------------------------

// v mod 2^L into [0, 2^L), also for negative v.
inline void reduce_q(mpz_class& v, std::uint32_t log2_q) {
    mpz_fdiv_r_2exp(v.get_mpz_t(), v.get_mpz_t(), log2_q);
}

inline mpz_class centered(const mpz_class& v, const mpz_class& q, const mpz_class& half) {
    return v >= half ? mpz_class(v - q) : v;
}

// round(v * mult / 2^L), exact for signed v (floor((v*mult + 2^(L-1)) / 2^L)).
mpz_class scale_round(const mpz_class& v, std::uint64_t mult, std::uint32_t log2_q) {
    mpz_class t = v * mult;
    mpz_class half;
    mpz_setbit(half.get_mpz_t(), log2_q - 1);
    t += half;
    mpz_fdiv_q_2exp(t.get_mpz_t(), t.get_mpz_t(), log2_q);
    return t;
}

// ---- negacyclic ring arithmetic ---------------------------------------------
// All products are schoolbook into a 2n-1 accumulator, then folded with
// X^n = -1. The accumulator is pre-sized so mpz_addmul never reallocates.

std::vector<mpz_class> make_accumulator(std::size_t n, std::size_t bits) {
    std::vector<mpz_class> acc(2 * n - 1);
    for (auto& v : acc) mpz_realloc2(v.get_mpz_t(), bits);
    return acc;
}

Poly fold(std::vector<mpz_class>& acc, std::size_t n) {
    Poly out(n);
    for (std::size_t k = 0; k < n; ++k) {
        out[k] = std::move(acc[k]);
        if (k + n <= 2 * n - 2) out[k] -= acc[k + n];
    }
    return out;
}

// Exact signed product (no reduction) -- the tensor step needs the integer
// result before rescaling.
Poly negacyclic_mul_raw(const Poly& a, const Poly& b, std::uint32_t log2_q) {
    const std::size_t n = a.size();
    auto acc = make_accumulator(n, 2 * std::size_t(log2_q) + std::bit_width(n) + 4);
    for (std::size_t i = 0; i < n; ++i) {
        if (mpz_sgn(a[i].get_mpz_t()) == 0) continue;
        for (std::size_t j = 0; j < n; ++j)
            mpz_addmul(acc[i + j].get_mpz_t(), a[i].get_mpz_t(), b[j].get_mpz_t());
    }
    return fold(acc, n);
}

// digit * poly mod q, digit coefficients below the relinearization base.
Poly negacyclic_mul_digit(const std::vector<unsigned long>& d, const Poly& b,
                          std::uint32_t log2_q) {
    const std::size_t n = b.size();
    auto acc = make_accumulator(n, std::size_t(log2_q) + 64 + std::bit_width(n) + 4);
    for (std::size_t i = 0; i < n; ++i) {
        if (d[i] == 0) continue;
        for (std::size_t j = 0; j < n; ++j)
            mpz_addmul_ui(acc[i + j].get_mpz_t(), b[j].get_mpz_t(), d[i]);
    }
    Poly out = fold(acc, n);
    for (auto& v : out) reduce_q(v, log2_q);
    return out;
}

// poly * ternary mod q -- additions only; used by encrypt/decrypt/keygen.
Poly negacyclic_mul_ternary(const Poly& a, const std::vector<std::int8_t>& t,
                            std::uint32_t log2_q) {
    const std::size_t n = a.size();
    auto acc = make_accumulator(n, std::size_t(log2_q) + std::bit_width(n) + 4);
    for (std::size_t i = 0; i < n; ++i) {
        if (t[i] == 0) continue;
        if (t[i] > 0)
            for (std::size_t j = 0; j < n; ++j) acc[i + j] += a[j];
        else
            for (std::size_t j = 0; j < n; ++j) acc[i + j] -= a[j];
    }
    Poly out = fold(acc, n);
    for (auto& v : out) reduce_q(v, log2_q);
    return out;
}

Poly poly_add(const Poly& a, const Poly& b, std::uint32_t log2_q) {
    Poly out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = a[i] + b[i];
        reduce_q(out[i], log2_q);
    }
    return out;
}

Poly poly_sub(const Poly& a, const Poly& b, std::uint32_t log2_q) {
    Poly out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = a[i] - b[i];
        reduce_q(out[i], log2_q);
    }
    return out;
}

Poly poly_neg(const Poly& a, std::uint32_t log2_q) {
    Poly out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = -a[i];
        reduce_q(out[i], log2_q);
    }
    return out;
}

// Multiply by a signed scalar constant.
Poly poly_scale(const Poly& a, std::int64_t k, std::uint32_t log2_q) {
    Poly out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = a[i] * k;
        reduce_q(out[i], log2_q);
    }
    return out;
}

Poly error_poly(XofStream& rng, std::size_t n, std::uint32_t bound,
                std::uint32_t log2_q) {
    Poly e(n);
    for (auto& v : e) {
        v = sample_error(rng, bound);
        reduce_q(v, log2_q);
    }
    return e;
}

Poly ternary_as_poly(const std::vector<std::int8_t>& t, std::uint32_t log2_q) {
    Poly out(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        out[i] = t[i];
        reduce_q(out[i], log2_q);
    }
    return out;
}

void require_same_params(const HeCiphertext& a, const HeCiphertext& b) {
    if (!(a.params == b.params))
        throw ParamsMismatch("ciphertexts from different parameter sets");
}

void require_reduced(FieldElement m, std::uint64_t p) {
    if (m >= p) throw UnreducedWord("plaintext scalar out of range");
}

// Centered representative of a plaintext constant, to halve the noise growth
// of plain multiplication.
std::int64_t centered_scalar(FieldElement k, std::uint64_t p) {
    return k > p / 2 ? std::int64_t(k) - std::int64_t(p) : std::int64_t(k);
}

double log2_mpz(const mpz_class& v) {
    if (mpz_sgn(v.get_mpz_t()) == 0) return 0.0;
    long exp;
    const double d = mpz_get_d_2exp(&exp, v.get_mpz_t());
    return double(exp) + std::log2(std::abs(d));
}

struct DecryptOutcome {
    FieldElement m = 0;
    mpz_class max_noise; // infinity-norm of the residual
};

DecryptOutcome bfv_decrypt_full(const HeSecretKey& sk, const HeCiphertext& ct) {
    const auto& P = ct.params;
    const mpz_class q = P.modulus_q();
    const mpz_class half = q >> 1;

    Poly u = poly_add(ct.c0, negacyclic_mul_ternary(ct.c1, sk.s, P.log2_q), P.log2_q);

    // m = round(p * u0 / q) mod p
    mpz_class m_raw = scale_round(centered(u[0], q, half), P.plaintext_modulus, P.log2_q);
    mpz_class m_mod;
    mpz_mod_ui(m_mod.get_mpz_t(), m_raw.get_mpz_t(), P.plaintext_modulus);

    DecryptOutcome out;
    out.m = mpz_get_ui(m_mod.get_mpz_t());

    // residual: coefficient 0 against delta*m, the rest is pure noise
    mpz_class v0 = u[0] - P.delta() * out.m;
    reduce_q(v0, P.log2_q);
    out.max_noise = abs(centered(v0, q, half));
    for (std::size_t i = 1; i < u.size(); ++i) {
        mpz_class vi = abs(centered(u[i], q, half));
        if (vi > out.max_noise) out.max_noise = vi;
    }
    return out;
}

mpz_class noise_ceiling(const HeParams& P) {
    // decryptable while noise < q / (2p)
    mpz_class c = P.modulus_q() / (2 * P.plaintext_modulus);
    return c;
}

} // namespace

// ---- params -----------------------------------------------------------------

const char* to_string(HeBackend b) {
    return b == HeBackend::Transparent ? "transparent" : "bfv-toy";
}

HeParams HeParams::transparent(std::uint64_t p) {
    HeParams params;
    params.backend = HeBackend::Transparent;
    params.plaintext_modulus = p;
    params.validate();
    return params;
}

HeParams HeParams::bfv_toy(std::uint64_t p) {
    HeParams params;
    params.backend = HeBackend::BfvToy;
    params.plaintext_modulus = p;
    params.validate();
    return params;
}

void HeParams::validate() const {
    PrimeModulus check(plaintext_modulus); // 3 < p < 2^32, prime
    if (!std::has_single_bit(ring_degree) || ring_degree < 4 || ring_degree > 65536)
        throw BadParams("ring degree must be a power of two in [4, 65536]");
    if (log2_q < 32 || log2_q > 1024)
        throw BadParams("log2 q must lie in [32, 1024]");
    if (std::uint64_t(log2_q) < std::uint64_t(check.sample_bits()) + 8)
        throw BadParams("ciphertext modulus too small for the plaintext modulus");
    if (decomp_log2w < 4 || decomp_log2w > 63)
        throw BadParams("relinearization base must be 2^4 .. 2^63");
    if (!(error_stddev > 0.0) || error_stddev > 40.0)
        throw BadParams("error stddev must lie in (0, 40]");
}

mpz_class HeParams::modulus_q() const {
    mpz_class q;
    mpz_setbit(q.get_mpz_t(), log2_q);
    return q;
}

mpz_class HeParams::delta() const { return modulus_q() / plaintext_modulus; }

std::uint32_t HeParams::relin_digits() const {
    return (log2_q + decomp_log2w - 1) / decomp_log2w;
}

std::uint32_t HeParams::error_bound() const {
    return std::uint32_t(6.0 * error_stddev);
}

// ---- keygen -----------------------------------------------------------------

HeKeyPair he_keygen(const HeParams& params, std::uint64_t seed) {
    params.validate();

    HeKeyPair kp;
    kp.sk.params = params;
    kp.pk.params = params;
    if (params.backend == HeBackend::Transparent) return kp;

    XofStream rng(kKeygenTag, {seed, 0});
    const std::size_t n = params.ring_degree;
    const std::uint32_t L = params.log2_q;
    const std::uint32_t B = params.error_bound();

    kp.sk.s.resize(n);
    for (auto& v : kp.sk.s) v = sample_ternary(rng);

    kp.pk.pk_a.resize(n);
    for (auto& v : kp.pk.pk_a) v = sample_uniform_q(rng, L);
    Poly e = error_poly(rng, n, B, L);
    // b = -(a s + e)
    kp.pk.pk_b = poly_neg(
        poly_add(negacyclic_mul_ternary(kp.pk.pk_a, kp.sk.s, L), e, L), L);

    // relinearization key over s^2
    Poly s_sq = negacyclic_mul_ternary(ternary_as_poly(kp.sk.s, L), kp.sk.s, L);
    const std::uint32_t digits = params.relin_digits();
    kp.pk.relin.resize(digits);
    for (std::uint32_t i = 0; i < digits; ++i) {
        auto& rk = kp.pk.relin[i];
        rk.a.resize(n);
        for (auto& v : rk.a) v = sample_uniform_q(rng, L);
        Poly ei = error_poly(rng, n, B, L);
        // b_i = -(a_i s + e_i) + w^i s^2
        rk.b = poly_neg(poly_add(negacyclic_mul_ternary(rk.a, kp.sk.s, L), ei, L), L);
        for (std::size_t j = 0; j < n; ++j) {
            mpz_class term = s_sq[j];
            term <<= (i * params.decomp_log2w);
            rk.b[j] += term;
            reduce_q(rk.b[j], L);
        }
    }
    return kp;
}

// ---- encrypt / decrypt --------------------------------------------------------

HeCiphertext he_encrypt(const HePublicMaterial& pk, FieldElement m, XofStream& rng) {
    const auto& P = pk.params;
    require_reduced(m, P.plaintext_modulus);

    HeCiphertext ct;
    ct.params = P;
    ct.depth = 0;
    if (P.backend == HeBackend::Transparent) {
        ct.value = m;
        return ct;
    }

    const std::size_t n = P.ring_degree;
    const std::uint32_t L = P.log2_q;
    std::vector<std::int8_t> u(n);
    for (auto& v : u) v = sample_ternary(rng);

    ct.c0 = poly_add(negacyclic_mul_ternary(pk.pk_b, u, L),
                     error_poly(rng, n, P.error_bound(), L), L);
    ct.c0[0] += P.delta() * m;
    reduce_q(ct.c0[0], L);
    ct.c1 = poly_add(negacyclic_mul_ternary(pk.pk_a, u, L),
                     error_poly(rng, n, P.error_bound(), L), L);
    return ct;
}

FieldElement he_decrypt(const HeSecretKey& sk, const HeCiphertext& ct) {
    if (!(sk.params == ct.params))
        throw ParamsMismatch("secret key / ciphertext parameter mismatch");
    if (ct.params.backend == HeBackend::Transparent) return ct.value;

    auto out = bfv_decrypt_full(sk, ct);
    if (out.max_noise >= noise_ceiling(ct.params))
        throw NoiseOverflow("residual noise at " + std::to_string(log2_mpz(out.max_noise)) +
                            " bits reached the decryption ceiling");
    return out.m;
}

NoiseReport he_noise_budget(const HeSecretKey& sk, const HeCiphertext& ct) {
    if (!(sk.params == ct.params))
        throw ParamsMismatch("secret key / ciphertext parameter mismatch");

    NoiseReport report;
    report.depth = ct.depth;
    if (ct.params.backend == HeBackend::Transparent) {
        report.noise_budget_bits = std::numeric_limits<double>::infinity();
        return report;
    }
    auto out = bfv_decrypt_full(sk, ct);
    const double ceiling_bits = log2_mpz(noise_ceiling(ct.params));
    if (mpz_sgn(out.max_noise.get_mpz_t()) == 0)
        report.noise_budget_bits = ceiling_bits;
    else
        report.noise_budget_bits = ceiling_bits - log2_mpz(out.max_noise);
    return report;
}

// ---- arithmetic ---------------------------------------------------------------

HeCiphertext he_add(const HeCiphertext& a, const HeCiphertext& b) {
    require_same_params(a, b);
    HeCiphertext out;
    out.params = a.params;
    out.depth = std::max(a.depth, b.depth);
    if (a.params.backend == HeBackend::Transparent) {
        out.value = fe_add(a.value, b.value, a.params.plaintext_modulus);
        return out;
    }
    out.c0 = poly_add(a.c0, b.c0, a.params.log2_q);
    out.c1 = poly_add(a.c1, b.c1, a.params.log2_q);
    return out;
}

HeCiphertext he_sub(const HeCiphertext& a, const HeCiphertext& b) {
    require_same_params(a, b);
    HeCiphertext out;
    out.params = a.params;
    out.depth = std::max(a.depth, b.depth);
    if (a.params.backend == HeBackend::Transparent) {
        out.value = fe_sub(a.value, b.value, a.params.plaintext_modulus);
        return out;
    }
    out.c0 = poly_sub(a.c0, b.c0, a.params.log2_q);
    out.c1 = poly_sub(a.c1, b.c1, a.params.log2_q);
    return out;
}

HeCiphertext he_neg(const HeCiphertext& a) {
    HeCiphertext out;
    out.params = a.params;
    out.depth = a.depth;
    if (a.params.backend == HeBackend::Transparent) {
        out.value = fe_neg(a.value, a.params.plaintext_modulus);
        return out;
    }
    out.c0 = poly_neg(a.c0, a.params.log2_q);
    out.c1 = poly_neg(a.c1, a.params.log2_q);
    return out;
}

HeCiphertext he_add_plain(const HeCiphertext& a, FieldElement k) {
    require_reduced(k, a.params.plaintext_modulus);
    HeCiphertext out = a;
    if (a.params.backend == HeBackend::Transparent) {
        out.value = fe_add(a.value, k, a.params.plaintext_modulus);
        return out;
    }
    out.c0[0] += a.params.delta() * k;
    reduce_q(out.c0[0], a.params.log2_q);
    return out;
}

HeCiphertext he_mul_plain(const HeCiphertext& a, FieldElement k) {
    require_reduced(k, a.params.plaintext_modulus);
    HeCiphertext out;
    out.params = a.params;
    out.depth = a.depth;
    if (a.params.backend == HeBackend::Transparent) {
        out.value = fe_mul(a.value, k, a.params.plaintext_modulus);
        return out;
    }
    const std::int64_t kc = centered_scalar(k, a.params.plaintext_modulus);
    out.c0 = poly_scale(a.c0, kc, a.params.log2_q);
    out.c1 = poly_scale(a.c1, kc, a.params.log2_q);
    return out;
}

HeCiphertext he_mul(const HeCiphertext& a, const HeCiphertext& b,
                    const HePublicMaterial& pk) {
    require_same_params(a, b);
    if (!(a.params == pk.params))
        throw ParamsMismatch("evaluation key / ciphertext parameter mismatch");

    HeCiphertext out;
    out.params = a.params;
    out.depth = std::max(a.depth, b.depth) + 1;
    if (a.params.backend == HeBackend::Transparent) {
        out.value = fe_mul(a.value, b.value, a.params.plaintext_modulus);
        return out;
    }

    const auto& P = a.params;
    const std::size_t n = P.ring_degree;
    const std::uint32_t L = P.log2_q;
    const mpz_class q = P.modulus_q();
    const mpz_class half = q >> 1;

    // centered lifts -- the tensor product is computed over the integers
    auto lift = [&](const Poly& src) {
        Poly out_poly(n);
        for (std::size_t i = 0; i < n; ++i) out_poly[i] = centered(src[i], q, half);
        return out_poly;
    };
    Poly a0 = lift(a.c0), a1 = lift(a.c1), b0 = lift(b.c0), b1 = lift(b.c1);

    // Karatsuba over the ciphertext polynomials: 3 ring products
    Poly e0 = negacyclic_mul_raw(a0, b0, L);
    Poly e2 = negacyclic_mul_raw(a1, b1, L);
    Poly sa(n), sb(n);
    for (std::size_t i = 0; i < n; ++i) {
        sa[i] = a0[i] + a1[i];
        sb[i] = b0[i] + b1[i];
    }
    Poly e1 = negacyclic_mul_raw(sa, sb, L);
    for (std::size_t i = 0; i < n; ++i) e1[i] -= e0[i] + e2[i];

    // rescale each tensor component by p/q
    auto rescale = [&](Poly& poly) {
        for (auto& v : poly) {
            v = scale_round(v, P.plaintext_modulus, L);
            reduce_q(v, L);
        }
    };
    rescale(e0);
    rescale(e1);
    rescale(e2);

    // relinearize e2 through the base-w key
    const std::uint32_t digits = P.relin_digits();
    const unsigned long mask = (P.decomp_log2w == 64)
                                   ? ~0ul
                                   : ((1ul << P.decomp_log2w) - 1);
    std::vector<unsigned long> digit(n);
    for (std::uint32_t i = 0; i < digits; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            mpz_class d = e2[j] >> (i * P.decomp_log2w);
            digit[j] = mpz_get_ui(d.get_mpz_t()) & mask;
        }
        e0 = poly_add(e0, negacyclic_mul_digit(digit, pk.relin[i].b, L), L);
        e1 = poly_add(e1, negacyclic_mul_digit(digit, pk.relin[i].a, L), L);
    }

    out.c0 = std::move(e0);
    out.c1 = std::move(e1);
    return out;
}

Poly negacyclic_mul_mod(const Poly& a, const Poly& b, std::uint32_t log2_q) {
    if (a.size() != b.size()) throw DimensionMismatch("ring operands of unequal degree");
    Poly out = negacyclic_mul_raw(a, b, log2_q);
    for (auto& v : out) reduce_q(v, log2_q);
    return out;
}

// ---- serialization -------------------------------------------------------------

namespace {

void put_poly(ByteWriter& w, const Poly& poly, std::size_t kq) {
    std::vector<std::uint8_t> buf(kq);
    for (const auto& v : poly) {
        std::fill(buf.begin(), buf.end(), 0);
        std::size_t count = 0;
        mpz_export(buf.data(), &count, -1, 1, 0, 0, v.get_mpz_t());
        w.bytes(buf);
    }
}

Poly get_poly(ByteReader& r, std::size_t n, std::size_t kq, const mpz_class& q) {
    Poly poly(n);
    for (auto& v : poly) {
        auto b = r.take(kq);
        mpz_import(v.get_mpz_t(), kq, -1, 1, 0, 0, b.data());
        if (v >= q) throw BadHeader("coefficient exceeds the ciphertext modulus");
    }
    return poly;
}

void check_backend_tag(std::uint8_t tag, const HeParams& params, const char* what) {
    if (tag != std::uint8_t(params.backend))
        throw BadHeader(std::string(what) + ": backend tag mismatch");
}

} // namespace

std::vector<std::uint8_t> serialize_ciphertext(const HeCiphertext& ct) {
    ByteWriter w;
    w.u8(std::uint8_t(ct.params.backend));
    w.u32(ct.depth);
    if (ct.params.backend == HeBackend::Transparent) {
        w.u64(ct.value);
        return w.take();
    }
    w.u32(ct.params.ring_degree);
    const std::size_t kq = ct.params.coeff_bytes();
    put_poly(w, ct.c0, kq);
    put_poly(w, ct.c1, kq);
    return w.take();
}

HeCiphertext parse_ciphertext(const HeParams& params, std::span<const std::uint8_t> data) {
    ByteReader r(data);
    HeCiphertext ct;
    ct.params = params;
    check_backend_tag(r.u8(), params, "ciphertext");
    ct.depth = r.u32();
    if (params.backend == HeBackend::Transparent) {
        ct.value = r.u64();
        if (ct.value >= params.plaintext_modulus)
            throw BadHeader("transparent value exceeds the plaintext modulus");
    } else {
        if (r.u32() != params.ring_degree)
            throw BadHeader("ciphertext ring degree mismatch");
        const mpz_class q = params.modulus_q();
        ct.c0 = get_poly(r, params.ring_degree, params.coeff_bytes(), q);
        ct.c1 = get_poly(r, params.ring_degree, params.coeff_bytes(), q);
    }
    if (r.remaining() != 0) throw BadHeader("trailing bytes after ciphertext");
    return ct;
}

std::vector<std::uint8_t> serialize_public_material(const HePublicMaterial& pk) {
    ByteWriter w;
    w.u8(std::uint8_t(pk.params.backend));
    if (pk.params.backend == HeBackend::Transparent) return w.take();

    w.u32(pk.params.ring_degree);
    w.u32(std::uint32_t(pk.relin.size()));
    const std::size_t kq = pk.params.coeff_bytes();
    put_poly(w, pk.pk_b, kq);
    put_poly(w, pk.pk_a, kq);
    for (const auto& rk : pk.relin) {
        put_poly(w, rk.b, kq);
        put_poly(w, rk.a, kq);
    }
    return w.take();
}

HePublicMaterial parse_public_material(const HeParams& params,
                                       std::span<const std::uint8_t> data) {
    ByteReader r(data);
    HePublicMaterial pk;
    pk.params = params;
    check_backend_tag(r.u8(), params, "public material");
    if (params.backend == HeBackend::Transparent) {
        if (r.remaining() != 0) throw BadHeader("trailing bytes after public material");
        return pk;
    }
    if (r.u32() != params.ring_degree)
        throw BadHeader("public material ring degree mismatch");
    const std::uint32_t digits = r.u32();
    if (digits != params.relin_digits())
        throw BadHeader("relinearization digit count mismatch");
    const mpz_class q = params.modulus_q();
    const std::size_t kq = params.coeff_bytes();
    pk.pk_b = get_poly(r, params.ring_degree, kq, q);
    pk.pk_a = get_poly(r, params.ring_degree, kq, q);
    pk.relin.resize(digits);
    for (auto& rk : pk.relin) {
        rk.b = get_poly(r, params.ring_degree, kq, q);
        rk.a = get_poly(r, params.ring_degree, kq, q);
    }
    if (r.remaining() != 0) throw BadHeader("trailing bytes after public material");
    return pk;
}

std::vector<std::uint8_t> serialize_secret_key(const HeSecretKey& sk) {
    ByteWriter w;
    w.u8(std::uint8_t(sk.params.backend));
    if (sk.params.backend == HeBackend::Transparent) return w.take();
    w.u32(std::uint32_t(sk.s.size()));
    for (std::int8_t v : sk.s) w.u8(v == -1 ? 2 : std::uint8_t(v));
    return w.take();
}

HeSecretKey parse_secret_key(const HeParams& params, std::span<const std::uint8_t> data) {
    ByteReader r(data);
    HeSecretKey sk;
    sk.params = params;
    check_backend_tag(r.u8(), params, "secret key");
    if (params.backend == HeBackend::Transparent) {
        if (r.remaining() != 0) throw BadHeader("trailing bytes after secret key");
        return sk;
    }
    if (r.u32() != params.ring_degree)
        throw BadHeader("secret key ring degree mismatch");
    sk.s.resize(params.ring_degree);
    for (auto& v : sk.s) {
        const std::uint8_t b = r.u8();
        if (b > 2) throw BadHeader("secret key coefficient out of range");
        v = b == 2 ? -1 : std::int8_t(b);
    }
    if (r.remaining() != 0) throw BadHeader("trailing bytes after secret key");
    return sk;
}

} // namespace hheml
