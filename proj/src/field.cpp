#include "hheml/field.hpp"

#include <string>

namespace hheml {

namespace {

std::uint64_t pow_mod_u64(std::uint64_t base, std::uint64_t exp, std::uint64_t mod) {
    // mod < 2^32, so products stay below 2^64
    std::uint64_t acc = 1 % mod;
    base %= mod;
    while (exp != 0) {
        if (exp & 1) acc = acc * base % mod;
        base = base * base % mod;
        exp >>= 1;
    }
    return acc;
}

} // namespace

bool is_prime_u32(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t small : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull}) {
        if (n == small) return true;
        if (n % small == 0) return false;
    }
    std::uint64_t d = n - 1;
    unsigned s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    // witnesses {2, 7, 61} are deterministic for n < 4,759,123,141
    for (std::uint64_t a : {2ull, 7ull, 61ull}) {
        std::uint64_t x = pow_mod_u64(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (unsigned i = 1; i < s; ++i) {
            x = x * x % n;
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

PrimeModulus::PrimeModulus(std::uint64_t p) : p_(p) {
    if (p <= 3 || p >= (std::uint64_t{1} << 32))
        throw BadParams("modulus must satisfy 3 < p < 2^32, got " + std::to_string(p));
    if (!is_prime_u32(p))
        throw BadParams("modulus " + std::to_string(p) + " is not prime");
    bits_ = unsigned(std::bit_width(p - 1));
}

FieldElement fe_pow(FieldElement a, std::uint64_t e, std::uint64_t p) {
    return pow_mod_u64(a, e, p);
}

FieldElement fe_inv(FieldElement a, std::uint64_t p) {
    if (a == 0) throw ZeroInverse("0 has no multiplicative inverse");
    return fe_pow(a, p - 2, p);
}

std::vector<FieldElement> matrix_vector_mul(std::span<const FieldElement> matrix,
                                            std::span<const FieldElement> x,
                                            std::uint64_t p) {
    const std::size_t dim = x.size();
    if (matrix.size() != dim * dim)
        throw DimensionMismatch("matrix/vector size mismatch");
    std::vector<FieldElement> y(dim, 0);
    for (std::size_t i = 0; i < dim; ++i) {
        std::uint64_t acc = 0;
        const FieldElement* row = matrix.data() + i * dim;
        for (std::size_t j = 0; j < dim; ++j)
            acc = (acc + row[j] * x[j]) % p;
        y[i] = acc;
    }
    return y;
}

bool matrix_invertible(std::span<const FieldElement> matrix, std::size_t dim,
                       std::uint64_t p) {
    if (matrix.size() != dim * dim)
        throw DimensionMismatch("matrix is not dim x dim");
    std::vector<FieldElement> m(matrix.begin(), matrix.end());
    auto at = [&](std::size_t r, std::size_t c) -> FieldElement& { return m[r * dim + c]; };

    for (std::size_t col = 0; col < dim; ++col) {
        std::size_t pivot = col;
        while (pivot < dim && at(pivot, col) == 0) ++pivot;
        if (pivot == dim) return false;
        if (pivot != col)
            for (std::size_t c = col; c < dim; ++c) std::swap(at(pivot, c), at(col, c));

        const FieldElement inv = fe_inv(at(col, col), p);
        for (std::size_t r = col + 1; r < dim; ++r) {
            if (at(r, col) == 0) continue;
            const FieldElement factor = fe_mul(at(r, col), inv, p);
            for (std::size_t c = col; c < dim; ++c)
                at(r, c) = fe_sub(at(r, c), fe_mul(factor, at(col, c), p), p);
        }
    }
    return true;
}

} // namespace hheml
