#include "hheml/xof.hpp"

#include <cstring>

namespace hheml {

namespace {

constexpr std::uint64_t kRoundConstants[24] = {
    0x0000000000000001ull, 0x0000000000008082ull, 0x800000000000808aull,
    0x8000000080008000ull, 0x000000000000808bull, 0x0000000080000001ull,
    0x8000000080008081ull, 0x8000000000008009ull, 0x000000000000008aull,
    0x0000000000000088ull, 0x0000000080008009ull, 0x000000008000000aull,
    0x000000008000808bull, 0x800000000000008bull, 0x8000000000008089ull,
    0x8000000000008003ull, 0x8000000000008002ull, 0x8000000000000080ull,
    0x000000000000800aull, 0x800000008000000aull, 0x8000000080008081ull,
    0x8000000000008080ull, 0x0000000080000001ull, 0x8000000080008008ull,
};

// Rho rotation offsets, indexed as [x + 5y].
constexpr unsigned kRho[25] = {
    0,  1,  62, 28, 27, //
    36, 44, 6,  55, 20, //
    3,  10, 43, 25, 39, //
    41, 45, 15, 21, 8,  //
    18, 2,  61, 56, 14, //
};

inline std::uint64_t rotl64(std::uint64_t v, unsigned r) {
    return r == 0 ? v : (v << r) | (v >> (64 - r));
}

void keccak_f1600(std::array<std::uint64_t, 25>& a) {
    for (int round = 0; round < 24; ++round) {
        // theta
        std::uint64_t c[5];
        for (int x = 0; x < 5; ++x)
            c[x] = a[x] ^ a[x + 5] ^ a[x + 10] ^ a[x + 15] ^ a[x + 20];
        for (int x = 0; x < 5; ++x) {
            const std::uint64_t d = c[(x + 4) % 5] ^ rotl64(c[(x + 1) % 5], 1);
            for (int y = 0; y < 25; y += 5) a[x + y] ^= d;
        }

        // rho + pi
        std::uint64_t b[25];
        for (int x = 0; x < 5; ++x)
            for (int y = 0; y < 5; ++y)
                b[y + 5 * ((2 * x + 3 * y) % 5)] = rotl64(a[x + 5 * y], kRho[x + 5 * y]);

        // chi
        for (int y = 0; y < 25; y += 5)
            for (int x = 0; x < 5; ++x)
                a[x + y] = b[x + y] ^ (~b[(x + 1) % 5 + y] & b[(x + 2) % 5 + y]);

        // iota
        a[0] ^= kRoundConstants[round];
    }
}

inline std::uint8_t* state_bytes(std::array<std::uint64_t, 25>& s) {
    return reinterpret_cast<std::uint8_t*>(s.data());
}

constexpr std::size_t kRateBytes = 168; // SHAKE128

// Absorbs the whole message including the 0x1f...0x80 padding; the state is
// ready to squeeze (caller permutes before the first read).
void absorb_message(std::array<std::uint64_t, 25>& state,
                    std::span<const std::uint8_t> input) {
    std::uint8_t* bytes = state_bytes(state);
    std::size_t off = 0;
    while (input.size() - off >= kRateBytes) {
        for (std::size_t i = 0; i < kRateBytes; ++i) bytes[i] ^= input[off + i];
        keccak_f1600(state);
        off += kRateBytes;
    }
    for (std::size_t i = 0; i < input.size() - off; ++i) bytes[i] ^= input[off + i];
    bytes[input.size() - off] ^= 0x1f; // SHAKE domain suffix + pad10*1 start
    bytes[kRateBytes - 1] ^= 0x80;
}

} // namespace

XofStream::XofStream(std::string_view domain_tag, StreamPosition pos) {
    if (domain_tag.empty() || domain_tag.size() > 16)
        throw BadTag("domain tag must be 1..16 bytes, got " +
                     std::to_string(domain_tag.size()));

    std::vector<std::uint8_t> seed;
    seed.reserve(domain_tag.size() + 17);
    seed.insert(seed.end(), domain_tag.begin(), domain_tag.end());
    seed.push_back(0x00);
    for (int i = 0; i < 8; ++i) seed.push_back(std::uint8_t(pos.nonce >> (8 * i)));
    for (int i = 0; i < 8; ++i) seed.push_back(std::uint8_t(pos.counter >> (8 * i)));
    absorb_seed(seed);
}

void XofStream::absorb_seed(std::span<const std::uint8_t> seed) {
    absorb_message(state_, seed);
    block_offset_ = kRate; // next squeeze permutes first
}

void XofStream::squeeze(std::span<std::uint8_t> out) {
    std::size_t written = 0;
    while (written < out.size()) {
        if (block_offset_ == kRate) {
            keccak_f1600(state_);
            block_offset_ = 0;
        }
        const std::size_t take = std::min(kRate - block_offset_, out.size() - written);
        std::memcpy(out.data() + written, state_bytes(state_) + block_offset_, take);
        block_offset_ += take;
        written += take;
    }
}

std::vector<std::uint8_t> shake128(std::span<const std::uint8_t> input,
                                   std::size_t out_len) {
    std::array<std::uint64_t, 25> state{};
    absorb_message(state, input);
    std::vector<std::uint8_t> out(out_len);
    std::size_t written = 0;
    while (written < out_len) {
        keccak_f1600(state);
        const std::size_t take = std::min(kRateBytes, out_len - written);
        std::memcpy(out.data() + written, state_bytes(state), take);
        written += take;
    }
    return out;
}

} // namespace hheml
