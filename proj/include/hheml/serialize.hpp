#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "hheml/errors.hpp"

namespace hheml {

/// Little-endian byte sink used for ciphertext/key serialization and wire
/// payloads.
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }

    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(std::uint8_t(v >> (8 * i)));
    }

    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(std::uint8_t(v >> (8 * i)));
    }

    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }

    void bytes(std::span<const std::uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }

    const std::vector<std::uint8_t>& data() const { return buf_; }
    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    std::vector<std::uint8_t> buf_;
};

/// Bounds-checked little-endian reader; underruns throw TruncatedFrame.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t u8() { return take(1)[0]; }

    std::uint32_t u32() {
        auto b = take(4);
        return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
               std::uint32_t(b[3]) << 24;
    }

    std::uint64_t u64() {
        auto b = take(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
        return v;
    }

    double f64() {
        std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }

    std::span<const std::uint8_t> take(std::size_t n) {
        if (n > data_.size() - off_)
            throw TruncatedFrame("need " + std::to_string(n) + " bytes, have " +
                                 std::to_string(data_.size() - off_));
        auto out = data_.subspan(off_, n);
        off_ += n;
        return out;
    }

    std::size_t remaining() const { return data_.size() - off_; }

private:
    std::span<const std::uint8_t> data_;
    std::size_t off_ = 0;
};

} // namespace hheml
