#include "hheml/wire.hpp"

#include <array>

#include "hheml/errors.hpp"
#include "hheml/serialize.hpp"

namespace hheml {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'H', 'H', 'E', 'M'};

void put_blob(ByteWriter& w, std::span<const std::uint8_t> blob) {
    w.u32(std::uint32_t(blob.size()));
    w.bytes(blob);
}

std::span<const std::uint8_t> get_blob(ByteReader& r) {
    const std::uint32_t len = r.u32();
    if (len > kMaxPayload) throw OversizedFrame("embedded blob length exceeds the cap");
    return r.take(len);
}

void put_params(ByteWriter& w, const PastaParams& pasta, const HeParams& he) {
    w.u64(pasta.p.value());
    w.u32(pasta.t);
    w.u32(pasta.r);
    w.u8(pasta.mix_halves ? 1 : 0);
    w.u8(std::uint8_t(he.backend));
    w.u64(he.plaintext_modulus);
    w.u32(he.ring_degree);
    w.u32(he.log2_q);
    w.u32(he.decomp_log2w);
    w.f64(he.error_stddev);
}

// Reconstructs and validates both parameter sets; hostile values surface as
// BadParams from the underlying constructors.
std::pair<PastaParams, HeParams> get_params(ByteReader& r) {
    const std::uint64_t p = r.u64();
    const std::uint32_t t = r.u32();
    const std::uint32_t rounds = r.u32();
    const std::uint8_t mix = r.u8();
    if (mix > 1) throw BadParams("mix flag must be 0 or 1");
    PastaParams pasta(PrimeModulus(p), t, rounds, mix == 1);

    HeParams he;
    const std::uint8_t backend = r.u8();
    if (backend > std::uint8_t(HeBackend::BfvToy)) throw BadParams("unknown HE backend");
    he.backend = HeBackend(backend);
    he.plaintext_modulus = r.u64();
    he.ring_degree = r.u32();
    he.log2_q = r.u32();
    he.decomp_log2w = r.u32();
    he.error_stddev = r.f64();
    he.validate();
    if (he.plaintext_modulus != p)
        throw ParamsMismatch("HE plaintext space does not match the cipher field");
    return {pasta, he};
}

void expect_consumed(const ByteReader& r, const char* what) {
    if (r.remaining() != 0)
        throw TruncatedFrame(std::string(what) + ": trailing bytes in payload");
}

WireFrame make_frame(MsgType type, ByteWriter&& w) {
    return {type, std::move(w).take()};
}

} // namespace

bool is_known_msg_type(std::uint8_t t) {
    return (t >= 0x01 && t <= 0x06) || t == 0x7F;
}

std::vector<std::uint8_t> encode_frame(const WireFrame& frame) {
    if (frame.payload.size() > kMaxPayload)
        throw OversizedFrame("frame payload exceeds the 2^28-byte cap");
    ByteWriter w;
    w.bytes(kMagic);
    w.u8(kWireVersion);
    w.u8(std::uint8_t(frame.type));
    w.u32(std::uint32_t(frame.payload.size()));
    w.bytes(frame.payload);
    return w.take();
}

std::size_t decode_frame_header(std::span<const std::uint8_t> header, MsgType& type) {
    if (header.size() < kFrameHeaderBytes)
        throw TruncatedFrame("frame header needs 10 bytes");
    ByteReader r(header.subspan(0, kFrameHeaderBytes));
    const auto magic = r.take(4);
    for (std::size_t i = 0; i < 4; ++i)
        if (magic[i] != kMagic[i]) throw BadMagic("frame does not start with HHEM");
    const std::uint8_t version = r.u8();
    if (version != kWireVersion)
        throw BadVersion("unsupported wire version " + std::to_string(version));
    const std::uint8_t raw_type = r.u8();
    if (!is_known_msg_type(raw_type))
        throw UnknownType("unknown message type " + std::to_string(raw_type));
    type = MsgType(raw_type);
    const std::uint32_t len = r.u32();
    if (len > kMaxPayload) throw OversizedFrame("declared payload exceeds the cap");
    return len;
}

WireFrame decode_frame(std::span<const std::uint8_t> bytes) {
    WireFrame frame;
    const std::size_t len = decode_frame_header(bytes, frame.type);
    if (bytes.size() < kFrameHeaderBytes + len)
        throw TruncatedFrame("frame shorter than its declared payload");
    if (bytes.size() > kFrameHeaderBytes + len)
        throw TruncatedFrame("frame longer than its declared payload");
    const auto payload = bytes.subspan(kFrameHeaderBytes, len);
    frame.payload.assign(payload.begin(), payload.end());
    return frame;
}

WireFrame encode_client_hello(const ClientHello& m) {
    ByteWriter w;
    put_params(w, m.pasta, m.he);
    return make_frame(MsgType::ClientHello, std::move(w));
}

ClientHello decode_client_hello(std::span<const std::uint8_t> payload) {
    ByteReader r(payload);
    auto [pasta, he] = get_params(r);
    expect_consumed(r, "ClientHello");
    return {pasta, he};
}

WireFrame encode_server_hello(const ServerHello& m) {
    ByteWriter w;
    w.u8(m.accept ? 1 : 0);
    put_params(w, m.pasta, m.he);
    return make_frame(MsgType::ServerHello, std::move(w));
}

ServerHello decode_server_hello(std::span<const std::uint8_t> payload) {
    ByteReader r(payload);
    const std::uint8_t accept = r.u8();
    if (accept > 1) throw BadParams("accept flag must be 0 or 1");
    auto [pasta, he] = get_params(r);
    expect_consumed(r, "ServerHello");
    return {accept == 1, pasta, he};
}

WireFrame encode_key_provision(const KeyProvision& m) {
    ByteWriter w;
    put_blob(w, serialize_public_material(m.public_material));
    w.u32(std::uint32_t(m.encrypted_key.words.size()));
    for (const auto& ct : m.encrypted_key.words) put_blob(w, serialize_ciphertext(ct));
    return make_frame(MsgType::KeyProvision, std::move(w));
}

KeyProvision decode_key_provision(std::span<const std::uint8_t> payload,
                                  const PastaParams& pasta, const HeParams& he) {
    ByteReader r(payload);
    KeyProvision m{parse_public_material(he, get_blob(r)), {pasta, he, {}}};
    const std::uint32_t count = r.u32();
    if (count != pasta.state_words())
        throw BadKeyLength("encrypted key must hold exactly 2t ciphertexts");
    m.encrypted_key.words.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i)
        m.encrypted_key.words.push_back(parse_ciphertext(he, get_blob(r)));
    expect_consumed(r, "KeyProvision");
    return m;
}

WireFrame encode_data_upload(const DataUpload& m) {
    ByteWriter w;
    w.u64(m.nonce);
    w.u64(m.words.size());
    for (FieldElement word : m.words) {
        if (word > 0xFFFFFFFFull) throw UnreducedWord("stream word exceeds 32 bits");
        w.u32(std::uint32_t(word));
    }
    return make_frame(MsgType::DataUpload, std::move(w));
}

DataUpload decode_data_upload(std::span<const std::uint8_t> payload) {
    ByteReader r(payload);
    DataUpload m;
    m.nonce = r.u64();
    const std::uint64_t count = r.u64();
    if (count > kMaxPayload / 4 || count * 4 != r.remaining())
        throw TruncatedFrame("word count disagrees with the payload size");
    m.words.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) m.words.push_back(r.u32());
    return m;
}

WireFrame encode_infer_request(const InferRequest& m) {
    ByteWriter w;
    w.u64(m.model_id);
    return make_frame(MsgType::InferRequest, std::move(w));
}

InferRequest decode_infer_request(std::span<const std::uint8_t> payload) {
    ByteReader r(payload);
    InferRequest m{r.u64()};
    expect_consumed(r, "InferRequest");
    return m;
}

WireFrame encode_result_ciphertexts(const ResultCiphertexts& m) {
    ByteWriter w;
    w.u32(std::uint32_t(m.scores.size()));
    for (const auto& ct : m.scores) put_blob(w, serialize_ciphertext(ct));
    return make_frame(MsgType::ResultCiphertexts, std::move(w));
}

ResultCiphertexts decode_result_ciphertexts(std::span<const std::uint8_t> payload,
                                            const HeParams& he) {
    ByteReader r(payload);
    ResultCiphertexts m;
    const std::uint32_t count = r.u32();
    if (count > r.remaining() / 4)
        throw TruncatedFrame("ciphertext count disagrees with the payload size");
    m.scores.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i)
        m.scores.push_back(parse_ciphertext(he, get_blob(r)));
    expect_consumed(r, "ResultCiphertexts");
    return m;
}

WireFrame encode_error(const ErrorMsg& m) {
    ByteWriter w;
    w.u8(m.code);
    w.bytes(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(m.reason.data()), m.reason.size()));
    return make_frame(MsgType::Error, std::move(w));
}

ErrorMsg decode_error(std::span<const std::uint8_t> payload) {
    ByteReader r(payload);
    ErrorMsg m;
    m.code = r.u8();
    const auto rest = r.take(r.remaining());
    m.reason.assign(rest.begin(), rest.end());
    return m;
}

} // namespace hheml
