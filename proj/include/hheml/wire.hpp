#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hheml/he.hpp"
#include "hheml/pasta.hpp"
#include "hheml/transcipher.hpp"

namespace hheml {

// Frame layout: "HHEM" | version 0x01 | msg_type | payload_len u32 LE | payload.
inline constexpr std::uint8_t kWireVersion = 0x01;
inline constexpr std::size_t kFrameHeaderBytes = 10;
inline constexpr std::size_t kMaxPayload = std::size_t{1} << 28; // hostile-length guard
inline constexpr std::uint16_t kDefaultPort = 45117;

enum class MsgType : std::uint8_t {
    ClientHello = 0x01,
    ServerHello = 0x02,
    KeyProvision = 0x03,
    DataUpload = 0x04,
    InferRequest = 0x05,
    ResultCiphertexts = 0x06,
    Error = 0x7F,
};

bool is_known_msg_type(std::uint8_t t);

// Session-level error codes carried by Error frames.
inline constexpr std::uint8_t kErrInternal = 0x01;
inline constexpr std::uint8_t kErrBadPhase = 0x02;
inline constexpr std::uint8_t kErrEmptyData = 0x03;

struct WireFrame {
    MsgType type = MsgType::Error;
    std::vector<std::uint8_t> payload;

    bool operator==(const WireFrame&) const = default;
};

/// Serializes header + payload. Throws OversizedFrame beyond the cap.
std::vector<std::uint8_t> encode_frame(const WireFrame& frame);

/// Parses one complete frame occupying the whole buffer. Typed errors:
/// BadMagic, BadVersion, UnknownType, OversizedFrame, TruncatedFrame.
WireFrame decode_frame(std::span<const std::uint8_t> bytes);

/// Validates a frame header and returns the payload length still to read
/// (for stream transports that read the header first).
std::size_t decode_frame_header(std::span<const std::uint8_t> header, MsgType& type);

// ---- message bodies ---------------------------------------------------------
// All integers little-endian; field elements are 4-byte words; HE blobs are
// u32-length-prefixed byte arrays produced by the HE serialization.

struct ClientHello {
    PastaParams pasta;
    HeParams he;
};

struct ServerHello {
    bool accept = false;
    PastaParams pasta;
    HeParams he;
};

struct KeyProvision {
    HePublicMaterial public_material;
    EncryptedPastaKey encrypted_key;
};

struct DataUpload {
    std::uint64_t nonce = 0;
    std::vector<FieldElement> words; // stream-ciphertext words, not plaintext
};

struct InferRequest {
    std::uint64_t model_id = 0;
};

struct ResultCiphertexts {
    std::vector<HeCiphertext> scores;
};

struct ErrorMsg {
    std::uint8_t code = kErrInternal;
    std::string reason;
};

WireFrame encode_client_hello(const ClientHello& m);
WireFrame encode_server_hello(const ServerHello& m);
WireFrame encode_key_provision(const KeyProvision& m);
WireFrame encode_data_upload(const DataUpload& m);
WireFrame encode_infer_request(const InferRequest& m);
WireFrame encode_result_ciphertexts(const ResultCiphertexts& m);
WireFrame encode_error(const ErrorMsg& m);

ClientHello decode_client_hello(std::span<const std::uint8_t> payload);
ServerHello decode_server_hello(std::span<const std::uint8_t> payload);
/// Needs the hello-negotiated parameters to rebuild ciphertexts.
KeyProvision decode_key_provision(std::span<const std::uint8_t> payload,
                                  const PastaParams& pasta, const HeParams& he);
DataUpload decode_data_upload(std::span<const std::uint8_t> payload);
InferRequest decode_infer_request(std::span<const std::uint8_t> payload);
ResultCiphertexts decode_result_ciphertexts(std::span<const std::uint8_t> payload,
                                            const HeParams& he);
ErrorMsg decode_error(std::span<const std::uint8_t> payload);

} // namespace hheml
