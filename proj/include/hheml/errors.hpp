#pragma once

#include <stdexcept>
#include <string>

namespace hheml {

/// Base class of every error thrown by this library. Catching hheml::Error
/// is guaranteed to cover all failure modes short of std::bad_alloc.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define HHEML_DEFINE_ERROR(Name)                                               \
    class Name : public Error {                                                \
    public:                                                                    \
        using Error::Error;                                                    \
    }

// field / sampling
HHEML_DEFINE_ERROR(BadParams);
HHEML_DEFINE_ERROR(ZeroInverse);
HHEML_DEFINE_ERROR(SamplingStall);

// xof
HHEML_DEFINE_ERROR(BadTag);

// pasta
HHEML_DEFINE_ERROR(DimensionMismatch);
HHEML_DEFINE_ERROR(UnreducedWord);

// aes
HHEML_DEFINE_ERROR(BadKeyLength);

// he backend
HHEML_DEFINE_ERROR(ParamsMismatch);
HHEML_DEFINE_ERROR(NoiseOverflow);

// wire / protocol
class WireError : public Error {
public:
    using Error::Error;
};

#define HHEML_DEFINE_WIRE_ERROR(Name)                                          \
    class Name : public WireError {                                            \
    public:                                                                    \
        using WireError::WireError;                                            \
    }

HHEML_DEFINE_WIRE_ERROR(BadMagic);
HHEML_DEFINE_WIRE_ERROR(BadVersion);
HHEML_DEFINE_WIRE_ERROR(TruncatedFrame);
HHEML_DEFINE_WIRE_ERROR(OversizedFrame);
HHEML_DEFINE_WIRE_ERROR(UnknownType);

// cli / files
HHEML_DEFINE_ERROR(BadHeader);
HHEML_DEFINE_ERROR(BadProfile);
HHEML_DEFINE_ERROR(IoError);

// sessions
HHEML_DEFINE_ERROR(SessionTimeout);

/// A protocol Error frame received from the peer, surfaced with its code.
class SessionError : public Error {
public:
    SessionError(uint8_t code, const std::string& reason)
        : Error("peer error 0x" + to_hex(code) + ": " + reason), code_(code) {}

    uint8_t code() const { return code_; }

private:
    static std::string to_hex(uint8_t c) {
        static const char* digits = "0123456789abcdef";
        return {digits[c >> 4], digits[c & 0xf]};
    }
    uint8_t code_;
};

#undef HHEML_DEFINE_ERROR
#undef HHEML_DEFINE_WIRE_ERROR

} // namespace hheml
