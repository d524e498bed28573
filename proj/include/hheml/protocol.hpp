#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hheml/wire.hpp"

namespace hheml {

/// Read-only model source shared by all sessions. Explicitly stored models
/// win; otherwise the deterministic XOF-derived model for the id is used, so
/// client and server can agree on weights without shipping them.
class ModelStore {
public:
    ModelStore() = default;

    void add(std::uint64_t id, LinearModel model); // setup-time only
    LinearModel get(std::uint64_t id, std::uint32_t features, const PrimeModulus& p) const;

    std::uint32_t classes = 10;

private:
    std::map<std::uint64_t, LinearModel> stored_;
};

/// Upper bounds the server is willing to evaluate; everything beyond is
/// declined at hello time (a 2t x 2t matrix walk at t = 2^31 would otherwise
/// exhaust memory before any further validity check).
struct ServerPolicy {
    std::uint32_t max_t = 256;
    std::uint32_t max_r = 16;
    std::uint32_t max_ring_degree = 16384;
    std::uint32_t max_log2_q = 1024;

    bool admits(const PastaParams& pasta, const HeParams& he) const;
};

/// One connection's state machine, transport-agnostic: feed inbound frames,
/// get the reply frame. Phases advance AwaitHello -> AwaitKeys -> AwaitData
/// -> Evaluating -> Done; any (phase, msg_type) pair off that path answers
/// Error{BadPhase} and aborts. Holds only material a server may see.
class ServerSession {
public:
    enum class Phase { AwaitHello, AwaitKeys, AwaitData, Evaluating, Done };

    explicit ServerSession(const ModelStore& models, ServerPolicy policy = {});

    /// Handles one frame; returns the reply to send, if the step has one
    /// (ClientHello and InferRequest do, provisioning and upload are silent).
    /// Malformed payloads inside structurally valid frames throw (typed);
    /// transports translate that into an Error frame.
    std::optional<WireFrame> handle(const WireFrame& frame);

    Phase phase() const { return phase_; }
    bool finished() const { return phase_ == Phase::Done; }

private:
    WireFrame abort_with(std::uint8_t code, const std::string& reason);

    const ModelStore& models_;
    ServerPolicy policy_;
    Phase phase_ = Phase::AwaitHello;
    std::optional<ClientHello> hello_;
    std::optional<KeyProvision> keys_;
    std::optional<DataUpload> data_;
};

const char* to_string(ServerSession::Phase phase);

/// Everything the client contributes to one inference exchange.
struct ClientRequest {
    PastaParams pasta;
    HeParams he;
    PastaSecretKey pasta_key;
    HeKeyPair he_keys;
    std::vector<FieldElement> message;
    std::uint64_t nonce = 0;
    std::uint64_t model_id = 0;
    std::uint64_t encryption_seed = 0; // drives the HE encryption randomness
};

/// Runs the whole exchange against a live server and returns the HE-decrypted
/// class scores mod p. Per-phase receive timeout defaults to 30 s
/// (SessionTimeout); server Error frames surface as SessionError.
std::vector<FieldElement> client_session(
    const std::string& host, std::uint16_t port, const ClientRequest& request,
    std::chrono::milliseconds phase_timeout = std::chrono::seconds(30));

/// Accept loop owning a listening socket. Sessions are served sequentially
/// and independently; per-session failures are answered with an Error frame
/// where possible and never stop the loop. Neither key material nor message
/// words are ever logged.
class Server {
public:
    /// Binds and listens; port 0 picks an ephemeral port. Throws IoError.
    Server(std::uint16_t port, ModelStore models, ServerPolicy policy = {});
    ~Server();

    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    std::uint16_t port() const { return port_; }

    /// Blocks serving sessions until stop() is called from another thread.
    void run();
    void stop();

private:
    void serve_connection(int fd);

    ModelStore models_;
    ServerPolicy policy_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
};

} // namespace hheml
