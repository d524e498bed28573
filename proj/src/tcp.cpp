#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <optional>
#include <string>

#include "hheml/errors.hpp"
#include "hheml/protocol.hpp"

namespace hheml {

namespace {

[[noreturn]] void throw_errno(const std::string& what) {
    throw IoError(what + ": " + std::strerror(errno));
}

void set_socket_timeout(int fd, std::chrono::milliseconds timeout) {
    timeval tv{};
    tv.tv_sec = timeout.count() / 1000;
    tv.tv_usec = (timeout.count() % 1000) * 1000;
    setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

void send_all(int fd, std::span<const std::uint8_t> bytes) {
    std::size_t off = 0;
    while (off < bytes.size()) {
        const ssize_t n =
            send(fd, bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw_errno("send");
        }
        off += std::size_t(n);
    }
}

void send_frame(int fd, const WireFrame& frame) { send_all(fd, encode_frame(frame)); }

/// Reads exactly `want` bytes. Returns false on clean EOF before the first
/// byte when `eof_ok`; anything else incomplete is an error.
bool recv_exact(int fd, std::uint8_t* out, std::size_t want, bool eof_ok) {
    std::size_t off = 0;
    while (off < want) {
        const ssize_t n = recv(fd, out + off, want - off, 0);
        if (n == 0) {
            if (off == 0 && eof_ok) return false;
            throw TruncatedFrame("connection closed mid-frame");
        }
        if (n < 0) {
            if (errno == EINTR) continue;
            if (errno == EAGAIN || errno == EWOULDBLOCK)
                throw SessionTimeout("no frame within the phase timeout");
            throw_errno("recv");
        }
        off += std::size_t(n);
    }
    return true;
}

/// Reads one frame; nullopt on clean end-of-stream at a frame boundary.
std::optional<WireFrame> read_frame(int fd) {
    std::uint8_t header[kFrameHeaderBytes];
    if (!recv_exact(fd, header, sizeof header, /*eof_ok=*/true)) return std::nullopt;

    WireFrame frame;
    const std::size_t len = decode_frame_header({header, sizeof header}, frame.type);
    frame.payload.resize(len);
    if (len > 0) recv_exact(fd, frame.payload.data(), len, /*eof_ok=*/false);
    return frame;
}

/// The reply the client is actually waiting on; Error frames become typed
/// exceptions, anything off-script is a session error too.
WireFrame expect_reply(int fd, MsgType want) {
    auto frame = read_frame(fd);
    if (!frame) throw SessionError(kErrInternal, "server closed without replying");
    if (frame->type == MsgType::Error) {
        const auto err = decode_error(frame->payload);
        throw SessionError(err.code, err.reason);
    }
    if (frame->type != want)
        throw SessionError(kErrInternal, "unexpected reply type from server");
    return *frame;
}

struct FdCloser {
    int fd;
    ~FdCloser() {
        if (fd >= 0) close(fd);
    }
};

int connect_to(const std::string& host, std::uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* results = nullptr;
    const int rc = getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints,
                               &results);
    if (rc != 0) throw IoError("resolve " + host + ": " + gai_strerror(rc));

    int fd = -1;
    for (addrinfo* ai = results; ai; ai = ai->ai_next) {
        fd = socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        if (connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        close(fd);
        fd = -1;
    }
    freeaddrinfo(results);
    if (fd < 0) throw IoError("connect to " + host + ":" + std::to_string(port) +
                              " failed");
    return fd;
}

} // namespace

std::vector<FieldElement> client_session(const std::string& host, std::uint16_t port,
                                         const ClientRequest& request,
                                         std::chrono::milliseconds phase_timeout) {
    FdCloser conn{connect_to(host, port)};
    set_socket_timeout(conn.fd, phase_timeout);

    send_frame(conn.fd, encode_client_hello({request.pasta, request.he}));
    const auto hello_reply = expect_reply(conn.fd, MsgType::ServerHello);
    const auto server_hello = decode_server_hello(hello_reply.payload);
    if (!server_hello.accept)
        throw SessionError(kErrInternal, "server declined the offered parameters");
    if (!(server_hello.pasta == request.pasta) || !(server_hello.he == request.he))
        throw ParamsMismatch("server echoed different parameters");

    XofStream enc_rng("HHEML-CLIENT-ENC", {request.encryption_seed, 0});
    KeyProvision provision{request.he_keys.pk,
                           encrypt_pasta_key(request.pasta, request.pasta_key,
                                             request.he_keys.pk, enc_rng)};
    const auto sym = encrypt(request.pasta_key, request.nonce, request.message,
                             request.pasta);
    try {
        send_frame(conn.fd, encode_key_provision(provision));
        send_frame(conn.fd, encode_data_upload({sym.nonce, sym.words}));
        send_frame(conn.fd, encode_infer_request({request.model_id}));
    } catch (const IoError&) {
        // The server may already have answered with an Error frame and hung
        // up; prefer surfacing that over the broken-pipe symptom.
        expect_reply(conn.fd, MsgType::ResultCiphertexts);
        throw;
    }

    const auto result_frame = expect_reply(conn.fd, MsgType::ResultCiphertexts);
    const auto results = decode_result_ciphertexts(result_frame.payload, request.he);

    std::vector<FieldElement> scores;
    scores.reserve(results.scores.size());
    for (const auto& ct : results.scores)
        scores.push_back(he_decrypt(request.he_keys.sk, ct));
    return scores;
}

Server::Server(std::uint16_t port, ModelStore models, ServerPolicy policy)
    : models_(std::move(models)), policy_(policy) {
    listen_fd_ = socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw_errno("socket");

    const int one = 1;
    setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(port);
    if (bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        const int saved = errno;
        close(listen_fd_);
        listen_fd_ = -1;
        errno = saved;
        throw_errno("bind port " + std::to_string(port));
    }
    if (listen(listen_fd_, 16) != 0) {
        close(listen_fd_);
        listen_fd_ = -1;
        throw_errno("listen");
    }

    socklen_t len = sizeof addr;
    getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

Server::~Server() {
    stop();
    if (listen_fd_ >= 0) close(listen_fd_);
}

void Server::stop() {
    stopping_.store(true);
    if (listen_fd_ >= 0) shutdown(listen_fd_, SHUT_RDWR); // unblocks accept()
}

void Server::run() {
    while (!stopping_.load()) {
        const int conn = accept(listen_fd_, nullptr, nullptr);
        if (conn < 0) {
            if (errno == EINTR) continue;
            break; // listener shut down
        }
        serve_connection(conn);
        close(conn);
    }
}

void Server::serve_connection(int fd) {
    set_socket_timeout(fd, std::chrono::seconds(30));
    ServerSession session(models_, policy_);
    try {
        while (!session.finished()) {
            auto frame = read_frame(fd);
            if (!frame) return; // client hung up between messages
            if (auto reply = session.handle(*frame)) send_frame(fd, *reply);
        }
    } catch (const Error& e) {
        // Typed failure mid-session (malformed payload, noise overflow, ...).
        // Error reasons are static descriptions and carry no session data.
        try {
            send_frame(fd, encode_error({kErrInternal, e.what()}));
        } catch (const Error&) {
            // peer already gone; nothing left to tell them
        }
    }
}

} // namespace hheml
