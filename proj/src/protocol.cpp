#include "hheml/protocol.hpp"

#include <utility>

#include "hheml/errors.hpp"
#include "hheml/transcipher.hpp"

namespace hheml {

void ModelStore::add(std::uint64_t id, LinearModel model) {
    stored_.insert_or_assign(id, std::move(model));
}

LinearModel ModelStore::get(std::uint64_t id, std::uint32_t features,
                            const PrimeModulus& p) const {
    if (auto it = stored_.find(id); it != stored_.end()) {
        it->second.validate(p.value());
        if (it->second.features != features)
            throw DimensionMismatch("stored model expects a different feature count");
        return it->second;
    }
    return derive_linear_model(classes, features, p, id);
}

bool ServerPolicy::admits(const PastaParams& pasta, const HeParams& he) const {
    return pasta.t <= max_t && pasta.r <= max_r && he.ring_degree <= max_ring_degree &&
           he.log2_q <= max_log2_q;
}

ServerSession::ServerSession(const ModelStore& models, ServerPolicy policy)
    : models_(models), policy_(policy) {}

WireFrame ServerSession::abort_with(std::uint8_t code, const std::string& reason) {
    phase_ = Phase::Done;
    return encode_error({code, reason});
}

std::optional<WireFrame> ServerSession::handle(const WireFrame& frame) {
    const bool legal = (phase_ == Phase::AwaitHello && frame.type == MsgType::ClientHello) ||
                       (phase_ == Phase::AwaitKeys && frame.type == MsgType::KeyProvision) ||
                       (phase_ == Phase::AwaitData && frame.type == MsgType::DataUpload) ||
                       (phase_ == Phase::Evaluating && frame.type == MsgType::InferRequest);
    if (!legal)
        return abort_with(kErrBadPhase,
                          std::string("unexpected message in phase ") + to_string(phase_));

    switch (frame.type) {
    case MsgType::ClientHello: {
        auto hello = decode_client_hello(frame.payload);
        if (!policy_.admits(hello.pasta, hello.he)) {
            phase_ = Phase::Done;
            return encode_server_hello({false, hello.pasta, hello.he});
        }
        hello_ = std::move(hello);
        phase_ = Phase::AwaitKeys;
        return encode_server_hello({true, hello_->pasta, hello_->he});
    }
    case MsgType::KeyProvision: {
        keys_ = decode_key_provision(frame.payload, hello_->pasta, hello_->he);
        phase_ = Phase::AwaitData;
        return std::nullopt;
    }
    case MsgType::DataUpload: {
        auto upload = decode_data_upload(frame.payload);
        if (upload.words.empty())
            return abort_with(kErrEmptyData, "upload carries no words");
        data_ = std::move(upload);
        phase_ = Phase::Evaluating;
        return std::nullopt;
    }
    case MsgType::InferRequest: {
        const auto request = decode_infer_request(frame.payload);
        const PastaParams& pasta = hello_->pasta;

        EncryptedVector features;
        features.reserve(data_->words.size());
        const std::span<const FieldElement> words(data_->words);
        for (std::uint64_t block = 0; block * pasta.t < words.size(); ++block) {
            const std::size_t lo = block * pasta.t;
            const std::size_t len = std::min<std::size_t>(pasta.t, words.size() - lo);
            auto cts = transcipher_block(keys_->encrypted_key, keys_->public_material,
                                         {data_->nonce, block}, words.subspan(lo, len));
            for (auto& ct : cts) features.push_back(std::move(ct));
        }

        const auto model = models_.get(request.model_id,
                                       std::uint32_t(features.size()), pasta.p);
        auto scores = he_linear_model(features, model, keys_->public_material);
        phase_ = Phase::Done;
        return encode_result_ciphertexts({std::move(scores)});
    }
    default: // unreachable: legality filtered above
        return abort_with(kErrBadPhase, "unhandled message type");
    }
}

const char* to_string(ServerSession::Phase phase) {
    switch (phase) {
    case ServerSession::Phase::AwaitHello: return "AwaitHello";
    case ServerSession::Phase::AwaitKeys: return "AwaitKeys";
    case ServerSession::Phase::AwaitData: return "AwaitData";
    case ServerSession::Phase::Evaluating: return "Evaluating";
    case ServerSession::Phase::Done: return "Done";
    }
    return "?";
}

} // namespace hheml
