// hheml: operator entry point for the hybrid encrypted-inference stack.
//
//   keygen   write a cipher key + HE key material for a profile
//   encrypt  words file -> HHE1 stream-ciphertext container
//   decrypt  HHE1 container -> words file
//   serve    run the transciphering inference server
//   infer    run one end-to-end client exchange and print scores
//   simulate pipeline round/throughput model
//   bench    raw cipher throughput
//   vectors  emit cross-implementation test vectors
//
// All randomized commands take --seed and are bit-reproducible under it.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hheml/aes.hpp"
#include "hheml/errors.hpp"
#include "hheml/pipeline.hpp"
#include "hheml/protocol.hpp"
#include "hheml/serialize.hpp"

using json = nlohmann::json;
using namespace hheml;

namespace {

// ---- words files and the HHE1 container -------------------------------------

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot create " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) throw IoError("short write to " + path);
}

std::vector<FieldElement> bytes_to_words(const std::vector<std::uint8_t>& bytes,
                                         const std::string& path) {
    if (bytes.size() % 4 != 0)
        throw IoError(path + " is not a whole number of 32-bit words");
    std::vector<FieldElement> words(bytes.size() / 4);
    for (std::size_t i = 0; i < words.size(); ++i)
        words[i] = std::uint64_t(bytes[4 * i]) | std::uint64_t(bytes[4 * i + 1]) << 8 |
                   std::uint64_t(bytes[4 * i + 2]) << 16 |
                   std::uint64_t(bytes[4 * i + 3]) << 24;
    return words;
}

std::vector<std::uint8_t> words_to_bytes(std::span<const FieldElement> words) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(words.size() * 4);
    for (FieldElement w : words)
        for (int i = 0; i < 4; ++i) bytes.push_back(std::uint8_t(w >> (8 * i)));
    return bytes;
}

constexpr char kContainerMagic[4] = {'H', 'H', 'E', '1'};

std::vector<std::uint8_t> encode_container(const PastaParams& params,
                                           const SymCiphertext& ct) {
    ByteWriter w;
    w.bytes(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(kContainerMagic), 4));
    w.u64(params.p.value());
    w.u32(params.t);
    w.u32(params.r);
    w.u64(ct.nonce);
    w.u64(ct.words.size());
    w.bytes(words_to_bytes(ct.words));
    return w.take();
}

SymCiphertext decode_container(const std::vector<std::uint8_t>& bytes,
                               const PastaParams& expect) {
    ByteReader r(bytes);
    const auto magic = r.take(4);
    for (int i = 0; i < 4; ++i)
        if (magic[i] != std::uint8_t(kContainerMagic[i]))
            throw BadHeader("not an HHE1 container");
    const std::uint64_t p = r.u64();
    const std::uint32_t t = r.u32();
    const std::uint32_t rounds = r.u32();
    if (p != expect.p.value() || t != expect.t || rounds != expect.r)
        throw BadHeader("container was written under different cipher parameters");
    SymCiphertext ct;
    ct.nonce = r.u64();
    const std::uint64_t count = r.u64();
    if (count > r.remaining() / 4 || count * 4 != r.remaining())
        throw BadHeader("container word count disagrees with its size");
    ct.words.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) ct.words.push_back(r.u32());
    return ct;
}

// ---- profiles and key directories -------------------------------------------

PastaParams parse_profile(const std::string& name, std::uint64_t p, std::uint32_t t,
                          std::uint32_t r, bool mix) {
    if (name == "pasta4-edge") return PastaParams::pasta4_edge();
    if (name == "pasta3-edge") return PastaParams::pasta3_edge();
    if (name == "custom") return PastaParams(PrimeModulus(p), t, r, mix);
    throw BadProfile("unknown profile '" + name + "' (pasta4-edge|pasta3-edge|custom)");
}

HeBackend parse_backend(const std::string& name) {
    if (name == "bfv-toy") return HeBackend::BfvToy;
    if (name == "transparent") return HeBackend::Transparent;
    throw BadProfile("unknown backend '" + name + "' (bfv-toy|transparent)");
}

json params_to_json(const PastaParams& pasta, const HeParams& he) {
    return json{{"pasta",
                 {{"p", pasta.p.value()},
                  {"t", pasta.t},
                  {"r", pasta.r},
                  {"mix", pasta.mix_halves}}},
                {"he",
                 {{"backend", he.backend == HeBackend::BfvToy ? "bfv-toy" : "transparent"},
                  {"ring_degree", he.ring_degree},
                  {"log2_q", he.log2_q},
                  {"decomp_log2w", he.decomp_log2w},
                  {"error_stddev", he.error_stddev}}}};
}

std::pair<PastaParams, HeParams> params_from_json(const json& j) {
    const auto& jp = j.at("pasta");
    PastaParams pasta(PrimeModulus(jp.at("p").get<std::uint64_t>()),
                      jp.at("t").get<std::uint32_t>(), jp.at("r").get<std::uint32_t>(),
                      jp.at("mix").get<bool>());
    const auto& jh = j.at("he");
    HeParams he;
    he.backend = parse_backend(jh.at("backend").get<std::string>());
    he.plaintext_modulus = pasta.p.value();
    he.ring_degree = jh.at("ring_degree").get<std::uint32_t>();
    he.log2_q = jh.at("log2_q").get<std::uint32_t>();
    he.decomp_log2w = jh.at("decomp_log2w").get<std::uint32_t>();
    he.error_stddev = jh.at("error_stddev").get<double>();
    he.validate();
    return {pasta, he};
}

struct KeyDir {
    PastaParams pasta;
    HeParams he;
    PastaSecretKey pasta_key;
    HeKeyPair he_keys;
};

KeyDir load_key_dir(const std::string& dir) {
    json j;
    {
        std::ifstream in(dir + "/params.json");
        if (!in) throw IoError("cannot open " + dir + "/params.json");
        in >> j;
    }
    auto [pasta, he] = params_from_json(j);

    KeyDir keys{pasta, he, {}, {}};
    keys.pasta_key.words = bytes_to_words(read_file(dir + "/pasta.key"), dir + "/pasta.key");
    if (keys.pasta_key.words.size() != pasta.state_words())
        throw BadKeyLength("pasta.key does not hold 2t words");
    for (FieldElement w : keys.pasta_key.words)
        if (w >= pasta.p.value()) throw UnreducedWord("pasta.key word out of range");

    keys.he_keys.sk = parse_secret_key(he, read_file(dir + "/he_secret.bin"));
    keys.he_keys.pk = parse_public_material(he, read_file(dir + "/he_public.bin"));
    return keys;
}

// ---- port/host resolution ----------------------------------------------------

std::uint16_t resolve_port(const CLI::Option* flag, std::uint16_t flag_value,
                           const std::optional<json>& config) {
    if (flag->count() > 0) return flag_value;
    if (const char* env = std::getenv("HHEML_PORT")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v < 1 || v > 65535) throw BadParams("HHEML_PORT must be 1..65535");
        return std::uint16_t(v);
    }
    if (config && config->contains("port")) return config->at("port").get<std::uint16_t>();
    return kDefaultPort;
}

std::optional<json> load_config(const std::string& path) {
    if (path.empty()) return std::nullopt;
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    json j;
    in >> j;
    return j;
}

// ---- commands ----------------------------------------------------------------

int cmd_keygen(const std::string& profile, std::uint64_t p, std::uint32_t t,
               std::uint32_t r, bool mix, const std::string& backend,
               std::uint32_t ring_degree, std::uint32_t log2_q, std::uint64_t seed,
               const std::string& out_dir) {
    const PastaParams pasta = parse_profile(profile, p, t, r, mix);
    HeParams he = parse_backend(backend) == HeBackend::Transparent
                      ? HeParams::transparent(pasta.p.value())
                      : HeParams::bfv_toy(pasta.p.value());
    if (ring_degree) he.ring_degree = ring_degree;
    if (log2_q) he.log2_q = log2_q;
    he.validate();

    XofStream key_stream("HHEML-KEYGEN-SK", {seed, 0});
    const auto pasta_key = PastaSecretKey::sample(pasta, key_stream);
    const auto he_keys = he_keygen(he, seed);

    std::filesystem::create_directories(out_dir);
    {
        std::ofstream params_out(out_dir + "/params.json");
        if (!params_out) throw IoError("cannot create " + out_dir + "/params.json");
        params_out << params_to_json(pasta, he).dump(2) << "\n";
    }
    write_file(out_dir + "/pasta.key", words_to_bytes(pasta_key.words));
    write_file(out_dir + "/he_secret.bin", serialize_secret_key(he_keys.sk));
    write_file(out_dir + "/he_public.bin", serialize_public_material(he_keys.pk));

    std::printf("keydir %s words %zu backend %s\n", out_dir.c_str(),
                pasta_key.words.size(), backend.c_str());
    return 0;
}

int cmd_encrypt(const std::string& key_dir, const std::string& in_path,
                const std::string& out_path, std::uint64_t nonce) {
    const auto keys = load_key_dir(key_dir);
    const auto words = bytes_to_words(read_file(in_path), in_path);
    for (FieldElement w : words)
        if (w >= keys.pasta.p.value())
            throw UnreducedWord("input word not reduced mod p");
    const auto ct = encrypt(keys.pasta_key, nonce, words, keys.pasta);
    write_file(out_path, encode_container(keys.pasta, ct));
    std::printf("encrypted %zu words nonce %llu -> %s\n", words.size(),
                static_cast<unsigned long long>(nonce), out_path.c_str());
    return 0;
}

int cmd_decrypt(const std::string& key_dir, const std::string& in_path,
                const std::string& out_path) {
    const auto keys = load_key_dir(key_dir);
    const auto ct = decode_container(read_file(in_path), keys.pasta);
    const auto words = decrypt(keys.pasta_key, ct, keys.pasta);
    write_file(out_path, words_to_bytes(words));
    std::printf("decrypted %zu words -> %s\n", words.size(), out_path.c_str());
    return 0;
}

int cmd_serve(const CLI::Option* port_flag, std::uint16_t port_value,
              const std::string& config_path, std::uint32_t classes) {
    const auto config = load_config(config_path);
    const std::uint16_t port = resolve_port(port_flag, port_value, config);

    ModelStore store;
    store.classes = classes ? classes
                            : (config && config->contains("classes")
                                   ? config->at("classes").get<std::uint32_t>()
                                   : 10);
    const std::uint32_t class_count = store.classes;
    Server server(port, std::move(store));
    std::printf("listening port %u classes %u\n", server.port(), class_count);
    std::fflush(stdout);
    server.run();
    return 0;
}

int cmd_infer(const std::string& key_dir, const std::string& in_path,
              const std::string& host, const CLI::Option* port_flag,
              std::uint16_t port_value, const std::string& config_path,
              std::uint64_t nonce, std::uint64_t model_id, std::uint64_t seed,
              const std::string& backend) {
    const auto config = load_config(config_path);
    const std::uint16_t port = resolve_port(port_flag, port_value, config);
    const std::string peer =
        !host.empty() ? host
                      : (config && config->contains("host")
                             ? config->at("host").get<std::string>()
                             : std::string("127.0.0.1"));

    auto keys = load_key_dir(key_dir);
    if (!backend.empty() && parse_backend(backend) != keys.he.backend) {
        // HE keys are per-session material (the public half travels in-band),
        // so switching backend just regenerates them deterministically.
        keys.he = parse_backend(backend) == HeBackend::Transparent
                      ? HeParams::transparent(keys.pasta.p.value())
                      : HeParams::bfv_toy(keys.pasta.p.value());
        keys.he_keys = he_keygen(keys.he, seed);
    }
    ClientRequest request{keys.pasta,
                          keys.he,
                          keys.pasta_key,
                          keys.he_keys,
                          bytes_to_words(read_file(in_path), in_path),
                          nonce,
                          model_id,
                          seed};
    const auto scores = client_session(peer, port, request);

    std::size_t best = 0;
    for (std::size_t c = 0; c < scores.size(); ++c) {
        std::printf("score %zu %llu\n", c, static_cast<unsigned long long>(scores[c]));
        if (scores[c] > scores[best]) best = c;
    }
    std::printf("argmax %zu\n", best);
    return 0;
}

int cmd_simulate(std::uint32_t units, std::uint64_t words, double latency_us,
                 std::uint32_t block_words, const std::string& trace_csv) {
    if (units == 0) throw BadParams("--units must be >= 1");
    std::vector<std::uint32_t> counts;
    for (std::uint32_t k = 1; k <= units; k *= 2) counts.push_back(k);
    if (counts.back() != units) counts.push_back(units);

    const WorkloadSpec workload{words};
    std::printf("units blocks round_slots latency_us throughput\n");
    SimReport last;
    for (std::uint32_t k : counts) {
        PipelineConfig config{k, latency_us, block_words};
        last = schedule(config, workload);
        std::printf("%5u %6llu %11llu %10.1f %9.2fx\n", k,
                    static_cast<unsigned long long>(last.blocks),
                    static_cast<unsigned long long>(last.round_slots), last.latency_us,
                    last.relative_throughput);
    }

    if (!trace_csv.empty()) {
        std::ofstream csv(trace_csv);
        if (!csv) throw IoError("cannot create " + trace_csv);
        csv << "slot,unit,block\n";
        for (const auto& row : last.trace)
            csv << row.slot << "," << row.unit << "," << row.block << "\n";
    }
    return 0;
}

int cmd_bench(const std::string& cipher, std::uint64_t bytes, std::uint64_t seed) {
    using Clock = std::chrono::steady_clock;
    std::printf("cipher bytes seconds per_second unit\n");

    if (cipher == "pasta") {
        const PastaParams params = PastaParams::pasta4_edge();
        XofStream key_stream("HHEML-BENCH", {seed, 0});
        const auto key = PastaSecretKey::sample(params, key_stream);
        std::vector<FieldElement> words(bytes / 4);
        for (std::size_t i = 0; i < words.size(); ++i) words[i] = (seed + i) % 65537;

        const auto start = Clock::now();
        const auto ct = encrypt(key, seed, words, params);
        const double secs = std::chrono::duration<double>(Clock::now() - start).count();
        if (ct.words.size() != words.size()) throw Error("bench ciphertext length");
        std::printf("pasta %llu %.3f %.1f words\n",
                    static_cast<unsigned long long>(bytes), secs,
                    double(words.size()) / secs);
        return 0;
    }
    if (cipher == "aes") {
        aes::Block128 key{}, iv{};
        for (std::size_t i = 0; i < 16; ++i) key[i] = std::uint8_t(seed >> (8 * (i % 8)));
        std::vector<std::uint8_t> data(bytes);
        for (std::size_t i = 0; i < data.size(); ++i) data[i] = std::uint8_t(i);

        const auto start = Clock::now();
        const auto wrapped = aes::ctr_wrap(key, iv, data);
        const double secs = std::chrono::duration<double>(Clock::now() - start).count();
        if (wrapped.size() != data.size()) throw Error("bench ciphertext length");
        std::printf("aes %llu %.3f %.1f blocks\n",
                    static_cast<unsigned long long>(bytes), secs,
                    double((bytes + 15) / 16) / secs);
        return 0;
    }
    throw BadProfile("unknown cipher '" + cipher + "' (pasta|aes)");
}

int cmd_vectors(const std::string& profile, std::uint64_t p, std::uint32_t t,
                std::uint32_t r, bool mix, std::uint32_t count, std::uint64_t seed) {
    const PastaParams params = parse_profile(profile, p, t, r, mix);
    XofStream key_stream("HHEML-VECTORS", {seed, 0});
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto key = PastaSecretKey::sample(params, key_stream);
        std::printf("%s\n", format_test_vector(params, {i, 0}, key).c_str());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hybrid encrypted-inference toolkit"};
    app.require_subcommand(1);

    // shared profile flags (keygen, vectors)
    std::string profile = "pasta4-edge";
    std::uint64_t custom_p = 65537;
    std::uint32_t custom_t = 17, custom_r = 4;
    bool custom_mix = true;
    std::uint64_t seed = 0;

    auto add_profile_flags = [&](CLI::App* cmd) {
        cmd->add_option("--profile", profile, "pasta4-edge|pasta3-edge|custom");
        cmd->add_option("--p", custom_p, "field modulus (custom profile)");
        cmd->add_option("--t", custom_t, "words per half-state (custom profile)");
        cmd->add_option("--r", custom_r, "rounds (custom profile)");
        cmd->add_flag("--mix,!--no-mix", custom_mix, "cross-half mixing");
        cmd->add_option("--seed", seed, "deterministic seed");
    };

    // keygen
    auto* keygen = app.add_subcommand("keygen", "generate cipher + HE keys");
    std::string out_dir = "keys", backend = "bfv-toy";
    std::uint32_t ring_degree = 0, log2_q = 0;
    add_profile_flags(keygen);
    keygen->add_option("--out", out_dir, "output key directory");
    keygen->add_option("--backend", backend, "bfv-toy|transparent");
    keygen->add_option("--ring-degree", ring_degree, "override HE ring degree");
    keygen->add_option("--log2-q", log2_q, "override HE modulus bits");

    // encrypt / decrypt
    auto* enc = app.add_subcommand("encrypt", "words file -> HHE1 container");
    std::string key_dir = "keys", in_path, out_path;
    std::uint64_t nonce = 0;
    enc->add_option("--key", key_dir, "key directory");
    enc->add_option("--in", in_path, "input words file")->required();
    enc->add_option("--out", out_path, "output container")->required();
    enc->add_option("--nonce", nonce, "stream nonce");

    auto* dec = app.add_subcommand("decrypt", "HHE1 container -> words file");
    dec->add_option("--key", key_dir, "key directory");
    dec->add_option("--in", in_path, "input container")->required();
    dec->add_option("--out", out_path, "output words file")->required();

    // serve / infer
    auto* serve = app.add_subcommand("serve", "run the inference server");
    std::uint16_t port = kDefaultPort;
    std::string config_path, host;
    std::uint32_t classes = 0;
    auto* serve_port = serve->add_option("--port", port, "listening port");
    serve->add_option("--config", config_path, "JSON config file");
    serve->add_option("--classes", classes, "model class count");

    auto* infer = app.add_subcommand("infer", "end-to-end encrypted inference");
    std::uint64_t model_id = 0;
    std::string infer_backend;
    infer->add_option("--key", key_dir, "key directory");
    infer->add_option("--in", in_path, "input words file")->required();
    infer->add_option("--host", host, "server host");
    auto* infer_port = infer->add_option("--port", port, "server port");
    infer->add_option("--config", config_path, "JSON config file");
    infer->add_option("--nonce", nonce, "stream nonce");
    infer->add_option("--model-id", model_id, "model identifier");
    infer->add_option("--seed", seed, "HE encryption randomness seed");
    infer->add_option("--backend", infer_backend,
                      "bfv-toy|transparent (default: the key directory's)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "XOF pipeline model");
    std::uint32_t units = 2, block_words = 17;
    std::uint64_t sim_words = 784;
    double latency_us = 66.1;
    std::string trace_csv;
    sim->add_option("--units", units, "XOF unit count");
    sim->add_option("--words", sim_words, "workload words");
    sim->add_option("--latency-us", latency_us, "per-round latency");
    sim->add_option("--block-words", block_words, "words per block");
    sim->add_option("--trace-csv", trace_csv, "write the schedule trace");

    // bench
    auto* bench = app.add_subcommand("bench", "cipher throughput");
    std::string bench_cipher = "pasta";
    std::uint64_t bench_bytes = 1000000;
    bench->add_option("--cipher", bench_cipher, "pasta|aes");
    bench->add_option("--bytes", bench_bytes, "input size");
    bench->add_option("--seed", seed, "deterministic seed");

    // vectors
    auto* vectors = app.add_subcommand("vectors", "emit test vectors");
    std::uint32_t vector_count = 10;
    add_profile_flags(vectors);
    vectors->add_option("--count", vector_count, "number of vectors");

    CLI11_PARSE(app, argc, argv);

    try {
        if (keygen->parsed())
            return cmd_keygen(profile, custom_p, custom_t, custom_r, custom_mix, backend,
                              ring_degree, log2_q, seed, out_dir);
        if (enc->parsed()) return cmd_encrypt(key_dir, in_path, out_path, nonce);
        if (dec->parsed()) return cmd_decrypt(key_dir, in_path, out_path);
        if (serve->parsed()) return cmd_serve(serve_port, port, config_path, classes);
        if (infer->parsed())
            return cmd_infer(key_dir, in_path, host, infer_port, port, config_path, nonce,
                             model_id, seed, infer_backend);
        if (sim->parsed())
            return cmd_simulate(units, sim_words, latency_us, block_words, trace_csv);
        if (bench->parsed()) return cmd_bench(bench_cipher, bench_bytes, seed);
        if (vectors->parsed())
            return cmd_vectors(profile, custom_p, custom_t, custom_r, custom_mix,
                               vector_count, seed);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const json::exception& e) {
        std::fprintf(stderr, "error: bad config: %s\n", e.what());
        return 1;
    }
    return 1;
}
