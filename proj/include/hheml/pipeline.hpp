#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace hheml {

/// Client-side keystream pipeline geometry: k XOF units run permutation
/// rounds in lockstep slots, fed round-robin by a central scheduler.
struct PipelineConfig {
    std::uint32_t xof_units = 1;
    double per_round_latency_us = 66.1; // measured single-round latency
    std::uint32_t words_per_block = 17;

    void validate() const; // throws BadParams
};

struct WorkloadSpec {
    std::uint64_t total_words = 784; // one MNIST image as 32-bit words
};

/// One trace row: `unit` works on `block` during `slot`.
struct TraceEntry {
    std::uint64_t slot = 0;
    std::uint32_t unit = 0;
    std::uint64_t block = 0;

    bool operator==(const TraceEntry&) const = default;
};

struct SimReport {
    std::uint32_t xof_units = 1;
    std::uint64_t blocks = 0;
    std::uint64_t round_slots = 0;   // makespan in per-round units
    double latency_us = 0.0;         // round_slots * per_round_latency_us
    double relative_throughput = 1.0; // single-unit slots / round_slots
    std::vector<TraceEntry> trace;   // in block order (= output order)
};

/// ceil(total_words / words_per_block).
std::uint64_t blocks_needed(const WorkloadSpec& workload, const PipelineConfig& config);

/// Slot-synchronous round-robin schedule: block b runs on unit b mod k in
/// slot floor(b / k); the trace preserves block order, matching the ordered
/// output reassembly of the hardware scheduler.
SimReport schedule(const PipelineConfig& config, const WorkloadSpec& workload);

/// One report per unit count at a fixed per-round latency; the k=1 entry is
/// every report's throughput baseline.
std::vector<SimReport> compare_configs(const WorkloadSpec& workload, double latency_us,
                                       std::span<const std::uint32_t> unit_counts);

} // namespace hheml
