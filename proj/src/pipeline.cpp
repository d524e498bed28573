#include "hheml/pipeline.hpp"

#include "hheml/errors.hpp"

namespace hheml {

void PipelineConfig::validate() const {
    if (xof_units < 1) throw BadParams("pipeline needs at least one XOF unit");
    if (!(per_round_latency_us > 0.0)) throw BadParams("per-round latency must be positive");
    if (words_per_block < 1) throw BadParams("block size must be at least one word");
}

std::uint64_t blocks_needed(const WorkloadSpec& workload, const PipelineConfig& config) {
    config.validate();
    return (workload.total_words + config.words_per_block - 1) / config.words_per_block;
}

SimReport schedule(const PipelineConfig& config, const WorkloadSpec& workload) {
    config.validate();
    SimReport report;
    report.xof_units = config.xof_units;
    report.blocks = blocks_needed(workload, config);

    const std::uint64_t k = config.xof_units;
    report.round_slots = (report.blocks + k - 1) / k;
    report.latency_us = double(report.round_slots) * config.per_round_latency_us;
    // k=1 finishes in exactly `blocks` slots, so that is the baseline.
    report.relative_throughput =
        report.blocks == 0 ? 1.0 : double(report.blocks) / double(report.round_slots);

    report.trace.reserve(report.blocks);
    for (std::uint64_t b = 0; b < report.blocks; ++b)
        report.trace.push_back({b / k, std::uint32_t(b % k), b});
    return report;
}

std::vector<SimReport> compare_configs(const WorkloadSpec& workload, double latency_us,
                                       std::span<const std::uint32_t> unit_counts) {
    if (unit_counts.empty()) throw BadParams("no unit counts to compare");
    std::vector<SimReport> table;
    table.reserve(unit_counts.size());
    for (std::uint32_t k : unit_counts) {
        PipelineConfig config;
        config.xof_units = k;
        config.per_round_latency_us = latency_us;
        table.push_back(schedule(config, workload));
    }
    return table;
}

} // namespace hheml
