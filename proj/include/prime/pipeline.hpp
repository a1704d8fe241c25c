#ifndef PRIME_PIPELINE_HPP
#define PRIME_PIPELINE_HPP

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "prime/dram_stage.hpp"
#include "prime/export_router.hpp"
#include "prime/flow.hpp"
#include "prime/metrics.hpp"
#include "prime/sram_cache.hpp"
#include "prime/turboflow.hpp"

namespace prime {

enum class Policy { Prime, Turboflow };

inline const char* policy_name(Policy p) {
    return p == Policy::Prime ? "prime" : "turboflow";
}

inline Policy parse_policy(const std::string& s) {
    if (s == "prime") return Policy::Prime;
    if (s == "turboflow") return Policy::Turboflow;
    throw std::invalid_argument("unknown policy \"" + s + "\"");
}

// Per-component hash seeds, all derived from one master seed so a run is
// reproducible from (trace, master seed, config) alone.
struct SeedSet {
    std::vector<std::uint64_t> sram;
    std::vector<std::uint64_t> bloom;
    std::uint64_t aggre = 0;
    std::uint64_t baseline = 0;
};

inline SeedSet derive_seeds(std::uint64_t master, std::uint32_t d,
                            std::uint32_t bloom_hashes) {
    SeedSet s;
    std::uint64_t state = master;
    for (std::uint32_t i = 0; i < d; ++i) {
        std::uint64_t v = splitmix64(state);
        while (std::find(s.sram.begin(), s.sram.end(), v) != s.sram.end())
            v = splitmix64(state);  // table seeds must be pairwise distinct
        s.sram.push_back(v);
    }
    for (std::uint32_t i = 0; i < bloom_hashes; ++i) s.bloom.push_back(splitmix64(state));
    s.aggre = splitmix64(state);
    s.baseline = splitmix64(state);
    return s;
}

struct PipelineConfig {
    std::uint64_t memory_bytes = 500'000;
    std::uint32_t tfr_bytes = 71;
    std::uint32_t d = 3;
    std::uint64_t bloom_bits = 8'000'000;
    std::uint32_t bloom_hashes = 5;
    std::size_t buffer_capacity = 64;
    std::uint64_t aggre_slots = 1ULL << 20;
    std::uint64_t master_seed = 1;
    Policy policy = Policy::Prime;
};

struct PipelineResult {
    std::vector<Tfr> final_records;
    std::uint64_t m = 0;   // evictions
    std::uint64_t n = 0;   // packets
    std::uint64_t m0 = 0;  // records inserted one by one on the DRAM side
    std::uint64_t dram_op_count = 0;
    std::uint64_t routed_existing = 0;
    std::uint64_t routed_new = 0;
    double bloom_fpr_estimate = 0.0;
};

namespace detail {

template <typename Table>
PipelineResult run_with_table(Table& table, const std::vector<PacketRecord>& packets,
                              ExportRouter& router, DramStage& dram) {
    for (const PacketRecord& pkt : packets) {
        ProcessOutcome out = table.process_packet(pkt);
        if (out.kind != OutcomeKind::Evicted) continue;
        if (auto batch = router.route(*out.evicted)) dram.handle_batch(*batch);
    }
    // End-of-run drain: resident records go through the same routing path,
    // then both buffers are flushed downstream.
    for (const Tfr& rec : table.flush())
        if (auto batch = router.route(rec)) dram.handle_batch(*batch);
    for (const Batch& batch : router.flush()) dram.handle_batch(batch);

    PipelineResult r;
    r.final_records = dram.finalize();
    r.m = table.eviction_count();
    r.n = table.packet_count();
    r.m0 = dram.inserted_one_by_one();
    r.dram_op_count = dram.dram_op_count();
    r.routed_existing = router.routed_existing();
    r.routed_new = router.routed_new();
    r.bloom_fpr_estimate = router.fpr_estimate();
    return r;
}

}  // namespace detail

// Streams a trace through the configured fast-table policy, the export
// router, and the DRAM stage, including the end-of-run drain.
inline PipelineResult run_pipeline(const std::vector<PacketRecord>& packets,
                                   const PipelineConfig& cfg) {
    const SeedSet seeds = derive_seeds(cfg.master_seed, cfg.d, cfg.bloom_hashes);
    ExportRouter router(RouterConfig{cfg.bloom_bits, seeds.bloom, cfg.buffer_capacity});
    DramStage dram(cfg.aggre_slots, seeds.aggre);

    if (cfg.policy == Policy::Turboflow) {
        TurboflowTable table(cfg.memory_bytes, cfg.tfr_bytes, seeds.baseline);
        return detail::run_with_table(table, packets, router, dram);
    }
    SramTable table(SramConfig{cfg.memory_bytes, cfg.tfr_bytes, cfg.d, seeds.sram});
    return detail::run_with_table(table, packets, router, dram);
}

// Assembles the flat report; rates come straight from the counters and the
// oracle. ts is the caller's wall-clock string ("" to suppress).
inline RunReport make_report(const PipelineConfig& cfg, const PipelineResult& res,
                             const Oracle& oracle, const std::string& trace_name,
                             const std::string& ts) {
    RunReport rep;
    rep.ts = ts;
    rep.trace = trace_name;
    rep.policy = policy_name(cfg.policy);
    rep.memory_bytes = cfg.memory_bytes;
    rep.d = cfg.policy == Policy::Turboflow ? 1 : cfg.d;
    rep.m = res.m;
    rep.n = res.n;
    rep.m0 = res.m0;
    rep.k = res.final_records.size();
    rep.k0 = oracle.distinct_flows();
    rep.eviction_rate = eviction_rate(res.m, res.n);
    rep.aggregation_rate = aggregation_rate(res.m0, res.n);
    rep.redundancy = redundancy(res.final_records, oracle);
    rep.dram_op_count = res.dram_op_count;
    rep.seed = cfg.master_seed;
    return rep;
}

}  // namespace prime

#endif  // PRIME_PIPELINE_HPP
