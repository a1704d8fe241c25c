#ifndef PRIME_METRICS_HPP
#define PRIME_METRICS_HPP

#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "prime/flow.hpp"

namespace prime {

struct ZeroPackets : std::domain_error {
    ZeroPackets() : std::domain_error("metrics: zero packets processed") {}
};

struct EmptyRun : std::domain_error {
    EmptyRun() : std::domain_error("metrics: run produced no records") {}
};

// Exact ground truth for a trace: per-flow packet counts.
struct Oracle {
    std::unordered_map<FlowKey, std::uint64_t, FlowKeyHash> counts;
    std::uint64_t total_packets = 0;

    std::uint64_t distinct_flows() const { return counts.size(); }
};

inline Oracle build_oracle(const std::vector<PacketRecord>& packets) {
    Oracle o;
    o.counts.reserve(packets.size() / 4 + 16);
    for (const PacketRecord& p : packets) ++o.counts[p.key];
    o.total_packets = packets.size();
    return o;
}

// Evicted records per processed packet.
inline double eviction_rate(std::uint64_t m, std::uint64_t n) {
    if (n == 0) throw ZeroPackets();
    return static_cast<double>(m) / static_cast<double>(n);
}

// One-by-one aggregator insertions per processed packet.
inline double aggregation_rate(std::uint64_t m0, std::uint64_t n) {
    if (n == 0) throw ZeroPackets();
    return static_cast<double>(m0) / static_cast<double>(n);
}

// Fraction of final records that duplicate an already-represented flow:
// (k - k0) / k with k the final record count and k0 the true flow count.
inline double redundancy(const std::vector<Tfr>& final_records, const Oracle& oracle) {
    const std::uint64_t k = final_records.size();
    if (k == 0) throw EmptyRun();
    const std::uint64_t k0 = oracle.distinct_flows();
    return static_cast<double>(k - k0) / static_cast<double>(k);
}

struct ConservationReport {
    bool ok = false;
    std::optional<FlowKey> first_mismatch;
    std::string detail;
};

// Exact end-to-end check: grouping the final records by flow and summing
// counts must reproduce the oracle map, flow for flow.
inline ConservationReport verify_conservation(const std::vector<Tfr>& final_records,
                                              const Oracle& oracle) {
    std::unordered_map<FlowKey, std::uint64_t, FlowKeyHash> grouped;
    grouped.reserve(oracle.counts.size());
    for (const Tfr& r : final_records) grouped[r.key] += r.count;

    char buf[160];
    for (const Tfr& r : final_records) {  // record order keeps the diff deterministic
        auto it = oracle.counts.find(r.key);
        const std::uint64_t want = it == oracle.counts.end() ? 0 : it->second;
        const std::uint64_t got = grouped[r.key];
        if (want != got) {
            std::snprintf(buf, sizeof buf,
                          "flow %08x->%08x %u->%u proto %u: recorded %llu packets, trace has %llu",
                          r.key.src_ip, r.key.dst_ip, r.key.src_port, r.key.dst_port,
                          r.key.protocol, static_cast<unsigned long long>(got),
                          static_cast<unsigned long long>(want));
            return {false, r.key, buf};
        }
    }
    if (grouped.size() != oracle.counts.size()) {
        for (const auto& [key, want] : oracle.counts) {
            if (grouped.find(key) == grouped.end()) {
                std::snprintf(buf, sizeof buf,
                              "flow %08x->%08x %u->%u proto %u: missing from final records "
                              "(trace has %llu packets)",
                              key.src_ip, key.dst_ip, key.src_port, key.dst_port,
                              key.protocol, static_cast<unsigned long long>(want));
                return {false, key, buf};
            }
        }
    }
    return {true, std::nullopt, "per-flow counts match the trace exactly"};
}

// One finished run, flattened for the JSON/CSV report formats.
struct RunReport {
    std::string ts;      // wall-clock run time; empty when suppressed
    std::string trace;   // trace path or synthetic description
    std::string policy;  // "prime" or "turboflow"
    std::uint64_t memory_bytes = 0;
    std::uint32_t d = 0;
    std::uint64_t m = 0;   // evictions
    std::uint64_t n = 0;   // packets
    std::uint64_t m0 = 0;  // one-by-one aggregator insertions
    std::uint64_t k = 0;   // final records
    std::uint64_t k0 = 0;  // true flows
    double eviction_rate = 0.0;
    double aggregation_rate = 0.0;
    double redundancy = 0.0;
    std::uint64_t dram_op_count = 0;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const {
        nlohmann::json j{
            {"trace", trace},
            {"policy", policy},
            {"memory_bytes", memory_bytes},
            {"d", d},
            {"m", m},
            {"n", n},
            {"m0", m0},
            {"k", k},
            {"k0", k0},
            {"eviction_rate", eviction_rate},
            {"aggregation_rate", aggregation_rate},
            {"redundancy", redundancy},
            {"dram_op_count", dram_op_count},
            {"seed", seed},
        };
        if (!ts.empty()) j["ts"] = ts;
        return j;
    }

    static std::string csv_header() {
        return "ts,trace,policy,memory_bytes,d,m,n,m0,k,k0,eviction_rate,"
               "aggregation_rate,redundancy,dram_op_count,seed";
    }

    std::string to_csv_row() const {
        char num[456];
        std::snprintf(num, sizeof num,
                      "%llu,%u,%llu,%llu,%llu,%llu,%llu,%.10g,%.10g,%.10g,%llu,%llu",
                      static_cast<unsigned long long>(memory_bytes), d,
                      static_cast<unsigned long long>(m),
                      static_cast<unsigned long long>(n),
                      static_cast<unsigned long long>(m0),
                      static_cast<unsigned long long>(k),
                      static_cast<unsigned long long>(k0), eviction_rate,
                      aggregation_rate, redundancy,
                      static_cast<unsigned long long>(dram_op_count),
                      static_cast<unsigned long long>(seed));
        return ts + "," + trace + "," + policy + "," + num;
    }
};

}  // namespace prime

#endif  // PRIME_METRICS_HPP
