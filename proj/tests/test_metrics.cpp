#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "prime/flow.hpp"
#include "prime/metrics.hpp"
#include "prime/trace_io.hpp"

namespace prime {
namespace {

FlowKey key_n(std::uint32_t n) {
    FlowKey k;
    k.src_ip = 0x14000000u | n;
    k.dst_ip = 0x15151515u;
    k.src_port = static_cast<std::uint16_t>(n);
    k.dst_port = 22;
    k.protocol = 6;
    return k;
}

Tfr ts_record(std::uint32_t n) { return Tfr{key_n(n), 1, 0, 0}; }

TEST(Rates, HandComputedValues) {
    EXPECT_DOUBLE_EQ(eviction_rate(0, 100), 0.0);
    EXPECT_DOUBLE_EQ(eviction_rate(3, 4), 0.75);
    EXPECT_DOUBLE_EQ(eviction_rate(100, 100), 1.0);
    EXPECT_DOUBLE_EQ(aggregation_rate(0, 100), 0.0);
    EXPECT_DOUBLE_EQ(aggregation_rate(1, 8), 0.125);
    EXPECT_THROW(eviction_rate(1, 0), ZeroPackets);
    EXPECT_THROW(aggregation_rate(1, 0), ZeroPackets);
}

TEST(Redundancy, HandComputedValues) {
    std::vector<PacketRecord> packets = {{key_n(1), 1}, {key_n(2), 2}};
    const Oracle oracle = build_oracle(packets);  // k0 = 2

    // Two records, two true flows: nothing redundant.
    std::vector<Tfr> exact = {ts_record(1), ts_record(2)};
    EXPECT_DOUBLE_EQ(redundancy(exact, oracle), 0.0);

    // Four records for two flows: half are duplicates.
    std::vector<Tfr> split = {ts_record(1), ts_record(1), ts_record(2), ts_record(2)};
    EXPECT_DOUBLE_EQ(redundancy(split, oracle), 0.5);

    EXPECT_THROW(redundancy({}, oracle), EmptyRun);
}

TEST(Oracle, CountsPacketsPerFlow) {
    std::vector<PacketRecord> packets;
    for (int i = 0; i < 5; ++i) packets.push_back({key_n(1), Timestamp(i)});
    for (int i = 0; i < 3; ++i) packets.push_back({key_n(2), Timestamp(i)});
    packets.push_back({key_n(3), 9});

    const Oracle o = build_oracle(packets);
    EXPECT_EQ(o.total_packets, 9u);
    EXPECT_EQ(o.distinct_flows(), 3u);
    EXPECT_EQ(o.counts.at(key_n(1)), 5u);
    EXPECT_EQ(o.counts.at(key_n(2)), 3u);
    EXPECT_EQ(o.counts.at(key_n(3)), 1u);
}

TEST(Oracle, MatchesIndependentGroupingOnZipfTrace) {
    SyntheticSpec spec;
    spec.flow_count = 10'000;
    spec.packet_count = 50'000;
    spec.seed = 3;
    const auto trace = generate_synthetic(spec);
    const Oracle o = build_oracle(trace.packets);

    std::uint64_t total = 0;
    for (const auto& [key, c] : o.counts) total += c;
    EXPECT_EQ(total, 50'000u);
    EXPECT_EQ(o.total_packets, 50'000u);
    EXPECT_EQ(o.distinct_flows(), trace.distinct_flows);
}

TEST(Conservation, AcceptsExactRecordSets) {
    std::vector<PacketRecord> packets;
    for (int i = 0; i < 4; ++i) packets.push_back({key_n(1), Timestamp(i)});
    packets.push_back({key_n(2), 7});
    const Oracle oracle = build_oracle(packets);

    // Flow 1 split across two segments, flow 2 in one.
    std::vector<Tfr> records = {
        {key_n(1), 3, 0, 2}, {key_n(1), 1, 3, 3}, {key_n(2), 1, 7, 7}};
    const auto report = verify_conservation(records, oracle);
    EXPECT_TRUE(report.ok);
    EXPECT_FALSE(report.first_mismatch.has_value());
}

TEST(Conservation, FlagsUndercount) {
    std::vector<PacketRecord> packets = {{key_n(1), 0}, {key_n(1), 1}};
    const Oracle oracle = build_oracle(packets);
    std::vector<Tfr> records = {{key_n(1), 1, 0, 0}};  // lost a packet
    const auto report = verify_conservation(records, oracle);
    EXPECT_FALSE(report.ok);
    ASSERT_TRUE(report.first_mismatch.has_value());
    EXPECT_EQ(*report.first_mismatch, key_n(1));
    EXPECT_NE(report.detail.find("recorded 1"), std::string::npos);
}

TEST(Conservation, FlagsPhantomFlow) {
    std::vector<PacketRecord> packets = {{key_n(1), 0}};
    const Oracle oracle = build_oracle(packets);
    std::vector<Tfr> records = {{key_n(1), 1, 0, 0}, {key_n(9), 1, 2, 2}};
    EXPECT_FALSE(verify_conservation(records, oracle).ok);
}

TEST(Conservation, FlagsMissingFlow) {
    std::vector<PacketRecord> packets = {{key_n(1), 0}, {key_n(2), 1}};
    const Oracle oracle = build_oracle(packets);
    std::vector<Tfr> records = {{key_n(1), 1, 0, 0}};
    const auto report = verify_conservation(records, oracle);
    EXPECT_FALSE(report.ok);
    ASSERT_TRUE(report.first_mismatch.has_value());
    EXPECT_EQ(*report.first_mismatch, key_n(2));
    EXPECT_NE(report.detail.find("missing"), std::string::npos);
}

RunReport sample_report() {
    RunReport r;
    r.ts = "2026-01-02T03:04:05Z";
    r.trace = "traces/sample.csv";
    r.policy = "prime";
    r.memory_bytes = 500'000;
    r.d = 3;
    r.m = 123;
    r.n = 1000;
    r.m0 = 45;
    r.k = 350;
    r.k0 = 300;
    r.eviction_rate = 0.123;
    r.aggregation_rate = 0.045;
    r.redundancy = 1.0 / 7.0;
    r.dram_op_count = 99;
    r.seed = 42;
    return r;
}

TEST(RunReportFormat, JsonCarriesEveryField) {
    const RunReport r = sample_report();
    const nlohmann::json j = r.to_json();
    EXPECT_EQ(j.at("ts"), "2026-01-02T03:04:05Z");
    EXPECT_EQ(j.at("trace"), "traces/sample.csv");
    EXPECT_EQ(j.at("policy"), "prime");
    EXPECT_EQ(j.at("memory_bytes"), 500'000u);
    EXPECT_EQ(j.at("d"), 3u);
    EXPECT_EQ(j.at("m"), 123u);
    EXPECT_EQ(j.at("n"), 1000u);
    EXPECT_EQ(j.at("m0"), 45u);
    EXPECT_EQ(j.at("k"), 350u);
    EXPECT_EQ(j.at("k0"), 300u);
    EXPECT_DOUBLE_EQ(j.at("eviction_rate").get<double>(), 0.123);
    EXPECT_DOUBLE_EQ(j.at("aggregation_rate").get<double>(), 0.045);
    EXPECT_DOUBLE_EQ(j.at("redundancy").get<double>(), 1.0 / 7.0);
    EXPECT_EQ(j.at("dram_op_count"), 99u);
    EXPECT_EQ(j.at("seed"), 42u);

    RunReport quiet = r;
    quiet.ts.clear();
    EXPECT_FALSE(quiet.to_json().contains("ts"));
}

TEST(RunReportFormat, CsvRowMatchesHeaderArity) {
    const std::string header = RunReport::csv_header();
    const std::string row = sample_report().to_csv_row();
    const auto commas = [](const std::string& s) {
        return std::count(s.begin(), s.end(), ',');
    };
    EXPECT_EQ(commas(header), commas(row));
    EXPECT_EQ(header.substr(0, 3), "ts,");
    EXPECT_NE(row.find("2026-01-02T03:04:05Z,traces/sample.csv,prime,500000,3,"),
              std::string::npos);
    EXPECT_NE(row.find(",0.123,"), std::string::npos);
}

}  // namespace
}  // namespace prime
