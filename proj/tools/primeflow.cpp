// primeflow: trace-driven simulator for a two-tier per-flow measurement
// pipeline. Subcommands: simulate, sweep, gen, compare.
//
// Exit codes: 0 success (conservation verified), 1 usage, 2 I/O or input
// data error, 3 conservation failure.

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "prime/metrics.hpp"
#include "prime/pipeline.hpp"
#include "prime/trace_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitConservation = 3;

struct SimOptions {
    std::string trace;
    std::string format = "json";
    std::string policy = "prime";
    std::string config_file;
    prime::PipelineConfig cfg;
    std::uint64_t limit = 0;
    bool no_ts = false;
    bool clamp_timestamps = false;
};

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<prime::PacketRecord> load_trace(const SimOptions& opt) {
    const prime::MonotonicPolicy policy = opt.clamp_timestamps
                                              ? prime::MonotonicPolicy::Clamp
                                              : prime::MonotonicPolicy::Reject;
    std::vector<prime::PacketRecord> packets;
    if (has_suffix(opt.trace, ".pcap") || has_suffix(opt.trace, ".cap")) {
        auto result = prime::read_pcap_trace(opt.trace, policy, opt.limit);
        if (result.skipped > 0)
            std::cerr << "note: skipped " << result.skipped
                      << " non-IPv4-TCP/UDP frames\n";
        packets = std::move(result.packets);
    } else {
        packets = prime::read_csv_trace(opt.trace, policy, opt.limit);
    }
    if (packets.empty())
        throw prime::TraceError(prime::TraceErrorKind::Io,
                                opt.trace + ": trace contains no packets");
    return packets;
}

// Registers the flags shared by simulate, sweep, and compare. The config file
// uses the same keys as the long flags; command-line values win.
void add_sim_flags(CLI::App* cmd, SimOptions& opt, bool with_policy,
                   bool with_memory = true) {
    cmd->add_option("--trace", opt.trace, "trace file (.csv, or .pcap/.cap)")
        ->required();
    cmd->add_option("--format", opt.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    if (with_memory)
        cmd->add_option("--memory-bytes", opt.cfg.memory_bytes,
                        "fast-table memory budget in bytes (decimal)")
            ->capture_default_str();
    cmd->add_option("--d", opt.cfg.d, "number of candidate buckets per flow")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--seed", opt.cfg.master_seed, "master seed")
        ->capture_default_str();
    cmd->add_option("--buffer-capacity", opt.cfg.buffer_capacity,
                    "records per staging buffer")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--aggre-slots", opt.cfg.aggre_slots,
                    "slots in the merge table")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--bloom-bits", opt.cfg.bloom_bits, "bloom filter bits")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--bloom-hashes", opt.cfg.bloom_hashes,
                    "bloom filter hash count")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--limit", opt.limit,
                    "process at most this many packets (0 = all)")
        ->capture_default_str();
    cmd->add_flag("--no-ts", opt.no_ts, "omit the wall-clock field from reports");
    cmd->add_flag("--clamp-timestamps", opt.clamp_timestamps,
                  "clamp backwards timestamps instead of rejecting the trace");
    if (with_policy)
        cmd->add_option("--policy", opt.policy, "fast-table policy")
            ->check(CLI::IsMember({"prime", "turboflow"}))
            ->capture_default_str();
    cmd->add_option("--config", opt.config_file,
                    "keyed-text config file (key=value; command-line flags win)");
}

// Expands --config into synthesized --key=value arguments appended after the
// user's own, skipping any key already given on the command line. Values then
// flow through the normal option checks, and explicit flags keep priority.
std::vector<std::string> apply_config_file(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
    }
    if (path.empty()) return args;

    std::ifstream in(path);
    if (!in) throw prime::TraceError(prime::TraceErrorKind::Io, "cannot open " + path);

    const auto trim = [](std::string s) {
        const auto from = s.find_first_not_of(" \t\r");
        const auto to = s.find_last_not_of(" \t\r");
        return from == std::string::npos ? std::string() : s.substr(from, to - from + 1);
    };
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ": expected key=value, got \"" + line + "\"");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || key == "config")
            throw std::invalid_argument(path + ": bad config key in \"" + line + "\"");

        const std::string flag = "--" + key;
        bool given = false;
        for (const std::string& a : args)
            given |= a == flag || a.rfind(flag + "=", 0) == 0;
        if (!given) args.push_back(flag + "=" + value);
    }
    return args;
}

struct PointResult {
    prime::RunReport report;
    prime::ConservationReport conservation;
};

PointResult run_point(const std::vector<prime::PacketRecord>& packets,
                      const prime::Oracle& oracle, prime::PipelineConfig cfg,
                      const std::string& trace_name, const std::string& ts) {
    const prime::PipelineResult res = prime::run_pipeline(packets, cfg);
    PointResult out;
    out.report = prime::make_report(cfg, res, oracle, trace_name, ts);
    out.conservation = prime::verify_conservation(res.final_records, oracle);
    return out;
}

int emit_simulate(const PointResult& point, const std::string& format) {
    if (format == "csv")
        std::cout << prime::RunReport::csv_header() << "\n"
                  << point.report.to_csv_row() << "\n";
    else
        std::cout << point.report.to_json().dump(2) << "\n";
    if (!point.conservation.ok) {
        std::cerr << "conservation check failed: " << point.conservation.detail
                  << "\n";
        return kExitConservation;
    }
    return kExitOk;
}

int cmd_simulate(const SimOptions& opt) {
    const auto packets = load_trace(opt);
    const prime::Oracle oracle = prime::build_oracle(packets);
    prime::PipelineConfig cfg = opt.cfg;
    cfg.policy = prime::parse_policy(opt.policy);
    const std::string ts = opt.no_ts ? "" : utc_now();
    return emit_simulate(run_point(packets, oracle, cfg, opt.trace, ts), opt.format);
}

int cmd_compare(const SimOptions& opt) {
    const auto packets = load_trace(opt);
    const prime::Oracle oracle = prime::build_oracle(packets);
    const std::string ts = opt.no_ts ? "" : utc_now();

    prime::PipelineConfig cfg = opt.cfg;
    cfg.policy = prime::Policy::Prime;
    const PointResult ours = run_point(packets, oracle, cfg, opt.trace, ts);
    cfg.policy = prime::Policy::Turboflow;
    const PointResult base = run_point(packets, oracle, cfg, opt.trace, ts);

    // Relative reduction achieved by the main policy; positive is better.
    const auto rel = [](double a, double b) {
        return b == 0.0 ? 0.0 : (b - a) / b;
    };
    const double ev = rel(ours.report.eviction_rate, base.report.eviction_rate);
    const double ag = rel(ours.report.aggregation_rate, base.report.aggregation_rate);
    const double re = rel(ours.report.redundancy, base.report.redundancy);

    if (opt.format == "csv") {
        std::cout << prime::RunReport::csv_header() << "\n"
                  << ours.report.to_csv_row() << "\n"
                  << base.report.to_csv_row() << "\n";
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "relative reduction vs baseline: eviction %.4f, "
                      "aggregation %.4f, redundancy %.4f",
                      ev, ag, re);
        std::cerr << buf << "\n";
    } else {
        nlohmann::json j{
            {"prime", ours.report.to_json()},
            {"turboflow", base.report.to_json()},
            {"delta",
             {{"eviction_rate_reduction", ev},
              {"aggregation_rate_reduction", ag},
              {"redundancy_reduction", re}}},
        };
        std::cout << j.dump(2) << "\n";
    }

    for (const PointResult* p : {&ours, &base}) {
        if (!p->conservation.ok) {
            std::cerr << "conservation check failed (" << p->report.policy
                      << "): " << p->conservation.detail << "\n";
            return kExitConservation;
        }
    }
    return kExitOk;
}

struct SweepOptions {
    SimOptions sim;
    std::uint64_t start = 200'000;
    std::uint64_t stop = 2'000'000;
    std::uint64_t step = 200'000;
    std::vector<std::string> policies = {"prime", "turboflow"};
};

int cmd_sweep(const SweepOptions& opt) {
    if (opt.start > opt.stop || opt.step == 0) {
        std::cerr << "sweep: need start <= stop and step > 0\n";
        return kExitUsage;
    }
    std::vector<prime::Policy> policies;
    for (const std::string& name : opt.policies) {
        const prime::Policy p = prime::parse_policy(name);
        if (std::find(policies.begin(), policies.end(), p) == policies.end())
            policies.push_back(p);
    }
    std::sort(policies.begin(), policies.end());  // row order: memory, then policy

    const auto packets = load_trace(opt.sim);
    const prime::Oracle oracle = prime::build_oracle(packets);
    const std::string ts = opt.sim.no_ts ? "" : utc_now();

    // Points are independent; run them concurrently, emit in order.
    std::vector<std::future<PointResult>> futures;
    for (std::uint64_t mem = opt.start; mem <= opt.stop; mem += opt.step) {
        for (const prime::Policy policy : policies) {
            prime::PipelineConfig cfg = opt.sim.cfg;
            cfg.memory_bytes = mem;
            cfg.policy = policy;
            futures.push_back(std::async(std::launch::async, [=, &packets, &oracle] {
                return run_point(packets, oracle, cfg, opt.sim.trace, ts);
            }));
        }
    }

    const bool json = opt.sim.format == "json";
    nlohmann::json rows = nlohmann::json::array();
    if (!json) std::cout << prime::RunReport::csv_header() << "\n";
    for (auto& f : futures) {
        const PointResult point = f.get();
        if (json)
            rows.push_back(point.report.to_json());
        else
            std::cout << point.report.to_csv_row() << "\n";
        if (!point.conservation.ok) {
            if (json) std::cout << rows.dump(2) << "\n";
            std::cout.flush();
            std::cerr << "conservation check failed at memory_bytes="
                      << point.report.memory_bytes << " policy="
                      << point.report.policy << ": " << point.conservation.detail
                      << "\n";
            return kExitConservation;
        }
    }
    if (json) std::cout << rows.dump(2) << "\n";
    return kExitOk;
}

struct GenOptions {
    std::string out;
    prime::SyntheticSpec spec;
};

int cmd_gen(const GenOptions& opt) {
    const prime::SyntheticTrace trace = prime::generate_synthetic(opt.spec);
    prime::write_csv_trace(opt.out, trace.packets);
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "wrote %zu packets, distinct_flows=%llu, "
                  "single_packet_fraction=%.6f",
                  trace.packets.size(),
                  static_cast<unsigned long long>(trace.distinct_flows),
                  trace.single_packet_fraction());
    std::cout << buf << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-tier per-flow traffic measurement simulator", "primeflow"};
    app.require_subcommand(1);

    SimOptions sim_opt;
    CLI::App* simulate = app.add_subcommand("simulate", "run one trace replay");
    add_sim_flags(simulate, sim_opt, true);

    SweepOptions sweep_opt;
    sweep_opt.sim.format = "csv";  // sweeps are plotting input first
    CLI::App* sweep = app.add_subcommand("sweep", "replay across a memory range");
    add_sim_flags(sweep, sweep_opt.sim, false, false);
    sweep->add_option("--start", sweep_opt.start, "first memory size in bytes")
        ->capture_default_str();
    sweep->add_option("--stop", sweep_opt.stop, "last memory size in bytes")
        ->capture_default_str();
    sweep->add_option("--step", sweep_opt.step, "memory increment in bytes")
        ->capture_default_str();
    sweep->add_option("--policies", sweep_opt.policies,
                      "policies to sweep (prime, turboflow)")
        ->delimiter(',')
        ->capture_default_str();

    SimOptions cmp_opt;
    CLI::App* compare = app.add_subcommand(
        "compare", "run both policies and report the deltas");
    add_sim_flags(compare, cmp_opt, false);

    GenOptions gen_opt;
    CLI::App* gen = app.add_subcommand("gen", "write a synthetic trace");
    gen->add_option("--out", gen_opt.out, "output CSV path")->required();
    gen->add_option("--flows", gen_opt.spec.flow_count, "flow population size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    gen->add_option("--packets", gen_opt.spec.packet_count, "packets to emit")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    gen->add_option("--zipf-exponent", gen_opt.spec.zipf_exponent,
                    "popularity skew (> 0)")
        ->capture_default_str();
    gen->add_option("--seed", gen_opt.spec.seed, "generator seed")
        ->capture_default_str();

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = apply_config_file(std::move(args));
    } catch (const prime::TraceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        std::reverse(args.begin(), args.end());  // parse() consumes back to front
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim_opt);
        if (sweep->parsed()) return cmd_sweep(sweep_opt);
        if (compare->parsed()) return cmd_compare(cmp_opt);
        if (gen->parsed()) return cmd_gen(gen_opt);
        std::cerr << "no subcommand\n";
        return kExitUsage;
    } catch (const prime::TraceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
}
