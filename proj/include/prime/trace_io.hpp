#ifndef PRIME_TRACE_IO_HPP
#define PRIME_TRACE_IO_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "prime/flow.hpp"

namespace prime {

enum class TraceErrorKind {
    Io,
    MalformedRow,
    NonMonotonicTimestamp,
    BadMagic,
    Truncated,
    UnsupportedLinkType,
};

class TraceError : public std::runtime_error {
  public:
    TraceError(TraceErrorKind kind, std::string msg, std::uint64_t line = 0)
        : std::runtime_error(std::move(msg)), kind_(kind), line_(line) {}

    TraceErrorKind kind() const { return kind_; }
    std::uint64_t line() const { return line_; }  // 1-based; 0 if not line-scoped

  private:
    TraceErrorKind kind_;
    std::uint64_t line_;
};

// What to do when a timestamp goes backwards: refuse the trace or clamp the
// offending timestamp up to its predecessor.
enum class MonotonicPolicy { Reject, Clamp };

inline constexpr std::string_view kCsvHeader =
    "ts_us,src_ip,dst_ip,src_port,dst_port,proto";

namespace detail {

template <typename T>
bool parse_uint(std::string_view field, T& out, std::uint64_t max_value) {
    if (field.empty()) return false;
    std::uint64_t value = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || value > max_value) return false;
    out = static_cast<T>(value);
    return true;
}

inline bool parse_ipv4(std::string_view field, std::uint32_t& out) {
    std::uint32_t ip = 0;
    std::size_t start = 0;
    for (int octet = 0; octet < 4; ++octet) {
        std::size_t end = octet == 3 ? field.size() : field.find('.', start);
        if (end == std::string_view::npos) return false;
        std::uint8_t v = 0;
        if (!parse_uint(field.substr(start, end - start), v, 255)) return false;
        ip = (ip << 8) | v;
        start = end + 1;
    }
    out = ip;
    return true;
}

inline std::string format_ipv4(std::uint32_t ip) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", (ip >> 24) & 0xFF,
                  (ip >> 16) & 0xFF, (ip >> 8) & 0xFF, ip & 0xFF);
    return buf;
}

}  // namespace detail

// Reads the canonical CSV trace format. Rows with malformed fields and
// timestamps that go backwards are hard errors (clamping is opt-in).
// limit = 0 means no cap.
inline std::vector<PacketRecord> read_csv_trace(
    const std::string& path, MonotonicPolicy policy = MonotonicPolicy::Reject,
    std::uint64_t limit = 0) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TraceError(TraceErrorKind::Io, "cannot open " + path);

    std::string line;
    std::uint64_t line_no = 1;
    if (!std::getline(in, line))
        throw TraceError(TraceErrorKind::MalformedRow, path + ": missing header", 1);
    if (line != kCsvHeader)
        throw TraceError(TraceErrorKind::MalformedRow,
                         path + ": bad header (expected \"" + std::string(kCsvHeader) + "\")", 1);

    std::vector<PacketRecord> out;
    Timestamp prev = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (limit != 0 && out.size() >= limit) break;

        std::string_view fields[6];
        std::string_view rest = line;
        bool ok = true;
        for (int i = 0; i < 6; ++i) {
            std::size_t comma = rest.find(',');
            if (i < 5) {
                if (comma == std::string_view::npos) {
                    ok = false;
                    break;
                }
                fields[i] = rest.substr(0, comma);
                rest = rest.substr(comma + 1);
            } else {
                ok = comma == std::string_view::npos;
                fields[i] = rest;
            }
        }

        PacketRecord rec;
        ok = ok && detail::parse_uint(fields[0], rec.ts, UINT64_MAX) &&
             detail::parse_ipv4(fields[1], rec.key.src_ip) &&
             detail::parse_ipv4(fields[2], rec.key.dst_ip) &&
             detail::parse_uint(fields[3], rec.key.src_port, 65535) &&
             detail::parse_uint(fields[4], rec.key.dst_port, 65535) &&
             detail::parse_uint(fields[5], rec.key.protocol, 255);
        if (!ok)
            throw TraceError(TraceErrorKind::MalformedRow,
                             path + ":" + std::to_string(line_no) + ": malformed row",
                             line_no);

        if (!out.empty() && rec.ts < prev) {
            if (policy == MonotonicPolicy::Reject)
                throw TraceError(TraceErrorKind::NonMonotonicTimestamp,
                                 path + ":" + std::to_string(line_no) +
                                     ": timestamp goes backwards",
                                 line_no);
            rec.ts = prev;
        }
        prev = rec.ts;
        out.push_back(rec);
    }
    if (in.bad()) throw TraceError(TraceErrorKind::Io, "read error on " + path);
    return out;
}

inline void write_csv_trace(const std::string& path,
                            const std::vector<PacketRecord>& packets) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw TraceError(TraceErrorKind::Io, "cannot create " + path);
    out << kCsvHeader << '\n';
    char buf[96];
    for (const PacketRecord& p : packets) {
        std::snprintf(buf, sizeof buf, "%llu,%s,%s,%u,%u,%u\n",
                      static_cast<unsigned long long>(p.ts),
                      detail::format_ipv4(p.key.src_ip).c_str(),
                      detail::format_ipv4(p.key.dst_ip).c_str(), p.key.src_port,
                      p.key.dst_port, p.key.protocol);
        out << buf;
    }
    out.flush();
    if (!out) throw TraceError(TraceErrorKind::Io, "write error on " + path);
}

struct PcapResult {
    std::vector<PacketRecord> packets;
    std::uint64_t skipped = 0;  // non-IPv4 / non-TCP-UDP / unparseable frames
};

// Reads a classic libpcap capture: Ethernet link type, IPv4 TCP/UDP packets.
// Anything else (ARP, IPv6, fragments, short captures) is counted and
// skipped. limit = 0 means no cap.
inline PcapResult read_pcap_trace(const std::string& path,
                                  MonotonicPolicy policy = MonotonicPolicy::Reject,
                                  std::uint64_t limit = 0) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TraceError(TraceErrorKind::Io, "cannot open " + path);

    auto read_exact = [&](std::uint8_t* dst, std::size_t n) -> bool {
        in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
        return static_cast<std::size_t>(in.gcount()) == n;
    };

    std::uint8_t ghdr[24];
    if (!read_exact(ghdr, sizeof ghdr))
        throw TraceError(TraceErrorKind::Truncated, path + ": short global header");

    const std::uint32_t magic_le = std::uint32_t{ghdr[0]} | (std::uint32_t{ghdr[1]} << 8) |
                                   (std::uint32_t{ghdr[2]} << 16) |
                                   (std::uint32_t{ghdr[3]} << 24);
    bool swapped;
    if (magic_le == 0xA1B2C3D4u)
        swapped = false;
    else if (magic_le == 0xD4C3B2A1u)
        swapped = true;
    else
        throw TraceError(TraceErrorKind::BadMagic, path + ": not a classic pcap file");

    auto u32 = [swapped](const std::uint8_t* p) -> std::uint32_t {
        if (swapped)
            return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
                   (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
        return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
               (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
    };

    const std::uint32_t linktype = u32(ghdr + 20);
    if (linktype != 1)  // Ethernet
        throw TraceError(TraceErrorKind::UnsupportedLinkType,
                         path + ": link type " + std::to_string(linktype));

    PcapResult result;
    std::vector<std::uint8_t> frame;
    std::uint8_t phdr[16];
    Timestamp prev = 0;
    for (;;) {
        if (limit != 0 && result.packets.size() >= limit) break;
        in.read(reinterpret_cast<char*>(phdr), sizeof phdr);
        if (in.gcount() == 0 && in.eof()) break;
        if (static_cast<std::size_t>(in.gcount()) != sizeof phdr)
            throw TraceError(TraceErrorKind::Truncated, path + ": short packet header");

        const std::uint32_t ts_sec = u32(phdr);
        const std::uint32_t ts_usec = u32(phdr + 4);
        const std::uint32_t incl_len = u32(phdr + 8);
        frame.resize(incl_len);
        if (incl_len > 0 && !read_exact(frame.data(), incl_len))
            throw TraceError(TraceErrorKind::Truncated, path + ": short packet body");

        // Ethernet header
        if (incl_len < 14 + 20) {
            ++result.skipped;
            continue;
        }
        const std::uint16_t ethertype =
            static_cast<std::uint16_t>((frame[12] << 8) | frame[13]);
        if (ethertype != 0x0800) {  // IPv4 only; VLAN-tagged frames also skipped
            ++result.skipped;
            continue;
        }

        const std::uint8_t* ip = frame.data() + 14;
        const std::uint8_t version = ip[0] >> 4;
        const std::size_t ihl = static_cast<std::size_t>(ip[0] & 0x0F) * 4;
        const std::uint16_t frag = static_cast<std::uint16_t>(((ip[6] & 0x1F) << 8) | ip[7]);
        const std::uint8_t proto = ip[9];
        if (version != 4 || ihl < 20 || frag != 0 || (proto != 6 && proto != 17) ||
            incl_len < 14 + ihl + 4) {
            ++result.skipped;
            continue;
        }

        const std::uint8_t* l4 = ip + ihl;
        PacketRecord rec;
        rec.key.src_ip = (std::uint32_t{ip[12]} << 24) | (std::uint32_t{ip[13]} << 16) |
                         (std::uint32_t{ip[14]} << 8) | std::uint32_t{ip[15]};
        rec.key.dst_ip = (std::uint32_t{ip[16]} << 24) | (std::uint32_t{ip[17]} << 16) |
                         (std::uint32_t{ip[18]} << 8) | std::uint32_t{ip[19]};
        rec.key.src_port = static_cast<std::uint16_t>((l4[0] << 8) | l4[1]);
        rec.key.dst_port = static_cast<std::uint16_t>((l4[2] << 8) | l4[3]);
        rec.key.protocol = proto;
        rec.ts = Timestamp{ts_sec} * 1'000'000 + ts_usec;

        if (!result.packets.empty() && rec.ts < prev) {
            if (policy == MonotonicPolicy::Reject)
                throw TraceError(TraceErrorKind::NonMonotonicTimestamp,
                                 path + ": timestamp goes backwards");
            rec.ts = prev;
        }
        prev = rec.ts;
        result.packets.push_back(rec);
    }
    return result;
}

struct SyntheticSpec {
    std::uint64_t flow_count = 200'000;   // size of the flow population
    double zipf_exponent = 1.1;           // popularity skew, > 0
    std::uint64_t packet_count = 1'000'000;
    std::uint64_t seed = 1;
    // Purely a reporting aid: when set, callers compare it against the
    // achieved fraction; generation is not steered by it.
    std::optional<double> single_packet_fraction_target;
};

struct SyntheticTrace {
    std::vector<PacketRecord> packets;
    std::uint64_t distinct_flows = 0;
    std::uint64_t single_packet_flows = 0;

    double single_packet_fraction() const {
        return distinct_flows == 0
                   ? 0.0
                   : static_cast<double>(single_packet_flows) /
                         static_cast<double>(distinct_flows);
    }
};

namespace detail {

// Deterministic flow identity for a popularity rank. The rank is embedded in
// the source address (injective for populations up to 2^24); the remaining
// fields are seed-mixed so keys spread under hashing.
inline FlowKey key_for_rank(std::uint64_t rank, std::uint64_t seed) {
    std::uint64_t state = seed ^ (rank * 0xD1B54A32D192ED03ULL);
    const std::uint64_t mix = splitmix64(state);
    FlowKey k;
    k.src_ip = 0x0A000000u | static_cast<std::uint32_t>(rank & 0xFFFFFF);
    k.dst_ip = static_cast<std::uint32_t>(mix >> 32);
    k.src_port = static_cast<std::uint16_t>(mix);
    k.dst_port = static_cast<std::uint16_t>(mix >> 16);
    k.protocol = (mix >> 48) & 1 ? 6 : 17;
    return k;
}

}  // namespace detail

// Heavy-tailed trace generator: flow popularity is Zipf with the given
// exponent, timestamps tick up one microsecond per packet. Deterministic for
// a given seed.
inline SyntheticTrace generate_synthetic(const SyntheticSpec& spec) {
    if (spec.flow_count < 1)
        throw std::invalid_argument("synthetic: flow_count must be >= 1");
    if (spec.flow_count > (1ULL << 24))
        throw std::invalid_argument("synthetic: flow_count above 2^24 not supported");
    if (!(spec.zipf_exponent > 0.0))
        throw std::invalid_argument("synthetic: zipf_exponent must be > 0");
    if (spec.single_packet_fraction_target && spec.packet_count < spec.flow_count)
        throw std::invalid_argument(
            "synthetic: packet_count must be >= flow_count when a "
            "single-packet fraction target is set");

    // Inverse-CDF sampling over rank popularities 1/r^s.
    std::vector<double> cdf(spec.flow_count);
    double acc = 0.0;
    for (std::uint64_t r = 1; r <= spec.flow_count; ++r) {
        acc += std::pow(static_cast<double>(r), -spec.zipf_exponent);
        cdf[r - 1] = acc;
    }

    std::mt19937_64 rng(spec.seed);
    std::vector<std::uint32_t> per_rank(spec.flow_count, 0);
    SyntheticTrace trace;
    trace.packets.reserve(spec.packet_count);
    for (std::uint64_t i = 0; i < spec.packet_count; ++i) {
        // 53-bit uniform in [0,1); avoids distribution objects so streams are
        // reproducible everywhere.
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * acc;
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        const std::uint64_t rank =
            static_cast<std::uint64_t>(it == cdf.end() ? spec.flow_count - 1
                                                       : it - cdf.begin());
        ++per_rank[rank];
        trace.packets.push_back(PacketRecord{detail::key_for_rank(rank, spec.seed),
                                             Timestamp{i}});
    }
    for (std::uint32_t c : per_rank) {
        if (c == 0) continue;
        ++trace.distinct_flows;
        if (c == 1) ++trace.single_packet_flows;
    }
    return trace;
}

}  // namespace prime

#endif  // PRIME_TRACE_IO_HPP
