#ifndef PRIME_FLOW_HPP
#define PRIME_FLOW_HPP

#include <array>
#include <cstddef>
#include <cstdint>

namespace prime {

// Microseconds since the trace epoch.
using Timestamp = std::uint64_t;

// IPv4 5-tuple identifying a flow.
struct FlowKey {
    std::uint32_t src_ip = 0;
    std::uint32_t dst_ip = 0;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::uint8_t protocol = 0;

    friend bool operator==(const FlowKey&, const FlowKey&) = default;
};

// One trace event.
struct PacketRecord {
    FlowKey key;
    Timestamp ts = 0;
};

// Temporary flow record: one segment of a flow as seen by the fast table.
struct Tfr {
    FlowKey key;
    std::uint64_t count = 0;
    Timestamp sts = 0;  // start timestamp
    Timestamp ets = 0;  // end timestamp

    friend bool operator==(const Tfr&, const Tfr&) = default;
};

inline constexpr std::size_t kFlowKeyBytes = 13;

// Canonical fixed-width serialization: src_ip, dst_ip, src_port, dst_port,
// protocol, each big-endian.
inline std::array<std::uint8_t, kFlowKeyBytes> serialize_key(const FlowKey& k) {
    return {
        static_cast<std::uint8_t>(k.src_ip >> 24),
        static_cast<std::uint8_t>(k.src_ip >> 16),
        static_cast<std::uint8_t>(k.src_ip >> 8),
        static_cast<std::uint8_t>(k.src_ip),
        static_cast<std::uint8_t>(k.dst_ip >> 24),
        static_cast<std::uint8_t>(k.dst_ip >> 16),
        static_cast<std::uint8_t>(k.dst_ip >> 8),
        static_cast<std::uint8_t>(k.dst_ip),
        static_cast<std::uint8_t>(k.src_port >> 8),
        static_cast<std::uint8_t>(k.src_port),
        static_cast<std::uint8_t>(k.dst_port >> 8),
        static_cast<std::uint8_t>(k.dst_port),
        k.protocol,
    };
}

inline FlowKey deserialize_key(const std::array<std::uint8_t, kFlowKeyBytes>& b) {
    FlowKey k;
    k.src_ip = (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
               (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
    k.dst_ip = (std::uint32_t{b[4]} << 24) | (std::uint32_t{b[5]} << 16) |
               (std::uint32_t{b[6]} << 8) | std::uint32_t{b[7]};
    k.src_port = static_cast<std::uint16_t>((b[8] << 8) | b[9]);
    k.dst_port = static_cast<std::uint16_t>((b[10] << 8) | b[11]);
    k.protocol = b[12];
    return k;
}

// MurmurHash64A over a byte sequence. Byte-order independent (explicit
// little-endian block loads), so results are stable across platforms.
inline std::uint64_t hash_bytes(const std::uint8_t* data, std::size_t len,
                                std::uint64_t seed) {
    constexpr std::uint64_t mul = 0xc6a4a7935bd1e995ULL;
    constexpr int rot = 47;

    std::uint64_t h = seed ^ (static_cast<std::uint64_t>(len) * mul);
    const std::uint8_t* p = data;
    for (std::size_t blocks = len / 8; blocks != 0; --blocks, p += 8) {
        std::uint64_t k = std::uint64_t{p[0]} | (std::uint64_t{p[1]} << 8) |
                          (std::uint64_t{p[2]} << 16) | (std::uint64_t{p[3]} << 24) |
                          (std::uint64_t{p[4]} << 32) | (std::uint64_t{p[5]} << 40) |
                          (std::uint64_t{p[6]} << 48) | (std::uint64_t{p[7]} << 56);
        k *= mul;
        k ^= k >> rot;
        k *= mul;
        h ^= k;
        h *= mul;
    }
    switch (len & 7) {
        case 7: h ^= std::uint64_t{p[6]} << 48; [[fallthrough]];
        case 6: h ^= std::uint64_t{p[5]} << 40; [[fallthrough]];
        case 5: h ^= std::uint64_t{p[4]} << 32; [[fallthrough]];
        case 4: h ^= std::uint64_t{p[3]} << 24; [[fallthrough]];
        case 3: h ^= std::uint64_t{p[2]} << 16; [[fallthrough]];
        case 2: h ^= std::uint64_t{p[1]} << 8; [[fallthrough]];
        case 1:
            h ^= std::uint64_t{p[0]};
            h *= mul;
            break;
        default: break;
    }
    h ^= h >> rot;
    h *= mul;
    h ^= h >> rot;
    return h;
}

// Keyed flow hash. Depends only on the canonical serialization; distinct
// seeds realize the hash family.
inline std::uint64_t flow_hash(const FlowKey& key, std::uint64_t seed) {
    const auto bytes = serialize_key(key);
    return hash_bytes(bytes.data(), bytes.size(), seed);
}

// SplitMix64 step; used to derive per-component seeds from a master seed
// and to mix synthetic flow identities.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// For standard unordered containers keyed by FlowKey.
struct FlowKeyHash {
    std::size_t operator()(const FlowKey& k) const {
        return static_cast<std::size_t>(flow_hash(k, 0x6c62272e07bb0142ULL));
    }
};

}  // namespace prime

#endif  // PRIME_FLOW_HPP
