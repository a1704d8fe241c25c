#ifndef PRIME_TURBOFLOW_HPP
#define PRIME_TURBOFLOW_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "prime/flow.hpp"
#include "prime/sram_cache.hpp"

namespace prime {

// Benchmark policy: one hash function, one candidate bucket, evict the
// resident record on any collision. No timestamp averaging; exported
// single-packet records get the same end-timestamp correction as the main
// policy so downstream accounting is comparable.
class TurboflowTable {
  public:
    TurboflowTable(std::uint64_t memory_bytes, std::uint32_t tfr_bytes,
                   std::uint64_t seed)
        : seed_(seed) {
        const std::uint64_t n = tfr_bytes == 0 ? 0 : memory_bytes / tfr_bytes;
        if (n < 1) throw std::invalid_argument("turboflow: bucket count must be >= 1");
        buckets_.resize(n);
    }

    ProcessOutcome process_packet(const PacketRecord& pkt) {
        ++packets_;
        const Timestamp now = pkt.ts;
        std::optional<Tfr>& slot =
            buckets_[flow_hash(pkt.key, seed_) % buckets_.size()];
        if (!slot) {
            slot = Tfr{pkt.key, 1, now, now};
            return {OutcomeKind::Inserted, std::nullopt};
        }
        if (slot->key == pkt.key) {
            ++slot->count;
            slot->ets = now;
            return {OutcomeKind::Updated, std::nullopt};
        }
        Tfr victim = *slot;
        if (victim.count == 1) victim.ets = victim.sts;
        slot = Tfr{pkt.key, 1, now, now};
        ++evictions_;
        return {OutcomeKind::Evicted, victim};
    }

    std::vector<Tfr> flush() {
        std::vector<Tfr> out;
        for (std::optional<Tfr>& slot : buckets_) {
            if (!slot) continue;
            Tfr rec = *slot;
            if (rec.count == 1) rec.ets = rec.sts;
            out.push_back(rec);
            slot.reset();
        }
        return out;
    }

    std::uint64_t eviction_count() const { return evictions_; }
    std::uint64_t packet_count() const { return packets_; }
    std::uint64_t bucket_count() const { return buckets_.size(); }

  private:
    std::vector<std::optional<Tfr>> buckets_;
    std::uint64_t seed_;
    std::uint64_t evictions_ = 0;
    std::uint64_t packets_ = 0;
};

}  // namespace prime

#endif  // PRIME_TURBOFLOW_HPP
