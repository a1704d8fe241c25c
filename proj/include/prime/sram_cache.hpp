#ifndef PRIME_SRAM_CACHE_HPP
#define PRIME_SRAM_CACHE_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "prime/flow.hpp"

namespace prime {

// floor((a + b) / 2) without intermediate overflow.
constexpr Timestamp floor_avg(Timestamp a, Timestamp b) {
    return (a / 2) + (b / 2) + (a & b & 1);
}

struct SramConfig {
    std::uint64_t memory_bytes = 500'000;
    std::uint32_t tfr_bytes = 71;  // bytes one record occupies
    std::uint32_t d = 3;           // number of hash functions
    std::vector<std::uint64_t> seeds;

    std::uint64_t bucket_count() const {
        return tfr_bytes == 0 ? 0 : memory_bytes / tfr_bytes;
    }

    void validate() const {
        if (d < 1) throw std::invalid_argument("sram config: d must be >= 1");
        if (seeds.size() != d)
            throw std::invalid_argument("sram config: need exactly d seeds");
        std::unordered_set<std::uint64_t> uniq(seeds.begin(), seeds.end());
        if (uniq.size() != seeds.size())
            throw std::invalid_argument("sram config: seeds must be pairwise distinct");
        if (bucket_count() < d)
            throw std::invalid_argument(
                "sram config: bucket count " + std::to_string(bucket_count()) +
                " below d=" + std::to_string(d));
    }
};

enum class OutcomeKind { Updated, Inserted, Evicted };

struct ProcessOutcome {
    OutcomeKind kind;
    std::optional<Tfr> evicted;  // set iff kind == Evicted
};

// Fast-memory flow table: each bucket holds at most one record, every key has
// d candidate buckets probed in fixed order. On a full miss the candidate
// with the smallest end timestamp is evicted and the replacement's end
// timestamp is set to the floor-average of the victim's and the packet's.
class SramTable {
  public:
    explicit SramTable(SramConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
        buckets_.resize(cfg_.bucket_count());
    }

    std::vector<std::uint64_t> candidate_buckets(const FlowKey& key) const {
        std::vector<std::uint64_t> idx(cfg_.d);
        for (std::uint32_t i = 0; i < cfg_.d; ++i)
            idx[i] = flow_hash(key, cfg_.seeds[i]) % buckets_.size();
        return idx;
    }

    ProcessOutcome process_packet(const PacketRecord& pkt) {
        ++packets_;
        const Timestamp now = pkt.ts;

        std::uint64_t min_ets = std::numeric_limits<std::uint64_t>::max();
        std::uint64_t victim_idx = 0;  // d >= 1 guarantees this gets set below
        for (std::uint32_t i = 0; i < cfg_.d; ++i) {
            const std::uint64_t idx = flow_hash(pkt.key, cfg_.seeds[i]) % buckets_.size();
            std::optional<Tfr>& slot = buckets_[idx];
            if (!slot) {
                slot = Tfr{pkt.key, 1, now, now};
                return {OutcomeKind::Inserted, std::nullopt};
            }
            if (slot->key == pkt.key) {
                ++slot->count;
                slot->ets = now;
                return {OutcomeKind::Updated, std::nullopt};
            }
            if (slot->ets < min_ets) {  // strict <: first minimum wins
                min_ets = slot->ets;
                victim_idx = idx;
            }
        }

        // All candidates occupied by other flows: evict the least recent one.
        std::optional<Tfr>& slot = buckets_[victim_idx];
        Tfr victim = *slot;
        if (victim.count == 1) victim.ets = victim.sts;  // single-packet correction
        slot = Tfr{pkt.key, 1, now, floor_avg(victim.ets, now)};
        ++evictions_;
        return {OutcomeKind::Evicted, victim};
    }

    // Drains all resident records (single-packet residents get the same end
    // timestamp correction as evictions) and empties the table. Does not
    // count as eviction.
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
    const SramConfig& config() const { return cfg_; }
    const std::vector<std::optional<Tfr>>& buckets() const { return buckets_; }

  private:
    SramConfig cfg_;
    std::vector<std::optional<Tfr>> buckets_;
    std::uint64_t evictions_ = 0;
    std::uint64_t packets_ = 0;
};

}  // namespace prime

#endif  // PRIME_SRAM_CACHE_HPP
