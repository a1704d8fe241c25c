#ifndef PRIME_DRAM_STAGE_HPP
#define PRIME_DRAM_STAGE_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "prime/export_router.hpp"
#include "prime/flow.hpp"

namespace prime {

// Direct-mapped merge table for record segments of the same flow. Slots are
// stored sparsely by index; behavior is identical to a dense array of
// slot_count optional records.
class Aggregator {
  public:
    Aggregator(std::uint64_t slot_count, std::uint64_t seed)
        : slot_count_(slot_count), seed_(seed) {
        if (slot_count_ < 1)
            throw std::invalid_argument("aggregator: slot count must be >= 1");
    }

    // Empty slot: store. Same flow: merge (count summed, end timestamp taken
    // from the incoming record, start timestamp kept). Different flow: the
    // resident is evicted and returned, the incoming record takes the slot.
    std::optional<Tfr> insert(const Tfr& rec) {
        const std::uint64_t idx = flow_hash(rec.key, seed_) % slot_count_;
        auto [it, inserted] = slots_.try_emplace(idx, rec);
        if (inserted) return std::nullopt;
        Tfr& resident = it->second;
        if (resident.key == rec.key) {
            resident.count += rec.count;
            resident.ets = rec.ets;
            return std::nullopt;
        }
        Tfr victim = resident;
        resident = rec;
        return victim;
    }

    // Residents in ascending slot order.
    std::vector<Tfr> drain() {
        std::vector<std::pair<std::uint64_t, Tfr>> entries(slots_.begin(), slots_.end());
        slots_.clear();
        std::sort(entries.begin(), entries.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<Tfr> out;
        out.reserve(entries.size());
        for (auto& [idx, rec] : entries) out.push_back(rec);
        return out;
    }

    std::uint64_t slot_count() const { return slot_count_; }
    std::size_t occupied() const { return slots_.size(); }

  private:
    std::uint64_t slot_count_;
    std::uint64_t seed_;
    std::unordered_map<std::uint64_t, Tfr> slots_;
};

// Slow-memory stage: batches of first-seen records are appended wholesale to
// the output queue; batches of seen-before records are merged one by one
// through the aggregator, with collision victims pushed to the queue.
// DRAM cost is modeled by operation counts only.
class DramStage {
  public:
    DramStage(std::uint64_t aggre_slots, std::uint64_t seed)
        : aggre_(aggre_slots, seed) {}

    void handle_batch(const Batch& batch) {
        if (batch.flag == BufferKind::New) {
            queue_.insert(queue_.end(), batch.records.begin(), batch.records.end());
            ops_ += 2;  // one block read + one block write
            return;
        }
        for (const Tfr& rec : batch.records) {
            ops_ += 2;  // slot read + slot write
            if (std::optional<Tfr> victim = aggre_.insert(rec)) {
                queue_.push_back(*victim);
                ops_ += 1;  // queue append
            }
        }
        inserted_one_by_one_ += batch.records.size();
    }

    // Queue contents followed by aggregator residents; clears both. The
    // returned list is the run's final record set.
    std::vector<Tfr> finalize() {
        std::vector<Tfr> out = std::move(queue_);
        queue_ = {};
        std::vector<Tfr> residents = aggre_.drain();
        out.insert(out.end(), residents.begin(), residents.end());
        return out;
    }

    const std::vector<Tfr>& queue() const { return queue_; }
    const Aggregator& aggregator() const { return aggre_; }
    std::uint64_t inserted_one_by_one() const { return inserted_one_by_one_; }
    std::uint64_t dram_op_count() const { return ops_; }

  private:
    Aggregator aggre_;
    std::vector<Tfr> queue_;
    std::uint64_t inserted_one_by_one_ = 0;
    std::uint64_t ops_ = 0;
};

}  // namespace prime

#endif  // PRIME_DRAM_STAGE_HPP
