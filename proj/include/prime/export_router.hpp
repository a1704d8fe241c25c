#ifndef PRIME_EXPORT_ROUTER_HPP
#define PRIME_EXPORT_ROUTER_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "prime/flow.hpp"

namespace prime {

// Standard bloom filter over flow keys. No deletion, no aging; saturates
// monotonically within a run.
class BloomFilter {
  public:
    BloomFilter(std::uint64_t bits, std::vector<std::uint64_t> seeds)
        : bits_(bits), seeds_(std::move(seeds)) {
        if (bits_ == 0) throw std::invalid_argument("bloom: bits must be > 0");
        if (seeds_.empty()) throw std::invalid_argument("bloom: need >= 1 hash");
        words_.resize((bits_ + 63) / 64);
    }

    bool contains(const FlowKey& key) const {
        for (std::uint64_t seed : seeds_) {
            const std::uint64_t bit = flow_hash(key, seed) % bits_;
            if (!(words_[bit >> 6] & (1ULL << (bit & 63)))) return false;
        }
        return true;
    }

    void insert(const FlowKey& key) {
        for (std::uint64_t seed : seeds_) {
            const std::uint64_t bit = flow_hash(key, seed) % bits_;
            words_[bit >> 6] |= 1ULL << (bit & 63);
        }
        ++inserted_;
    }

    // Analytic false-positive estimate (1 - e^{-kn/m})^k at the current load.
    double fpr_estimate() const {
        if (inserted_ == 0) return 0.0;
        const double k = static_cast<double>(seeds_.size());
        const double load = k * static_cast<double>(inserted_) /
                            static_cast<double>(bits_);
        return std::pow(1.0 - std::exp(-load), k);
    }

    std::uint64_t inserted_count() const { return inserted_; }
    std::uint64_t bit_count() const { return bits_; }
    std::size_t hash_count() const { return seeds_.size(); }

  private:
    std::uint64_t bits_;
    std::vector<std::uint64_t> seeds_;
    std::vector<std::uint64_t> words_;
    std::uint64_t inserted_ = 0;
};

enum class BufferKind { Existing, New };

// A buffer's worth of records handed to the DRAM stage. Immutable after
// emission; the producer moves it out and never touches it again.
struct Batch {
    BufferKind flag;
    std::vector<Tfr> records;
};

struct RouterConfig {
    std::uint64_t bloom_bits = 8'000'000;
    std::vector<std::uint64_t> bloom_seeds;  // one per bloom hash
    std::size_t buffer_capacity = 64;

    void validate() const {
        if (buffer_capacity < 1)
            throw std::invalid_argument("router: buffer capacity must be >= 1");
    }
};

// Splits evicted records into two staging buffers: flows already seen by the
// bloom filter go to the "existing" buffer, first-seen flows go to the "new"
// buffer (and into the filter). A buffer that reaches capacity is drained
// and emitted as one batch.
class ExportRouter {
  public:
    explicit ExportRouter(RouterConfig cfg)
        : cfg_(cfg), bloom_(cfg.bloom_bits, cfg.bloom_seeds) {
        cfg_.validate();
        existing_.reserve(cfg_.buffer_capacity);
        fresh_.reserve(cfg_.buffer_capacity);
    }

    std::optional<Batch> route(const Tfr& tfr) {
        if (bloom_.contains(tfr.key)) {
            ++routed_existing_;
            existing_.push_back(tfr);
            if (existing_.size() >= cfg_.buffer_capacity)
                return drain(BufferKind::Existing, existing_);
        } else {
            ++routed_new_;
            fresh_.push_back(tfr);
            bloom_.insert(tfr.key);
            if (fresh_.size() >= cfg_.buffer_capacity)
                return drain(BufferKind::New, fresh_);
        }
        return std::nullopt;
    }

    // End-of-run drain: emits the existing buffer first, then the new buffer,
    // skipping empty ones.
    std::vector<Batch> flush() {
        std::vector<Batch> out;
        if (!existing_.empty()) out.push_back(drain(BufferKind::Existing, existing_));
        if (!fresh_.empty()) out.push_back(drain(BufferKind::New, fresh_));
        return out;
    }

    double fpr_estimate() const { return bloom_.fpr_estimate(); }
    const BloomFilter& bloom() const { return bloom_; }
    std::uint64_t routed_existing() const { return routed_existing_; }
    std::uint64_t routed_new() const { return routed_new_; }

  private:
    Batch drain(BufferKind kind, std::vector<Tfr>& buf) {
        Batch b{kind, std::move(buf)};
        buf = {};
        buf.reserve(cfg_.buffer_capacity);
        return b;
    }

    RouterConfig cfg_;
    BloomFilter bloom_;
    std::vector<Tfr> existing_;
    std::vector<Tfr> fresh_;
    std::uint64_t routed_existing_ = 0;
    std::uint64_t routed_new_ = 0;
};

}  // namespace prime

#endif  // PRIME_EXPORT_ROUTER_HPP
