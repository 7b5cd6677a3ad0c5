#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace mlsep {

// 64-bit finalizer (splitmix64). Used both as the generator step and as the
// documented replica seed-splitting rule: stream_seed(master, k) = mix64(master ^ k).
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t k) {
    return mix64(master ^ k);
}

// Seeded counter generator: output_i = mix64-chain starting at the seed.
// One instance per replica; a trajectory is a pure function of its seed.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed = 0) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // uniform in [0,1)
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    // uniform in (0,1], safe as a log() argument
    double next_double_pos() { return ((next_u64() >> 11) + 1) * 0x1.0p-53; }

    double exponential(double rate) { return -std::log(next_double_pos()) / rate; }

    bool bernoulli(double prob) { return next_double() < prob; }

    // uniform integer in [0, n)
    std::uint64_t next_below(std::uint64_t n) {
        // multiply-shift; bias < 2^-64, irrelevant at our sample counts
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

  private:
    std::uint64_t state_;
};

// Walker alias table for O(1) sampling from a fixed discrete distribution.
// The bond set of a run is fixed, so this is built once per simulation.
class AliasTable {
  public:
    AliasTable() = default;
    explicit AliasTable(const std::vector<double>& weights) { build(weights); }

    void build(const std::vector<double>& weights);

    std::size_t sample(CounterRng& rng) const {
        const std::size_t i = static_cast<std::size_t>(rng.next_below(prob_.size()));
        return rng.next_double() < prob_[i] ? i : alias_[i];
    }

    double total_weight() const { return total_; }
    std::size_t size() const { return prob_.size(); }

  private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
    double total_ = 0.0;
};

}  // namespace mlsep
