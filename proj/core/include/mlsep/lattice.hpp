#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mlsep {

enum class HBoundary { Periodic, Closed };
enum class VTopology { TwoLane, Torus };

// Finite window of the lattice Z x W. Periodic geometry is a horizontal ring
// with columns 0..L-1; Closed geometry is the centered window -M..M (L = 2M+1)
// with no wrap-around, standing in for an infinite lattice that is empty
// beyond the left end and full beyond the right end.
struct LaneGeometry {
    int n_lanes = 2;
    int length = 2;
    HBoundary h_boundary = HBoundary::Periodic;
    VTopology v_topology = VTopology::TwoLane;

    static LaneGeometry ring(int length, int n_lanes = 2);
    static LaneGeometry closed(int half_width, int n_lanes = 2);

    void validate() const;  // throws std::invalid_argument on a bad combination

    int col_min() const { return h_boundary == HBoundary::Closed ? -(length - 1) / 2 : 0; }
    int col_max() const { return h_boundary == HBoundary::Closed ? (length - 1) / 2 : length - 1; }
    bool contains_column(int z) const { return z >= col_min() && z <= col_max(); }
    int column_offset(int z) const { return z - col_min(); }

    // right neighbour of column z, or -1 past a Closed end
    int right_of(int z) const {
        if (z == col_max()) return h_boundary == HBoundary::Periodic ? col_min() : col_min() - 1;
        return z + 1;
    }

    std::size_t n_sites() const { return static_cast<std::size_t>(n_lanes) * length; }

    bool operator==(const LaneGeometry&) const = default;
};

// Occupancy field on a LaneGeometry window, bit-packed per lane.
class Config {
  public:
    Config() = default;
    explicit Config(const LaneGeometry& g);

    const LaneGeometry& geometry() const { return geom_; }

    bool get(int z, int lane) const {
        const std::size_t o = bit_offset(z, lane);
        return (words_[word_index(lane, o)] >> (o & 63)) & 1u;
    }
    void set(int z, int lane, bool v) {
        const std::size_t o = bit_offset(z, lane);
        const std::uint64_t m = 1ULL << (o & 63);
        if (v)
            words_[word_index(lane, o)] |= m;
        else
            words_[word_index(lane, o)] &= ~m;
    }
    void flip(int z, int lane) {
        const std::size_t o = bit_offset(z, lane);
        words_[word_index(lane, o)] ^= 1ULL << (o & 63);
    }

    // flat site index used by the event loop: lane * L + column_offset
    std::size_t site_index(int z, int lane) const {
        return static_cast<std::size_t>(lane) * geom_.length + geom_.column_offset(z);
    }
    bool get_flat(std::size_t site) const {
        return (words_[site >> 6] >> (site & 63)) & 1u;
    }
    void flip_flat(std::size_t site) { words_[site >> 6] ^= 1ULL << (site & 63); }

    int particle_count() const;

    bool operator==(const Config&) const = default;

  private:
    std::size_t bit_offset(int z, int lane) const {
        return static_cast<std::size_t>(lane) * geom_.length + geom_.column_offset(z);
    }
    static std::size_t word_index(int, std::size_t o) { return o >> 6; }

    LaneGeometry geom_;
    std::vector<std::uint64_t> words_;  // lanes are laid out consecutively, 64 sites per word
};

// eta^i restricted to the window, leftmost column first
std::vector<std::uint8_t> lane_view(const Config& config, int lane);

// number of occupied lanes at column z
int column_sum(const Config& config, int z);

// Conserved height for Closed geometry:
//   sum_{z <= origin} etabar(z) - sum_{z > origin} (n_lanes - etabar(z)).
// Undefined (throws) on Periodic geometry.
long long H2(const Config& config, int origin = 0);

// helpers used by measures and tests
Config all_empty(const LaneGeometry& g);
Config all_full(const LaneGeometry& g);

// step configuration eta*_n on one lane: occupied exactly at columns z > n;
// the sentinels stand for eta*_{+inf} (all 0s) and eta*_{-inf} (all 1s)
inline constexpr long long kStepPlusInf = (1LL << 60);
inline constexpr long long kStepMinusInf = -(1LL << 60);
void fill_lane_step(Config& c, int lane, long long n);

}  // namespace mlsep
