#include "mlsep/lattice.hpp"

#include <bit>
#include <stdexcept>

namespace mlsep {

LaneGeometry LaneGeometry::ring(int length, int n_lanes) {
    LaneGeometry g;
    g.n_lanes = n_lanes;
    g.length = length;
    g.h_boundary = HBoundary::Periodic;
    g.v_topology = n_lanes == 2 ? VTopology::TwoLane : VTopology::Torus;
    g.validate();
    return g;
}

LaneGeometry LaneGeometry::closed(int half_width, int n_lanes) {
    LaneGeometry g;
    g.n_lanes = n_lanes;
    g.length = 2 * half_width + 1;
    g.h_boundary = HBoundary::Closed;
    g.v_topology = n_lanes == 2 ? VTopology::TwoLane : VTopology::Torus;
    g.validate();
    return g;
}

void LaneGeometry::validate() const {
    if (n_lanes < 2) throw std::invalid_argument("LaneGeometry: n_lanes must be >= 2");
    if (length < 2 && !(h_boundary == HBoundary::Closed && length >= 1))
        throw std::invalid_argument("LaneGeometry: length must be >= 2");
    if (v_topology == VTopology::TwoLane && n_lanes != 2)
        throw std::invalid_argument("LaneGeometry: TwoLane topology requires n_lanes = 2");
    if (h_boundary == HBoundary::Closed && length % 2 == 0)
        throw std::invalid_argument("LaneGeometry: Closed window must have odd length (columns -M..M)");
}

Config::Config(const LaneGeometry& g) : geom_(g) {
    geom_.validate();
    const std::size_t bits = geom_.n_sites();
    words_.assign((bits + 63) / 64, 0);
}

int Config::particle_count() const {
    int n = 0;
    for (std::uint64_t w : words_) n += std::popcount(w);
    return n;
}

std::vector<std::uint8_t> lane_view(const Config& config, int lane) {
    const auto& g = config.geometry();
    if (lane < 0 || lane >= g.n_lanes) throw std::out_of_range("lane_view: lane index out of range");
    std::vector<std::uint8_t> v(g.length);
    for (int z = g.col_min(); z <= g.col_max(); ++z)
        v[g.column_offset(z)] = config.get(z, lane) ? 1 : 0;
    return v;
}

int column_sum(const Config& config, int z) {
    const auto& g = config.geometry();
    if (!g.contains_column(z)) throw std::out_of_range("column_sum: column out of range");
    int s = 0;
    for (int i = 0; i < g.n_lanes; ++i) s += config.get(z, i) ? 1 : 0;
    return s;
}

long long H2(const Config& config, int origin) {
    const auto& g = config.geometry();
    if (g.h_boundary != HBoundary::Closed)
        throw std::invalid_argument("H2 is undefined on Periodic geometry");
    long long h = 0;
    for (int z = g.col_min(); z <= g.col_max(); ++z) {
        const int s = column_sum(config, z);
        if (z <= origin)
            h += s;
        else
            h -= g.n_lanes - s;
    }
    return h;
}

Config all_empty(const LaneGeometry& g) { return Config(g); }

Config all_full(const LaneGeometry& g) {
    Config c(g);
    for (int i = 0; i < g.n_lanes; ++i)
        for (int z = g.col_min(); z <= g.col_max(); ++z) c.set(z, i, true);
    return c;
}

void fill_lane_step(Config& c, int lane, long long n) {
    const auto& g = c.geometry();
    for (int z = g.col_min(); z <= g.col_max(); ++z) c.set(z, lane, z > n);
}

}  // namespace mlsep
