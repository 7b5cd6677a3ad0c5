#include "mlsep/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mlsep {

namespace {

std::vector<double> bond_weights(const std::vector<DirectedRate>& bonds) {
    std::vector<double> w(bonds.size());
    for (std::size_t i = 0; i < bonds.size(); ++i) w[i] = bonds[i].rate;
    return w;
}

// Shared clock machinery: exponential waiting times at rate Lambda, bond drawn
// proportionally to its rate. Single and coupled runs consume the generator in
// the same order, so equal-seed runs see the same Harris clocks.
struct EventClock {
    std::vector<DirectedRate> bonds;
    AliasTable alias;
    CounterRng rng;
    double time = 0;

    EventClock(std::vector<DirectedRate> b, std::uint64_t seed) : bonds(std::move(b)), rng(seed) {
        if (bonds.empty()) throw std::invalid_argument("simulation: bond set is empty");
        alias.build(bond_weights(bonds));
    }

    double draw_next_time() { return time + rng.exponential(alias.total_weight()); }
    const DirectedRate& draw_bond() { return bonds[alias.sample(rng)]; }
};

bool try_jump(Config& c, const DirectedRate& b) {
    if (c.get_flat(b.from) && !c.get_flat(b.to)) {
        c.flip_flat(b.from);
        c.flip_flat(b.to);
        return true;
    }
    return false;
}

std::vector<double> sorted_snapshot_times(const std::vector<double>& times, double T) {
    std::vector<double> out = times;
    std::sort(out.begin(), out.end());
    for (double t : out)
        if (t < 0 || t > T)
            throw std::invalid_argument("snapshot times must lie in [0, T]");
    return out;
}

}  // namespace

SimState::SimState(Config initial, std::vector<DirectedRate> bonds, std::uint64_t seed)
    : config_(std::move(initial)), bonds_(std::move(bonds)), rng_(seed) {
    if (bonds_.empty()) throw std::invalid_argument("SimState: bond set is empty");
    alias_.build(bond_weights(bonds_));
}

bool SimState::step() {
    time_ += rng_.exponential(alias_.total_weight());
    ++proposed_;
    last_bond_ = alias_.sample(rng_);
    const auto& b = bonds_[last_bond_];
    if (config_.get_flat(b.from) && !config_.get_flat(b.to)) {
        config_.flip_flat(b.from);
        config_.flip_flat(b.to);
        ++accepted_;
        return true;
    }
    return false;
}

Trajectory run(const Config& initial, const RateKernel& rates, const RunOptions& opts,
               std::uint64_t seed) {
    if (opts.T < 0) throw std::invalid_argument("run: T must be nonnegative");
    const auto& g = initial.geometry();
    EventClock clock(enumerate_bonds(rates, g), seed);

    Trajectory out;
    out.seed = seed;
    out.net_crossings.assign(opts.flux_cuts.size(), 0);

    // flat endpoints of the horizontal bonds over each requested cut
    struct CutBond {
        std::uint32_t from, to;
        std::size_t cut;
    };
    std::vector<CutBond> cut_bonds;
    for (std::size_t k = 0; k < opts.flux_cuts.size(); ++k) {
        const int cut = opts.flux_cuts[k];
        const int right = g.right_of(cut);
        if (!g.contains_column(cut) || right < g.col_min())
            throw std::invalid_argument("run: flux cut outside the window or at a Closed end");
        for (int lane = 0; lane < g.n_lanes; ++lane)
            cut_bonds.push_back({static_cast<std::uint32_t>(initial.site_index(cut, lane)),
                                 static_cast<std::uint32_t>(initial.site_index(right, lane)), k});
    }

    const std::vector<double> times = sorted_snapshot_times(opts.snapshot_times, opts.T);
    std::size_t next_snap = 0;

    const bool check_h2 = opts.check_H2 && g.h_boundary == HBoundary::Closed;
    const long long h2_ref = check_h2 ? H2(initial, opts.H2_origin) : 0;

    Config config = initial;
    auto assert_h2 = [&](const Config& c) {
        if (check_h2 && H2(c, opts.H2_origin) != h2_ref)
            throw std::logic_error("run: H2 changed along the trajectory");
    };
    while (true) {
        const double t_next = clock.draw_next_time();
        // the state is piecewise constant: flush snapshots strictly before the
        // next event so that a snapshot at an event time sees the jump applied
        while (next_snap < times.size() && times[next_snap] < t_next) {
            assert_h2(config);
            out.snapshots.push_back({times[next_snap++], config});
        }
        if (t_next > opts.T) break;
        clock.time = t_next;
        ++out.proposed_events;
        const DirectedRate& b = clock.draw_bond();
        if (try_jump(config, b)) {
            ++out.accepted_events;
            for (const auto& cb : cut_bonds) {
                if (b.from == cb.from && b.to == cb.to)
                    ++out.net_crossings[cb.cut];
                else if (b.from == cb.to && b.to == cb.from)
                    --out.net_crossings[cb.cut];
            }
        }
    }
    while (next_snap < times.size()) out.snapshots.push_back({times[next_snap++], config});
    assert_h2(config);
    out.final_config = std::move(config);
    out.final_time = opts.T;
    return out;
}

int count_discrepancies(const CoupledConfig& cc, int m, int n) {
    const auto& g = cc.eta.geometry();
    if (g != cc.xi.geometry())
        throw std::invalid_argument("count_discrepancies: marginals on different geometries");
    if (m > n) throw std::invalid_argument("count_discrepancies: requires m <= n");
    int d = 0;
    for (int lane = 0; lane < g.n_lanes; ++lane)
        for (int z = std::max(m, g.col_min()); z <= std::min(n, g.col_max()); ++z)
            d += cc.eta.get(z, lane) != cc.xi.get(z, lane);
    return d;
}

int count_discrepancies(const CoupledConfig& cc) {
    const auto& g = cc.eta.geometry();
    return count_discrepancies(cc, g.col_min(), g.col_max());
}

namespace {

// lane-wise comparison: -1 when a <= b (with strict somewhere), +1 when a >= b,
// 0 when equal, 2 when incomparable
int lane_order(const Config& a, const Config& b, int lane) {
    const auto& g = a.geometry();
    bool has_lt = false, has_gt = false;
    for (int z = g.col_min(); z <= g.col_max(); ++z) {
        const bool x = a.get(z, lane), y = b.get(z, lane);
        has_lt |= !x && y;
        has_gt |= x && !y;
    }
    if (has_lt && has_gt) return 2;
    if (has_lt) return -1;
    if (has_gt) return 1;
    return 0;
}

}  // namespace

PairOrder classify_pair(const CoupledConfig& cc) {
    const auto& g = cc.eta.geometry();
    if (g != cc.xi.geometry())
        throw std::invalid_argument("classify_pair: marginals on different geometries");
    if (g.n_lanes != 2) throw std::invalid_argument("classify_pair: two-lane geometry required");

    const int o0 = lane_order(cc.eta, cc.xi, 0);
    const int o1 = lane_order(cc.eta, cc.xi, 1);
    if (o0 == 0 && o1 == 0) return PairOrder::Equal;
    if (o0 <= 0 && o1 <= 0 && o0 != 2 && o1 != 2) return PairOrder::LE;
    if ((o0 == 1 || o0 == 0) && (o1 == 1 || o1 == 0)) return PairOrder::GE;
    if (o0 == 2 || o1 == 2 || o0 == 0 || o1 == 0) return PairOrder::Unordered;

    // lanes ordered in opposite directions: eta >< xi needs the rightmost
    // lane-1 discrepancy strictly left of the leftmost lane-0 discrepancy
    int x = g.col_min() - 1;  // rightmost discrepancy on lane 1
    int y = g.col_max() + 1;  // leftmost discrepancy on lane 0
    for (int z = g.col_min(); z <= g.col_max(); ++z) {
        if (cc.eta.get(z, 1) != cc.xi.get(z, 1)) x = std::max(x, z);
        if (cc.eta.get(z, 0) != cc.xi.get(z, 0)) y = std::min(y, z);
    }
    if (x >= y) return PairOrder::Unordered;

    // bowtie strengthening: lane 1 all coupled particles right of x, lane 0
    // all holes left of y
    bool bowtie = true;
    for (int z = x + 1; z <= g.col_max(); ++z)
        bowtie &= cc.eta.get(z, 1) && cc.xi.get(z, 1);
    for (int z = g.col_min(); z < y; ++z)
        bowtie &= !cc.eta.get(z, 0) && !cc.xi.get(z, 0);
    return bowtie ? PairOrder::BowtieCandidate : PairOrder::SupInfCandidate;
}

CoupledTrajectory run_coupled(const CoupledConfig& initial, const RateKernel& rates,
                              const CoupledRunOptions& opts, std::uint64_t seed) {
    if (opts.T < 0) throw std::invalid_argument("run_coupled: T must be nonnegative");
    const auto& g = initial.eta.geometry();
    if (g != initial.xi.geometry())
        throw std::invalid_argument("run_coupled: marginals on different geometries");
    EventClock clock(enumerate_bonds(rates, g), seed);

    CoupledTrajectory out;
    out.seed = seed;

    const std::vector<double> times = sorted_snapshot_times(opts.snapshot_times, opts.T);
    std::size_t next_snap = 0;

    CoupledConfig cc = initial;
    while (true) {
        const double t_next = clock.draw_next_time();
        while (next_snap < times.size() && times[next_snap] < t_next)
            out.snapshots.push_back({times[next_snap++], cc});
        if (t_next > opts.T) break;
        clock.time = t_next;
        ++out.proposed_events;
        const DirectedRate& b = clock.draw_bond();

        const int disc_before = (cc.eta.get_flat(b.from) != cc.xi.get_flat(b.from)) +
                                (cc.eta.get_flat(b.to) != cc.xi.get_flat(b.to));
        const bool moved_eta = try_jump(cc.eta, b);
        const bool moved_xi = try_jump(cc.xi, b);
        if (moved_eta || moved_xi) {
            ++out.accepted_events;
            const int disc_after = (cc.eta.get_flat(b.from) != cc.xi.get_flat(b.from)) +
                                   (cc.eta.get_flat(b.to) != cc.xi.get_flat(b.to));
            if (disc_after < disc_before) ++out.coalescences;
            if (disc_after > disc_before) out.discrepancy_count_monotone = false;
        }
    }
    while (next_snap < times.size()) out.snapshots.push_back({times[next_snap++], cc});
    out.final_cc = std::move(cc);
    out.final_time = opts.T;
    return out;
}

TaggedDiscrepancyPath track_tagged_discrepancy(const CoupledConfig& initial, const RateKernel& rates,
                                               double T, std::uint64_t seed,
                                               std::optional<std::pair<int, int>> start) {
    const auto& g = initial.eta.geometry();
    if (g != initial.xi.geometry())
        throw std::invalid_argument("track_tagged_discrepancy: marginals on different geometries");
    int tz = 0, tlane = 0;
    bool found = false;
    if (start) {
        tz = start->first;
        tlane = start->second;
        found = initial.eta.get(tz, tlane) != initial.xi.get(tz, tlane);
    } else {
        for (int lane = 0; lane < g.n_lanes && !found; ++lane)
            for (int z = g.col_min(); z <= g.col_max() && !found; ++z)
                if (initial.eta.get(z, lane) != initial.xi.get(z, lane)) {
                    tz = z;
                    tlane = lane;
                    found = true;
                }
    }
    if (!found)
        throw std::invalid_argument("track_tagged_discrepancy: no discrepancy at the start site");

    EventClock clock(enumerate_bonds(rates, g), seed);
    CoupledConfig cc = initial;
    const int L = g.length;
    auto flat = [&](int z, int lane) {
        return static_cast<std::uint32_t>(cc.eta.site_index(z, lane));
    };
    auto unflat = [&](std::uint32_t s) {
        return std::pair<int, int>{g.col_min() + static_cast<int>(s % L), static_cast<int>(s / L)};
    };

    TaggedDiscrepancyPath out;
    out.path.push_back({0.0, tz, tlane});
    std::uint32_t tagged = flat(tz, tlane);

    while (true) {
        const double t_next = clock.draw_next_time();
        if (t_next > T) {
            out.end_time = T;
            break;
        }
        clock.time = t_next;
        const DirectedRate& b = clock.draw_bond();

        const SiteMark mf = cc.mark(unflat(b.from).first, unflat(b.from).second);
        const SiteMark mt = cc.mark(unflat(b.to).first, unflat(b.to).second);
        try_jump(cc.eta, b);
        try_jump(cc.xi, b);

        const bool opposite =
            (mf == SiteMark::EtaDiscrepancy && mt == SiteMark::XiDiscrepancy) ||
            (mf == SiteMark::XiDiscrepancy && mt == SiteMark::EtaDiscrepancy);
        if (tagged == b.from) {
            if (opposite) {
                out.coalesced = true;
                out.end_time = t_next;
                break;
            }
            if (mt == SiteMark::Hole) {
                tagged = b.to;
                const auto [z, lane] = unflat(tagged);
                out.path.push_back({t_next, z, lane});
            }
        } else if (tagged == b.to) {
            if (opposite) {
                out.coalesced = true;
                out.end_time = t_next;
                break;
            }
            if (mf == SiteMark::Coupled) {
                tagged = b.from;  // the coupled particle exchanges with the discrepancy
                const auto [z, lane] = unflat(tagged);
                out.path.push_back({t_next, z, lane});
            }
        }
    }
    return out;
}

}  // namespace mlsep
