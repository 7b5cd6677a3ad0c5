#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mlsep/kernels.hpp"
#include "mlsep/lattice.hpp"
#include "mlsep/rng.hpp"

namespace mlsep {

// Event-driven realization of the finite-window process: one Poisson clock of
// total intensity Lambda = sum of bond rates, bond picked proportionally to
// its rate, jump applied iff the source is occupied and the target vacant.
// The bond set is fixed for the run, so Lambda never changes.

struct Snapshot {
    double t = 0;
    Config config;
};

struct Trajectory {
    std::vector<Snapshot> snapshots;      // at the requested times, in order
    Config final_config;
    double final_time = 0;
    std::uint64_t proposed_events = 0;
    std::uint64_t accepted_events = 0;
    std::vector<long long> net_crossings;  // signed counts, one per requested cut
    std::uint64_t seed = 0;
};

struct RunOptions {
    double T = 0;
    std::vector<double> snapshot_times;  // need not be sorted; sorted internally
    std::vector<int> flux_cuts;          // columns whose right bond current is accumulated
    bool check_H2 = false;               // assert H2 conservation on Closed geometry
    int H2_origin = 0;
};

class SimState {
  public:
    SimState(Config initial, std::vector<DirectedRate> bonds, std::uint64_t seed);

    const Config& config() const { return config_; }
    double time() const { return time_; }
    double total_rate() const { return alias_.total_weight(); }

    // advance by one proposed event; returns true if the jump was accepted
    bool step();

    std::uint64_t proposed() const { return proposed_; }
    std::uint64_t accepted() const { return accepted_; }
    const std::vector<DirectedRate>& bonds() const { return bonds_; }
    std::size_t last_bond() const { return last_bond_; }

  private:
    Config config_;
    std::vector<DirectedRate> bonds_;
    AliasTable alias_;
    CounterRng rng_;
    double time_ = 0;
    std::uint64_t proposed_ = 0, accepted_ = 0;
    std::size_t last_bond_ = 0;
};

Trajectory run(const Config& initial, const RateKernel& rates, const RunOptions& opts,
               std::uint64_t seed);

// ---- basic coupling ----------------------------------------------------------

enum class SiteMark { Hole, Coupled, EtaDiscrepancy, XiDiscrepancy };

struct CoupledConfig {
    Config eta;
    Config xi;

    SiteMark mark(int z, int lane) const {
        const bool e = eta.get(z, lane), x = xi.get(z, lane);
        if (e && x) return SiteMark::Coupled;
        if (!e && !x) return SiteMark::Hole;
        return e ? SiteMark::EtaDiscrepancy : SiteMark::XiDiscrepancy;
    }
};

// discrepancies with column in [m, n]
int count_discrepancies(const CoupledConfig& cc, int m, int n);
int count_discrepancies(const CoupledConfig& cc);

enum class PairOrder { Equal, LE, GE, SupInfCandidate, BowtieCandidate, Unordered };

// Pointwise comparison, then the two-lane relations: SupInfCandidate when the
// lanes are oppositely ordered with the rightmost lane-1 discrepancy strictly
// left of the leftmost lane-0 discrepancy; BowtieCandidate when additionally
// lane 1 right of that column is all coupled particles and lane 0 left of the
// other column is all holes (window standing in for "finitely many exceptions").
PairOrder classify_pair(const CoupledConfig& cc);

struct CoupledSnapshot {
    double t = 0;
    CoupledConfig cc;
};

struct CoupledTrajectory {
    std::vector<CoupledSnapshot> snapshots;
    CoupledConfig final_cc;
    double final_time = 0;
    std::uint64_t proposed_events = 0;
    std::uint64_t accepted_events = 0;   // events that changed either marginal
    std::uint64_t coalescences = 0;
    bool discrepancy_count_monotone = true;  // D never increased along the run
    std::uint64_t seed = 0;
};

struct CoupledRunOptions {
    double T = 0;
    std::vector<double> snapshot_times;
};

// Both marginals individually evolve as run() with the same clocks.
CoupledTrajectory run_coupled(const CoupledConfig& initial, const RateKernel& rates,
                              const CoupledRunOptions& opts, std::uint64_t seed);

struct TaggedPathPoint {
    double t = 0;
    int z = 0;
    int lane = 0;
};

struct TaggedDiscrepancyPath {
    std::vector<TaggedPathPoint> path;  // position after every move, starting point first
    bool coalesced = false;
    double end_time = 0;
};

// Follows one tagged discrepancy under basic coupling until coalescence or T.
// The tag starts at `start` when given, otherwise at the first discrepancy in
// scan order. Throws when the pair has no discrepancy.
TaggedDiscrepancyPath track_tagged_discrepancy(const CoupledConfig& initial, const RateKernel& rates,
                                               double T, std::uint64_t seed,
                                               std::optional<std::pair<int, int>> start = {});

}  // namespace mlsep
