#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mlsep/lattice.hpp"

namespace mlsep {

// Jump rates of the two-lane process: d_i right, l_i left on lane i,
// p down (lane 0 -> 1), q up (lane 1 -> 0).
struct TwoLaneRates {
    double d0 = 0, l0 = 0, d1 = 0, l1 = 0, p = 0, q = 0;

    double gamma0() const { return d0 - l0; }
    double gamma1() const { return d1 - l1; }
    double r() const;       // q/p, requires p > 0
    double dparam() const;  // gamma0/(gamma0+gamma1), requires the sum nonzero

    // the standing assumptions: lanes can move, lanes are connected
    std::vector<std::string> validate() const;

    bool operator==(const TwoLaneRates&) const = default;
};

// Per-lane rates plus a translation-invariant vertical kernel Q on the torus
// T_n; Q[k] is the rate of a vertical jump by +k lanes (k = 1..n-1, Q[0] ignored).
struct MultiLaneRates {
    std::vector<double> d, l;
    std::vector<double> Q;

    int n_lanes() const { return static_cast<int>(d.size()); }
    double gamma(int i) const { return d[i] - l[i]; }
    double gamma_sum() const;
    std::vector<std::string> validate() const;
};

using RateKernel = std::variant<TwoLaneRates, MultiLaneRates>;

struct DirectedRate {
    std::uint32_t from = 0;  // flat site index, lane * L + column_offset
    std::uint32_t to = 0;
    double rate = 0;
};

// Every nonzero-rate directed pair of the kernel restricted to the window.
// Closed geometry omits the wrap-around bonds.
std::vector<DirectedRate> enumerate_bonds(const TwoLaneRates& rates, const LaneGeometry& g);
std::vector<DirectedRate> enumerate_bonds(const MultiLaneRates& rates, const LaneGeometry& g);
std::vector<DirectedRate> enumerate_bonds(const RateKernel& rates, const LaneGeometry& g);

double total_rate_mass(const std::vector<DirectedRate>& bonds);

// The three symmetries of the two-lane process.
enum class Symmetry { LaneReflect, LaneExchange, ParticleHole };

// (sigma eta)(z,i) = eta(-z,i); (sigma' eta)(z,i) = eta(z,1-i);
// (sigma'' eta)(z,i) = 1 - eta(z,i). Reflection is about column 0 on a Closed
// window and about z -> -z mod L on a ring.
Config apply_symmetry(Symmetry which, const Config& config);

// Parameter set of the image process, one case per symmetry.
TwoLaneRates conjugate_rates(Symmetry which, const TwoLaneRates& rates);

// Does (d0,l0,d1,l1,p,q) satisfy gamma0 >= 0, gamma0+gamma1 >= 0, p >= q, p > 0?
bool is_normalized(const TwoLaneRates& rates);

// Composition of symmetries that maps the given rates to a normalized set.
// Applied left to right. Empty when the rates already satisfy the convention;
// nullopt when no composition works (exactly when p + q = 0).
std::optional<std::vector<Symmetry>> normalizing_symmetries(const TwoLaneRates& rates);
TwoLaneRates normalize(const TwoLaneRates& rates);  // throws if p + q = 0

// Closed-form weak-irreducibility criterion: every pair of distinct sites is
// connected by a positive-rate directed path in at least one direction. For
// two-lane kernels this fails exactly when, after normalization, q = 0 and
// both lanes are totally asymmetric in the same direction
// (d0*l0 + d1*l1 = 0 < d0*d1 + l0*l1). Multilane kernels with an irreducible
// vertical kernel are always weakly irreducible.
bool is_weakly_irreducible(const TwoLaneRates& rates);
bool is_weakly_irreducible(const MultiLaneRates& rates);

// Human-readable key-value kernel file: "d0 = 1.0" style lines for two-lane,
// "d = 1 0.5 2" / "Q = 0 1 0.5" arrays for multilane. '#' starts a comment.
RateKernel parse_kernel_file(const std::string& path);
RateKernel parse_kernel_text(const std::string& text);

}  // namespace mlsep
