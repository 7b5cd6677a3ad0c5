#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mlsep/kernels.hpp"
#include "mlsep/lattice.hpp"
#include "mlsep/rng.hpp"

namespace mlsep {

// ---- the invariant-measure families ----------------------------------------

// product measure with constant density rho_i on lane i
struct TwoRateBernoulli {
    double rho0 = 0, rho1 = 0;
};

// product measure nu_rho with total density rho over the lanes; the split
// across lanes is the unique point of the F-curve for vertical ratio q/p
// (two-lane), or the homogeneous density rho/n (torus)
struct BernoulliTotal {
    double rho = 0;
    double p = 1, q = 1;  // only q/p matters for the two-lane split
};

// reversible product profile rho_{z,i} = c theta^(z-center) lambda^i / (1 + ...)
struct ReversibleProfile {
    double theta = 2;   // d0/l0 = d1/l1
    double c = 1;
    double lambda = 1;  // p/q
    int center = 0;
};

enum class BlockingParity { Even, Odd };  // H2 = 2n resp. 2n+1

// reversible profile conditioned on H2; independent of c
struct ConditionedBlocking {
    BlockingParity kind = BlockingParity::Even;
    int n = 0;
    double c = 1;
    double theta = 2;
    double lambda = 1;
};

enum class PartialBlockingKind {
    EmptyLane0,           // lane 0 empty, lane 1 a blocking measure
    FullLane1,            // lane 1 full, lane 0 a blocking measure
    EmptyLane0Reflected,  // lane 0 empty, lane 1 a reflected blocking measure
};

// one lane frozen full/empty, the other carrying a single-lane blocking measure
struct PartialBlocking {
    PartialBlockingKind kind = PartialBlockingKind::EmptyLane0;
    int n = 0;
    double d = 1, l = 0;  // horizontal rates of the unfrozen lane; l = 0 gives the step
    double c = 1;
};

// Dirac measure on the double step eta(z,0) = 1_{z>i}, eta(z,1) = 1_{z>j}
struct DiracStep {
    long long i = 0, j = 0;  // kStepPlusInf / kStepMinusInf encode +-infinity
};

enum class TasepPairKind { Breve, Hat };  // delta on the full step / two-state mixture

// amplitude-2 blocking measures of the l0 = l1 = 0 < q case
struct TasepPairBlocking {
    TasepPairKind kind = TasepPairKind::Breve;
    int z = 0;
    double p = 1, q = 1;
};

enum class MultilaneBlockingVariant { ConditionedProfile, UniformSubset };

struct MultilaneBlocking {
    int i = 0;  // conserved label, 0..n-1 for UniformSubset
    MultilaneBlockingVariant variant = MultilaneBlockingVariant::ConditionedProfile;
    double theta = 2;  // d_i/l_i, lane independent (ConditionedProfile)
    double c = 1;
};

using MeasureSpec = std::variant<TwoRateBernoulli, BernoulliTotal, ReversibleProfile,
                                 ConditionedBlocking, PartialBlocking, DiracStep,
                                 TasepPairBlocking, MultilaneBlocking>;

// ---- operations -------------------------------------------------------------

// Unique (rho0, rho1) on the F-curve p rho0 (1-rho1) = q rho1 (1-rho0) with
// rho0 + rho1 = rho. Continuous and nondecreasing in rho.
std::pair<double, double> solve_F(const TwoLaneRates& rates, double rho);
std::pair<double, double> solve_F(double p, double q, double rho);

// residual of the F-relation at (rho0, rho1)
double F_residual(double p, double q, double rho0, double rho1);

// Reversible-profile densities.
// two-lane profile: requires theta = d0/l0 = d1/l1 (l0, l1 > 0) and q > 0
double blocking_profile(const TwoLaneRates& rates, int z, int lane, double c);
// the same value from the reduced parameters
double profile_density(double theta, double lambda, double c, int z, int lane);
// single-lane profile for l > 0
double single_lane_profile(double d, double l, double c, int idx);
// single-lane TASEP profile, step at n with weight c/(1+c) on site n
double tasep_profile(int n, double c, int idx);

// Per-site density of a product-form spec (nullopt for mixtures/conditioned
// specs, which are not product measures).
std::optional<double> site_density(const MeasureSpec& spec, const LaneGeometry& g, int z, int lane);
bool is_product_form(const MeasureSpec& spec);

// Density of the reversible product measure behind the spec: the spec itself
// for product families, the unconditioned profile for the conditioned ones.
// nullopt for genuine mixtures (hat pair, uniform subset).
std::optional<double> parent_product_density(const MeasureSpec& spec, const LaneGeometry& g, int z,
                                             int lane);

struct SampleStats {
    long long attempts = 0;  // rejection attempts behind the last draw
};

// One exact draw. Product families live on Periodic geometry, blocking
// families on Closed geometry. Throws when the geometry is incompatible or
// when the rejection budget is exhausted (the message reports the acceptance
// rate seen so far).
Config sample(const MeasureSpec& spec, const LaneGeometry& g, std::uint64_t seed,
              SampleStats* stats = nullptr);

// log of mu(a)/mu(b) for a product-form spec, via site-wise odds. Returns
// +-infinity when exactly one of the configurations is outside the support;
// throws when both are (0/0).
double log_density_ratio(const MeasureSpec& spec, const Config& a, const Config& b);

// homogeneous product measure nu_rho of the n-lane torus model
BernoulliTotal multilane_nu_rho(int n_lanes, double rho);

// Exact conditional draw for the conditioned families (conditioned blocking,
// multilane conditioned profile, partial blocking with l > 0), by dynamic
// programming over the site count instead of rejection: on the window the
// height functionals are the particle count up to a constant, so the
// conditioning is a Poisson-binomial total-count conditioning. Same law as
// sample(); other specs fall through to sample().
Config sample_exact_conditional(const MeasureSpec& spec, const LaneGeometry& g, std::uint64_t seed);

// independent Bernoulli(dens[i]) draws conditioned on the total equal to k
std::vector<std::uint8_t> draw_conditioned_total(const std::vector<double>& dens, int k,
                                                 CounterRng& rng);

// rejection budget for conditioned samplers
inline constexpr long long kRejectionBudget = 1'000'000;

}  // namespace mlsep
