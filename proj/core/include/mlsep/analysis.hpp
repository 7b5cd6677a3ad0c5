#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mlsep/dynamics.hpp"
#include "mlsep/flux.hpp"
#include "mlsep/kernels.hpp"
#include "mlsep/measures.hpp"
#include "mlsep/stats.hpp"

namespace mlsep {

// Statistical stationarity check: sample R independent replicas from the
// candidate measure, evolve each to time T, and compare lane densities,
// horizontal nearest-neighbour pair correlations and same-column vertical
// correlations between t = 0 and t = T with Bonferroni-corrected z tests.

struct StationarityReport {
    std::vector<ZTest> tests;  // value0 = t=0 mean, value1 = t=T mean
    int replicas = 0;
    double T = 0;
    double alpha = 0.01;
    std::uint64_t seed = 0;
    bool passed = false;
};

struct StationarityOptions {
    double T = 50;
    int replicas = 200;
    double alpha = 0.01;
    std::uint64_t seed = 1;
};

StationarityReport stationarity_test(const MeasureSpec& spec, const RateKernel& rates,
                                     const LaneGeometry& g, const StationarityOptions& opts);

// max |rho_x (1-rho_y) p(x,y) - rho_y (1-rho_x) p(y,x)| over the bonds of the
// window, for the product measure behind the spec
double detailed_balance_check(const MeasureSpec& spec, const RateKernel& rates,
                              const LaneGeometry& g);

// true iff no bond has an occupied source and vacant target
bool absorbing_state_check(const Config& config, const RateKernel& rates);

struct FluxEstimate {
    double mean = 0;
    double stderr_ = 0;
    int replicas = 0;
    double T = 0;
};

// time-averaged signed crossings at the cut, from one trajectory
double empirical_flux(const Trajectory& traj, std::size_t cut_index = 0);

// replica experiment: stationary start from the spec, net current at the cut
FluxEstimate flux_experiment(const MeasureSpec& spec, const RateKernel& rates, const LaneGeometry& g,
                             double T, int replicas, std::uint64_t seed, int cut);

struct ProfileEstimate {
    std::vector<int> columns;
    // density[lane][column index]: mean over replicas at time T
    std::vector<std::vector<double>> density;
    std::vector<std::vector<double>> stderr_;
    int replicas = 0;
    double T = 0;
};

ProfileEstimate shock_profile(const MeasureSpec& spec, const RateKernel& rates, const LaneGeometry& g,
                              double T, int replicas, std::uint64_t seed);

struct RotationReport {
    std::vector<ZTest> tests;  // lane observable vs its rotation by one lane
    bool passed = false;
    double alpha = 0.01;
};

// Compares lane-resolved observables at time T against their lane-rotated
// counterparts; requires the Torus topology and lane-independent horizontal
// rates. T = 0 compares the initial ensemble itself.
RotationReport rotation_invariance_test(const MeasureSpec& spec, const MultiLaneRates& rates,
                                        const LaneGeometry& g, double T, int replicas,
                                        std::uint64_t seed);

// ---- verify suites -----------------------------------------------------------

struct SuiteResult {
    std::string name;
    std::vector<std::pair<std::string, bool>> checks;
    bool passed() const {
        for (const auto& [_, ok] : checks)
            if (!ok) return false;
        return true;
    }
};

// invariance | reversibility | coupling | shocks | multilane
SuiteResult run_verify_suite(const std::string& name, std::uint64_t seed);
std::vector<std::string> verify_suite_names();

}  // namespace mlsep
