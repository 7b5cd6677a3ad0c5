#include "mlsep/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mlsep {

namespace {

struct Observable {
    std::string name;
    double value = 0;
};

// window-averaged observables: lane densities, horizontal nearest-neighbour
// pair correlations per lane, same-column vertical correlations
std::vector<Observable> observables(const Config& c) {
    const auto& g = c.geometry();
    std::vector<Observable> out;
    for (int lane = 0; lane < g.n_lanes; ++lane) {
        double s = 0;
        for (int z = g.col_min(); z <= g.col_max(); ++z) s += c.get(z, lane);
        out.push_back({"density_lane" + std::to_string(lane), s / g.length});
    }
    for (int lane = 0; lane < g.n_lanes; ++lane) {
        double s = 0;
        int cnt = 0;
        for (int z = g.col_min(); z <= g.col_max(); ++z) {
            const int zr = g.right_of(z);
            if (zr < g.col_min()) continue;
            s += c.get(z, lane) * c.get(zr, lane);
            ++cnt;
        }
        if (cnt > 0) out.push_back({"hpair_lane" + std::to_string(lane), s / cnt});
    }
    const int npairs = g.n_lanes == 2 ? 1 : g.n_lanes;
    for (int i = 0; i < npairs; ++i) {
        const int j = (i + 1) % g.n_lanes;
        double s = 0;
        for (int z = g.col_min(); z <= g.col_max(); ++z) s += c.get(z, i) * c.get(z, j);
        out.push_back({"vpair_" + std::to_string(i) + std::to_string(j), s / g.length});
    }
    return out;
}

double paired_z(const std::vector<double>& diffs) {
    const MeanStderr m = mean_stderr(diffs);
    if (m.stderr_ == 0) {
        if (m.mean == 0) return 0;
        return m.mean > 0 ? std::numeric_limits<double>::infinity()
                          : -std::numeric_limits<double>::infinity();
    }
    return m.mean / m.stderr_;
}

}  // namespace

StationarityReport stationarity_test(const MeasureSpec& spec, const RateKernel& rates,
                                     const LaneGeometry& g, const StationarityOptions& opts) {
    if (opts.replicas < 2) throw std::invalid_argument("stationarity_test: needs >= 2 replicas");
    StationarityReport rep;
    rep.replicas = opts.replicas;
    rep.T = opts.T;
    rep.alpha = opts.alpha;
    rep.seed = opts.seed;

    std::vector<std::vector<double>> at0, atT;  // [observable][replica]
    std::vector<std::string> names;
    for (int k = 0; k < opts.replicas; ++k) {
        const Config init = sample(spec, g, stream_seed(opts.seed, 2 * k));
        RunOptions ro;
        ro.T = opts.T;
        const Trajectory traj = run(init, rates, ro, stream_seed(opts.seed, 2 * k + 1));
        const auto o0 = observables(init);
        const auto oT = observables(traj.final_config);
        if (names.empty()) {
            for (const auto& o : o0) names.push_back(o.name);
            at0.assign(names.size(), {});
            atT.assign(names.size(), {});
        }
        for (std::size_t i = 0; i < names.size(); ++i) {
            at0[i].push_back(o0[i].value);
            atT[i].push_back(oT[i].value);
        }
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
        std::vector<double> diffs(at0[i].size());
        for (std::size_t k = 0; k < diffs.size(); ++k) diffs[k] = atT[i][k] - at0[i][k];
        ZTest t;
        t.name = names[i];
        t.value0 = mean_stderr(at0[i]).mean;
        t.value1 = mean_stderr(atT[i]).mean;
        t.z = paired_z(diffs);
        rep.tests.push_back(t);
    }
    apply_bonferroni(rep.tests, opts.alpha);
    rep.passed = std::none_of(rep.tests.begin(), rep.tests.end(),
                              [](const ZTest& t) { return t.significant; });
    return rep;
}

double detailed_balance_check(const MeasureSpec& spec, const RateKernel& rates,
                              const LaneGeometry& g) {
    const auto bonds = enumerate_bonds(rates, g);
    // per-site densities of the product measure behind the spec
    std::vector<double> rho(g.n_sites());
    Config idx(g);
    for (int lane = 0; lane < g.n_lanes; ++lane)
        for (int z = g.col_min(); z <= g.col_max(); ++z) {
            auto d = parent_product_density(spec, g, z, lane);
            if (!d)
                throw std::invalid_argument(
                    "detailed_balance_check: spec has no product parent density");
            rho[idx.site_index(z, lane)] = *d;
        }
    // collect rates per directed pair to pair each bond with its reverse
    double max_residual = 0;
    for (const auto& b : bonds) {
        double reverse = 0;
        for (const auto& rb : bonds)
            if (rb.from == b.to && rb.to == b.from) {
                reverse = rb.rate;
                break;
            }
        const double lhs = rho[b.from] * (1 - rho[b.to]) * b.rate;
        const double rhs = rho[b.to] * (1 - rho[b.from]) * reverse;
        max_residual = std::max(max_residual, std::abs(lhs - rhs));
    }
    return max_residual;
}

bool absorbing_state_check(const Config& config, const RateKernel& rates) {
    for (const auto& b : enumerate_bonds(rates, config.geometry()))
        if (config.get_flat(b.from) && !config.get_flat(b.to)) return false;
    return true;
}

double empirical_flux(const Trajectory& traj, std::size_t cut_index) {
    if (cut_index >= traj.net_crossings.size())
        throw std::out_of_range("empirical_flux: no such cut in the trajectory");
    if (traj.final_time <= 0) throw std::invalid_argument("empirical_flux: zero elapsed time");
    return static_cast<double>(traj.net_crossings[cut_index]) / traj.final_time;
}

FluxEstimate flux_experiment(const MeasureSpec& spec, const RateKernel& rates, const LaneGeometry& g,
                             double T, int replicas, std::uint64_t seed, int cut) {
    std::vector<double> vals;
    vals.reserve(replicas);
    for (int k = 0; k < replicas; ++k) {
        const Config init = sample(spec, g, stream_seed(seed, 2 * k));
        RunOptions ro;
        ro.T = T;
        ro.flux_cuts = {cut};
        const Trajectory traj = run(init, rates, ro, stream_seed(seed, 2 * k + 1));
        vals.push_back(empirical_flux(traj, 0));
    }
    const MeanStderr m = mean_stderr(vals);
    return {m.mean, m.stderr_, replicas, T};
}

ProfileEstimate shock_profile(const MeasureSpec& spec, const RateKernel& rates, const LaneGeometry& g,
                              double T, int replicas, std::uint64_t seed) {
    ProfileEstimate est;
    est.replicas = replicas;
    est.T = T;
    for (int z = g.col_min(); z <= g.col_max(); ++z) est.columns.push_back(z);
    const std::size_t L = g.length;
    std::vector<std::vector<std::vector<double>>> samples(
        g.n_lanes, std::vector<std::vector<double>>(L));
    for (int k = 0; k < replicas; ++k) {
        const Config init = sample(spec, g, stream_seed(seed, 2 * k));
        RunOptions ro;
        ro.T = T;
        const Trajectory traj = run(init, rates, ro, stream_seed(seed, 2 * k + 1));
        for (int lane = 0; lane < g.n_lanes; ++lane)
            for (int z = g.col_min(); z <= g.col_max(); ++z)
                samples[lane][g.column_offset(z)].push_back(
                    traj.final_config.get(z, lane) ? 1.0 : 0.0);
    }
    est.density.assign(g.n_lanes, std::vector<double>(L, 0));
    est.stderr_.assign(g.n_lanes, std::vector<double>(L, 0));
    for (int lane = 0; lane < g.n_lanes; ++lane)
        for (std::size_t i = 0; i < L; ++i) {
            const MeanStderr m = mean_stderr(samples[lane][i]);
            est.density[lane][i] = m.mean;
            est.stderr_[lane][i] = m.stderr_;
        }
    return est;
}

RotationReport rotation_invariance_test(const MeasureSpec& spec, const MultiLaneRates& rates,
                                        const LaneGeometry& g, double T, int replicas,
                                        std::uint64_t seed) {
    if (g.v_topology != VTopology::Torus)
        throw std::invalid_argument("rotation_invariance_test: requires the Torus topology");
    for (int i = 1; i < rates.n_lanes(); ++i)
        if (rates.d[i] != rates.d[0] || rates.l[i] != rates.l[0])
            throw std::invalid_argument(
                "rotation_invariance_test: requires lane-independent horizontal rates");
    RotationReport rep;
    const int n = g.n_lanes;
    // per replica: lane densities and lane pair-correlations at time T
    std::vector<std::vector<double>> dens(n), hp(n);
    for (int k = 0; k < replicas; ++k) {
        Config state = sample(spec, g, stream_seed(seed, 2 * k));
        if (T > 0) {
            RunOptions ro;
            ro.T = T;
            state = run(state, RateKernel(rates), ro, stream_seed(seed, 2 * k + 1)).final_config;
        }
        for (int lane = 0; lane < n; ++lane) {
            double s = 0, hc = 0;
            int cnt = 0;
            for (int z = g.col_min(); z <= g.col_max(); ++z) {
                s += state.get(z, lane);
                const int zr = g.right_of(z);
                if (zr >= g.col_min()) {
                    hc += state.get(z, lane) * state.get(zr, lane);
                    ++cnt;
                }
            }
            dens[lane].push_back(s / g.length);
            hp[lane].push_back(cnt ? hc / cnt : 0.0);
        }
    }
    auto add_paired = [&](const std::string& prefix, const std::vector<std::vector<double>>& obs) {
        for (int i = 0; i < n; ++i) {
            const int j = (i + 1) % n;
            std::vector<double> diffs(obs[i].size());
            for (std::size_t k = 0; k < diffs.size(); ++k) diffs[k] = obs[i][k] - obs[j][k];
            ZTest t;
            t.name = prefix + "_lane" + std::to_string(i) + "_vs_lane" + std::to_string(j);
            t.value0 = mean_stderr(obs[i]).mean;
            t.value1 = mean_stderr(obs[j]).mean;
            t.z = paired_z(diffs);
            rep.tests.push_back(t);
        }
    };
    add_paired("density", dens);
    add_paired("hpair", hp);
    apply_bonferroni(rep.tests, rep.alpha);
    rep.passed = std::none_of(rep.tests.begin(), rep.tests.end(),
                              [](const ZTest& t) { return t.significant; });
    return rep;
}

// ---- verify suites -----------------------------------------------------------

namespace {

TwoLaneRates random_kernel(CounterRng& rng, bool q_positive) {
    TwoLaneRates k;
    do {
        k.d0 = rng.next_double();
        k.l0 = rng.next_double();
        k.d1 = rng.next_double();
        k.l1 = rng.next_double();
        k.p = 0.25 + rng.next_double();
        k.q = q_positive ? 0.05 + 0.95 * rng.next_double() : rng.next_double();
    } while (!k.validate().empty());
    return normalize(k);
}

Config random_config(const LaneGeometry& g, double density, CounterRng& rng) {
    Config c(g);
    for (int lane = 0; lane < g.n_lanes; ++lane)
        for (int z = g.col_min(); z <= g.col_max(); ++z)
            if (rng.bernoulli(density)) c.set(z, lane, true);
    return c;
}

// thin one configuration below another to make an ordered pair
CoupledConfig ordered_pair(const LaneGeometry& g, CounterRng& rng) {
    CoupledConfig cc{Config(g), Config(g)};
    for (int lane = 0; lane < g.n_lanes; ++lane)
        for (int z = g.col_min(); z <= g.col_max(); ++z)
            if (rng.bernoulli(0.5)) {
                cc.xi.set(z, lane, true);
                if (rng.bernoulli(0.6)) cc.eta.set(z, lane, true);
            }
    return cc;
}

bool leq(const Config& a, const Config& b) {
    const auto& g = a.geometry();
    for (int lane = 0; lane < g.n_lanes; ++lane)
        for (int z = g.col_min(); z <= g.col_max(); ++z)
            if (a.get(z, lane) && !b.get(z, lane)) return false;
    return true;
}

SuiteResult suite_invariance(std::uint64_t seed) {
    SuiteResult res{"invariance", {}};
    CounterRng rng(stream_seed(seed, 0xA11CE));
    const LaneGeometry ring = LaneGeometry::ring(128, 2);

    {
        TwoLaneRates k{1.0, 0.5, 0.7, 0.3, 4.0, 1.0};
        BernoulliTotal spec{1.0, k.p, k.q};
        StationarityOptions so;
        so.T = 30;
        so.replicas = 120;
        so.seed = stream_seed(seed, 1);
        res.checks.push_back({"nu_rho stationary (p=4,q=1, rho=1)",
                              stationarity_test(spec, RateKernel(k), ring, so).passed});
    }
    for (int i = 0; i < 2; ++i) {
        const TwoLaneRates k = random_kernel(rng, true);
        BernoulliTotal spec{0.8, k.p, k.q};
        StationarityOptions so;
        so.T = 30;
        so.replicas = 120;
        so.seed = stream_seed(seed, 10 + i);
        res.checks.push_back({"nu_rho stationary (random kernel " + std::to_string(i) + ")",
                              stationarity_test(spec, RateKernel(k), ring, so).passed});
    }
    {
        // F-violating product measure must drift; T doubles until it does
        TwoLaneRates k{1.0, 0.5, 0.7, 0.3, 4.0, 1.0};
        TwoRateBernoulli spec{0.5, 0.5};
        bool failed = false;
        for (double T = 5; T <= 80 && !failed; T *= 2) {
            StationarityOptions so;
            so.T = T;
            so.replicas = 120;
            so.seed = stream_seed(seed, 2);
            failed = !stationarity_test(spec, RateKernel(k), ring, so).passed;
        }
        res.checks.push_back({"F-violating negative control fails", failed});
    }
    return res;
}

SuiteResult suite_reversibility(std::uint64_t seed) {
    (void)seed;
    SuiteResult res{"reversibility", {}};
    const LaneGeometry win = LaneGeometry::closed(50, 2);

    {
        TwoLaneRates k{2, 1, 4, 2, 2, 1};  // theta = 2, lambda = 2
        for (double c : {1.0, 3.0}) {
            ReversibleProfile spec{2.0, c, 2.0, 0};
            const double r = detailed_balance_check(spec, RateKernel(k), win);
            res.checks.push_back({"theta profile residual < 1e-14 (c=" + std::to_string(c) + ")",
                                  r < 1e-14});
        }
    }
    {
        TwoLaneRates k{2, 1, 3, 1, 1, 0};  // q = 0: partial blocking, lane 1 profile
        PartialBlocking spec{PartialBlockingKind::EmptyLane0, 0, 3, 1, 1};
        res.checks.push_back({"partial blocking product residual < 1e-14 (l1 > 0)",
                              detailed_balance_check(spec, RateKernel(k), win) < 1e-14});
    }
    {
        TwoLaneRates k{3, 1, 1, 0, 1, 0};  // lane 1 TASEP
        PartialBlocking spec{PartialBlockingKind::EmptyLane0, 0, 1, 0, 0.5};
        res.checks.push_back({"partial blocking product residual < 1e-14 (TASEP lane)",
                              detailed_balance_check(spec, RateKernel(k), win) < 1e-14});
    }
    {
        TwoLaneRates k{1, 0, 2, 0, 1.5, 0};  // fully degenerate TASEP case
        DiracStep spec{3, -2};
        res.checks.push_back({"double step residual = 0",
                              detailed_balance_check(spec, RateKernel(k), win) == 0.0});
        DiracStep bad{-2, 3};  // i < j: enabled vertical bonds
        bool nonzero = false;
        try {
            nonzero = detailed_balance_check(bad, RateKernel(k), win) > 0;
        } catch (const std::invalid_argument&) {
            nonzero = false;
        }
        res.checks.push_back({"i < j double step violates balance", nonzero});
    }
    return res;
}

SuiteResult suite_coupling(std::uint64_t seed) {
    SuiteResult res{"coupling", {}};
    CounterRng rng(stream_seed(seed, 0xC0));
    const LaneGeometry ring = LaneGeometry::ring(32, 2);

    int order_violations = 0, monotone_violations = 0, ledger_mismatches = 0;
    const int n_runs = 150;
    for (int i = 0; i < n_runs; ++i) {
        const TwoLaneRates k = random_kernel(rng, false);
        CoupledRunOptions co;
        co.T = 8;
        co.snapshot_times = {2, 5, 8};
        {
            const CoupledConfig cc = ordered_pair(ring, rng);
            const auto traj = run_coupled(cc, RateKernel(k), co, stream_seed(seed, 100 + i));
            for (const auto& s : traj.snapshots)
                if (!leq(s.cc.eta, s.cc.xi)) ++order_violations;
        }
        {
            CoupledConfig cc{random_config(ring, 0.5, rng), random_config(ring, 0.5, rng)};
            const int d0 = count_discrepancies(cc);
            const auto traj = run_coupled(cc, RateKernel(k), co, stream_seed(seed, 500 + i));
            if (!traj.discrepancy_count_monotone) ++monotone_violations;
            const int dT = count_discrepancies(traj.final_cc);
            if (dT != d0 - 2 * static_cast<int>(traj.coalescences)) ++ledger_mismatches;
        }
    }
    res.checks.push_back({"attractiveness: zero order violations", order_violations == 0});
    res.checks.push_back({"discrepancy count never increases", monotone_violations == 0});
    res.checks.push_back({"every coalescence removes exactly two discrepancies",
                          ledger_mismatches == 0});
    return res;
}

SuiteResult suite_shocks(std::uint64_t seed) {
    SuiteResult res{"shocks", {}};
    const LaneGeometry win = LaneGeometry::closed(25, 2);
    TwoLaneRates k{2, 1, 4, 2, 2, 1};  // theta = 2 on both lanes, lambda = 2

    {
        ConditionedBlocking spec{BlockingParity::Even, 0, 1.0, 2.0, 2.0};
        StationarityOptions so;
        so.T = 25;
        so.replicas = 100;
        so.seed = stream_seed(seed, 3);
        res.checks.push_back({"conditioned blocking nu_0 stationary",
                              stationarity_test(spec, RateKernel(k), win, so).passed});

        // H2 conservation along trajectories, asserted inside run()
        bool conserved = true;
        try {
            RunOptions ro;
            ro.T = 25;
            ro.check_H2 = true;
            ro.snapshot_times = {5, 10, 20};
            run(sample(spec, win, stream_seed(seed, 4)), RateKernel(k), ro, stream_seed(seed, 5));
        } catch (const std::logic_error&) {
            conserved = false;
        }
        res.checks.push_back({"H2 conserved along the trajectory", conserved});

        const ProfileEstimate prof =
            shock_profile(spec, RateKernel(k), win, 20, 120, stream_seed(seed, 6));
        const int tail = std::max(1, static_cast<int>(prof.columns.size() / 10));
        bool tails_ok = true;
        for (int lane = 0; lane < 2; ++lane)
            for (int i = 0; i < tail; ++i) {
                const std::size_t last = prof.columns.size() - 1 - i;
                tails_ok &= prof.density[lane][i] <= 3 * prof.stderr_[lane][i] + 0.02;
                tails_ok &= 1 - prof.density[lane][last] <= 3 * prof.stderr_[lane][last] + 0.02;
            }
        res.checks.push_back({"blocking profile tails are 0-left / 1-right", tails_ok});
    }
    {
        TwoLaneRates tasep{1, 0, 2, 0, 1.5, 0};
        Config absorbing(win);
        fill_lane_step(absorbing, 0, 2);
        fill_lane_step(absorbing, 1, -1);
        res.checks.push_back({"eta(i>=j) absorbing for the TASEP case",
                              absorbing_state_check(absorbing, RateKernel(tasep))});
        Config not_absorbing(win);
        fill_lane_step(not_absorbing, 0, -1);
        fill_lane_step(not_absorbing, 1, 2);
        res.checks.push_back({"eta(i<j) not absorbing",
                              !absorbing_state_check(not_absorbing, RateKernel(tasep))});
    }
    return res;
}

SuiteResult suite_multilane(std::uint64_t seed) {
    SuiteResult res{"multilane", {}};
    const int n = 3;
    const LaneGeometry torus = LaneGeometry::ring(96, n);
    MultiLaneRates k;
    k.d = {1.0, 1.0, 1.0};
    k.l = {0.3, 0.3, 0.3};
    k.Q = {0.0, 1.0, 0.5};

    {
        const MeasureSpec spec = multilane_nu_rho(n, 1.5);
        StationarityOptions so;
        so.T = 25;
        so.replicas = 100;
        so.seed = stream_seed(seed, 7);
        res.checks.push_back({"nu_rho stationary on the 3-lane torus",
                              stationarity_test(spec, RateKernel(k), torus, so).passed});
        res.checks.push_back(
            {"nu_rho rotation invariant",
             rotation_invariance_test(spec, k, torus, 20, 120, stream_seed(seed, 8)).passed});
    }
    {
        // lane-biased start must fail the rotation test at T = 0
        const LaneGeometry& g = torus;
        std::vector<std::vector<double>> dens(n);
        RotationReport rep;
        for (int kk = 0; kk < 60; ++kk) {
            Config c(g);
            for (int z = g.col_min(); z <= g.col_max(); ++z) c.set(z, 0, true);
            for (int lane = 0; lane < n; ++lane) {
                double s = 0;
                for (int z = g.col_min(); z <= g.col_max(); ++z) s += c.get(z, lane);
                dens[lane].push_back(s / g.length);
            }
        }
        for (int i = 0; i < n; ++i) {
            const int j = (i + 1) % n;
            std::vector<double> diffs(dens[i].size());
            for (std::size_t kk = 0; kk < diffs.size(); ++kk) diffs[kk] = dens[i][kk] - dens[j][kk];
            ZTest t;
            t.name = "density";
            t.z = paired_z(diffs);
            rep.tests.push_back(t);
        }
        apply_bonferroni(rep.tests, rep.alpha);
        const bool failed = std::any_of(rep.tests.begin(), rep.tests.end(),
                                        [](const ZTest& t) { return t.significant; });
        res.checks.push_back({"lane-biased control fails the rotation test", failed});
    }
    {
        const MeasureSpec spec = multilane_nu_rho(n, 1.5);
        const auto est = flux_experiment(spec, RateKernel(k), torus, 25, 100, stream_seed(seed, 9),
                                         torus.col_min());
        const double expected = multilane_G(k, 1.5);
        res.checks.push_back({"empirical current matches the multilane flux",
                              std::abs(est.mean - expected) <= 3 * est.stderr_});
    }
    return res;
}

}  // namespace

std::vector<std::string> verify_suite_names() {
    return {"invariance", "reversibility", "coupling", "shocks", "multilane"};
}

SuiteResult run_verify_suite(const std::string& name, std::uint64_t seed) {
    if (name == "invariance") return suite_invariance(seed);
    if (name == "reversibility") return suite_reversibility(seed);
    if (name == "coupling") return suite_coupling(seed);
    if (name == "shocks") return suite_shocks(seed);
    if (name == "multilane") return suite_multilane(seed);
    throw std::invalid_argument("unknown verify suite: " + name);
}

}  // namespace mlsep
