#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "mlsep/analysis.hpp"
#include "mlsep/serialize.hpp"

using namespace mlsep;

TEST_CASE("normal quantile sanity") {
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-5));
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
    CHECK(normal_quantile(0.995) == doctest::Approx(2.575829).epsilon(1e-5));
    CHECK_THROWS_AS(normal_quantile(0.0), std::domain_error);
}

TEST_CASE("stationarity test passes on the F-curve and fails off it") {
    const auto ring = LaneGeometry::ring(64, 2);
    const TwoLaneRates k{1.0, 0.5, 0.7, 0.3, 4.0, 1.0};
    StationarityOptions so;
    so.T = 20;
    so.replicas = 80;
    so.seed = 12;
    SUBCASE("nu_rho passes") {
        const auto rep = stationarity_test(BernoulliTotal{1.0, 4, 1}, RateKernel(k), ring, so);
        CHECK(rep.passed);
        CHECK(rep.tests.size() >= 5);
    }
    SUBCASE("an F-violating product measure drifts") {
        const auto rep = stationarity_test(TwoRateBernoulli{0.5, 0.5}, RateKernel(k), ring, so);
        CHECK_FALSE(rep.passed);
    }
    SUBCASE("report serializes") {
        const auto rep = stationarity_test(BernoulliTotal{1.0, 4, 1}, RateKernel(k), ring, so);
        const std::string j = stationarity_report_to_json(rep);
        CHECK(j.find("density_lane0") != std::string::npos);
    }
}

TEST_CASE("detailed balance residuals") {
    const auto win = LaneGeometry::closed(50, 2);
    SUBCASE("theta profile solves the balance equations on every bond") {
        const TwoLaneRates k{2, 1, 4, 2, 2, 1};
        CHECK(detailed_balance_check(ReversibleProfile{2, 1, 2, 0}, RateKernel(k), win) < 1e-14);
        CHECK(detailed_balance_check(ReversibleProfile{2, 3, 2, 0}, RateKernel(k), win) < 1e-14);
    }
    SUBCASE("lane-mismatched theta leaves a residual") {
        const TwoLaneRates k{2, 1, 3, 1, 2, 1};  // d1/l1 = 3 != 2
        CHECK(detailed_balance_check(ReversibleProfile{2, 1, 2, 0}, RateKernel(k), win) > 1e-6);
    }
    SUBCASE("TASEP partial product has zero residual") {
        const TwoLaneRates k{3, 1, 1, 0, 1, 0};
        const PartialBlocking spec{PartialBlockingKind::EmptyLane0, 0, 1, 0, 0};
        CHECK(detailed_balance_check(spec, RateKernel(k), win) == 0.0);
        const PartialBlocking with_c{PartialBlockingKind::EmptyLane0, 0, 1, 0, 2.0};
        CHECK(detailed_balance_check(with_c, RateKernel(k), win) == 0.0);
    }
    SUBCASE("mixtures are rejected") {
        const TwoLaneRates k{1, 0, 1, 0, 3, 1};
        CHECK_THROWS_AS(detailed_balance_check(TasepPairBlocking{TasepPairKind::Hat, 0, 3, 1},
                                               RateKernel(k), win),
                        std::invalid_argument);
    }
}

TEST_CASE("absorbing states of the doubly degenerate TASEP") {
    const auto win = LaneGeometry::closed(8, 2);
    const RateKernel k = TwoLaneRates{1, 0, 2, 0, 1.5, 0};
    SUBCASE("eta(i >= j) is absorbing") {
        Config c(win);
        fill_lane_step(c, 0, 3);
        fill_lane_step(c, 1, 1);
        CHECK(absorbing_state_check(c, k));
    }
    SUBCASE("eta(i < j) has an enabled vertical bond") {
        Config c(win);
        fill_lane_step(c, 0, 1);
        fill_lane_step(c, 1, 3);
        CHECK_FALSE(absorbing_state_check(c, k));
    }
    SUBCASE("full configuration is absorbing for any kernel") {
        CHECK(absorbing_state_check(all_full(win), RateKernel(TwoLaneRates{1, 1, 1, 1, 1, 1})));
    }
}

TEST_CASE("empirical flux") {
    const auto ring = LaneGeometry::ring(64, 2);
    const TwoLaneRates k{1, 0.5, 0.7, 0.3, 1, 1};
    SUBCASE("empty and full carry no current") {
        for (double rho : {0.0, 2.0}) {
            const auto est =
                flux_experiment(BernoulliTotal{rho, 1, 1}, RateKernel(k), ring, 10, 20, 3, 5);
            CHECK(est.mean == 0.0);
            CHECK(est.stderr_ == 0.0);
        }
    }
    SUBCASE("p = q at rho = 1 matches the parabola") {
        const auto est =
            flux_experiment(BernoulliTotal{1.0, 1, 1}, RateKernel(k), ring, 40, 120, 5, 5);
        const double expect = FluxCurve(k).G(1.0);
        CHECK(std::abs(est.mean - expect) <= 3 * est.stderr_);
    }
}

TEST_CASE("shock profile estimates") {
    const auto win = LaneGeometry::closed(15, 2);
    SUBCASE("double step at T = 0 is the exact indicator") {
        const RateKernel k = TwoLaneRates{1, 0, 2, 0, 1.5, 0};
        const auto est = shock_profile(DiracStep{2, -1}, k, win, 0, 10, 3);
        for (int z = -15; z <= 15; ++z) {
            const auto i = static_cast<std::size_t>(z + 15);
            CHECK(est.density[0][i] == (z > 2 ? 1.0 : 0.0));
            CHECK(est.density[1][i] == (z > -1 ? 1.0 : 0.0));
        }
    }
    SUBCASE("conditioned blocking tails") {
        const TwoLaneRates k{2, 1, 4, 2, 2, 1};
        const ConditionedBlocking spec{BlockingParity::Even, 0, 1, 2, 2};
        const auto est = shock_profile(spec, RateKernel(k), win, 10, 60, 9);
        CHECK(est.density[0].front() < 0.05);
        CHECK(est.density[1].front() < 0.05);
        CHECK(est.density[0].back() > 0.95);
        CHECK(est.density[1].back() > 0.95);
    }
    SUBCASE("partial blocking keeps lane 0 empty and lane 1 on the profile") {
        const TwoLaneRates k{2, 1, 3, 1, 1, 0};  // q = 0
        const PartialBlocking spec{PartialBlockingKind::EmptyLane0, 0, 3, 1, 1};
        const auto est = shock_profile(spec, RateKernel(k), win, 8, 80, 13);
        for (double d : est.density[0]) CHECK(d == 0.0);
        // lane 1 time-T marginal stays near the time-0 sampler marginal
        std::vector<double> at0(est.columns.size(), 0);
        const int R = 80;
        for (int r = 0; r < R; ++r) {
            const Config c = sample(spec, win, stream_seed(14, r));
            for (std::size_t i = 0; i < est.columns.size(); ++i)
                at0[i] += c.get(est.columns[i], 1) / static_cast<double>(R);
        }
        for (std::size_t i = 0; i < est.columns.size(); ++i)
            CHECK(std::abs(est.density[1][i] - at0[i]) < 4 * est.stderr_[1][i] + 0.06);
    }
}

TEST_CASE("partial blocking measures are stationary in their parameter regimes") {
    const auto win = LaneGeometry::closed(12, 2);
    StationarityOptions so;
    so.T = 15;
    so.replicas = 80;
    so.seed = 41;
    SUBCASE("lane 0 empty, lane 1 blocking (q = 0, both drifts positive)") {
        const TwoLaneRates k{2, 1, 3, 1, 1, 0};
        const PartialBlocking spec{PartialBlockingKind::EmptyLane0, 0, 3, 1, 1};
        const auto rep = stationarity_test(spec, RateKernel(k), win, so);
        CHECK(rep.passed);
    }
    SUBCASE("lane 1 full, lane 0 blocking") {
        const TwoLaneRates k{3, 1, 2, 1, 1, 0};
        const PartialBlocking spec{PartialBlockingKind::FullLane1, 0, 3, 1, 1};
        CHECK(stationarity_test(spec, RateKernel(k), win, so).passed);
    }
    SUBCASE("reflected blocking on a lane with negative drift") {
        // gamma1 < 0 < gamma0, q = 0: lane 1 is full to the left; the profile
        // parameters are those of the reflected walk (d, l) = (l1, d1)
        const TwoLaneRates k{2, 1, 1, 3, 1, 0};
        const PartialBlocking spec{PartialBlockingKind::EmptyLane0Reflected, 0, 3, 1, 1};
        CHECK(stationarity_test(spec, RateKernel(k), win, so).passed);
        CHECK(detailed_balance_check(spec, RateKernel(k), win) < 1e-14);
        // the lane-1 marginal is full-left / empty-right
        const Config c = sample(spec, win, 43);
        CHECK(c.get(-12, 1));
        CHECK_FALSE(c.get(12, 1));
    }
    SUBCASE("the full step is absorbing when l0 = l1 = 0 < q") {
        const TwoLaneRates k{1, 0, 2, 0, 3, 1};
        const Config breve = sample(TasepPairBlocking{TasepPairKind::Breve, 0, 3, 1}, win, 5);
        CHECK(absorbing_state_check(breve, RateKernel(k)));
    }
}

TEST_CASE("rotation invariance") {
    const auto torus = LaneGeometry::ring(48, 3);
    MultiLaneRates k;
    k.d = {1, 1, 1};
    k.l = {0.3, 0.3, 0.3};
    k.Q = {0, 1, 0.5};
    SUBCASE("homogeneous product start passes") {
        const auto rep = rotation_invariance_test(multilane_nu_rho(3, 1.2), k, torus, 10, 80, 21);
        CHECK(rep.passed);
        CHECK(rotation_report_to_json(rep).find("density_lane0_vs_lane1") != std::string::npos);
    }
    SUBCASE("lane-dependent rates are rejected") {
        MultiLaneRates bad = k;
        bad.d[1] = 2;
        CHECK_THROWS_AS(rotation_invariance_test(multilane_nu_rho(3, 1.2), bad, torus, 10, 10, 21),
                        std::invalid_argument);
    }
    SUBCASE("conditioned multilane profile is stationary (equal theta, torus Q)") {
        const auto win = LaneGeometry::closed(10, 3);
        LaneGeometry g = win;
        g.v_topology = VTopology::Torus;
        MultiLaneRates mk;
        mk.d = {2, 2, 2};
        mk.l = {1, 1, 1};  // theta = 2 on every lane
        mk.Q = {0, 1, 0.5};
        const MultilaneBlocking spec{1, MultilaneBlockingVariant::ConditionedProfile, 2.0, 1.0};
        StationarityOptions so;
        so.T = 15;
        so.replicas = 80;
        so.seed = 31;
        CHECK(stationarity_test(spec, RateKernel(mk), g, so).passed);
        // the height label is conserved by the dynamics
        RunOptions ro;
        ro.T = 15;
        ro.check_H2 = true;
        run(sample(spec, g, 5), RateKernel(mk), ro, 6);
    }
    SUBCASE("uniform-subset blocking passes on a closed window") {
        const auto win = LaneGeometry::closed(10, 3);
        MultiLaneRates tasep;
        tasep.d = {1, 1, 1};
        tasep.l = {0, 0, 0};
        tasep.Q = {0, 1, 0};
        const MultilaneBlocking spec{1, MultilaneBlockingVariant::UniformSubset, 2, 1};
        // the closed window has no Torus ring constraint on geometry topology here
        LaneGeometry win_torus = win;
        win_torus.v_topology = VTopology::Torus;
        const auto rep = rotation_invariance_test(spec, tasep, win_torus, 5, 80, 23);
        CHECK(rep.passed);
    }
}

TEST_CASE("verify suite names are stable") {
    const auto names = verify_suite_names();
    REQUIRE(names.size() == 5);
    CHECK(names[0] == "invariance");
    CHECK_THROWS_AS(run_verify_suite("nope", 1), std::invalid_argument);
}
