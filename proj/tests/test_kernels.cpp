#include <doctest.h>

#include <set>

#include "mlsep/kernels.hpp"
#include "mlsep/rng.hpp"

using namespace mlsep;

TEST_CASE("enumerate_bonds on small windows") {
    SUBCASE("two-lane ring with only d0") {
        const auto g = LaneGeometry::ring(2, 2);
        const auto bonds = enumerate_bonds(TwoLaneRates{1, 0, 0, 0, 0, 0}, g);
        REQUIRE(bonds.size() == 2);
        for (const auto& b : bonds) {
            CHECK(b.rate == 1.0);
            CHECK(b.from < 2);  // lane 0 occupies flat sites 0..1
            CHECK(b.to < 2);
        }
    }
    SUBCASE("closed window with only p") {
        const auto g = LaneGeometry::closed(1, 2);  // 3 columns
        const auto bonds = enumerate_bonds(TwoLaneRates{0, 0, 0, 0, 1, 0}, g);
        REQUIRE(bonds.size() == 3);
        for (const auto& b : bonds) CHECK(b.to == b.from + 3);  // lane 0 -> lane 1
    }
    SUBCASE("vertical 3-cycle") {
        LaneGeometry g;
        g.n_lanes = 3;
        g.length = 1;
        g.h_boundary = HBoundary::Closed;
        g.v_topology = VTopology::Torus;
        MultiLaneRates k;
        k.d = {0, 0, 0};
        k.l = {0, 0, 0};
        k.Q = {0, 1, 0};
        const auto bonds = enumerate_bonds(k, g);
        REQUIRE(bonds.size() == 3);
        std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
        for (const auto& b : bonds) edges.insert({b.from, b.to});
        CHECK(edges == std::set<std::pair<std::uint32_t, std::uint32_t>>{{0, 1}, {1, 2}, {2, 0}});
    }
}

TEST_CASE("bond mass on a two-lane ring is L times the total rate") {
    CounterRng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        TwoLaneRates k{rng.next_double(), rng.next_double(), rng.next_double(),
                       rng.next_double(), rng.next_double(), rng.next_double()};
        const int L = 4 + static_cast<int>(rng.next_below(60));
        const auto bonds = enumerate_bonds(k, LaneGeometry::ring(L, 2));
        const double expect = L * (k.d0 + k.l0 + k.d1 + k.l1 + k.p + k.q);
        CHECK(total_rate_mass(bonds) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("rate conjugation under the three symmetries") {
    const TwoLaneRates k{2, 1, 3, 0, 5, 4};
    SUBCASE("lane reflection") {
        const auto r = conjugate_rates(Symmetry::LaneReflect, k);
        CHECK(r == TwoLaneRates{1, 2, 0, 3, 5, 4});
    }
    SUBCASE("lane exchange") {
        const auto r = conjugate_rates(Symmetry::LaneExchange, k);
        CHECK(r == TwoLaneRates{3, 0, 2, 1, 4, 5});
    }
    SUBCASE("particle-hole") {
        const auto r = conjugate_rates(Symmetry::ParticleHole, k);
        CHECK(r == TwoLaneRates{1, 2, 0, 3, 4, 5});
    }
}

TEST_CASE("configuration symmetries") {
    const auto g = LaneGeometry::closed(3, 2);
    CounterRng rng(5);
    Config c(g);
    for (int lane = 0; lane < 2; ++lane)
        for (int z = -3; z <= 3; ++z)
            if (rng.bernoulli(0.5)) c.set(z, lane, true);

    SUBCASE("particle-hole turns empty into full") {
        CHECK(apply_symmetry(Symmetry::ParticleHole, Config(g)) == all_full(g));
    }
    SUBCASE("lane exchange swaps the rows") {
        Config half(g);
        for (int z = -3; z <= 3; ++z) half.set(z, 0, true);
        const Config sw = apply_symmetry(Symmetry::LaneExchange, half);
        for (int z = -3; z <= 3; ++z) {
            CHECK(!sw.get(z, 0));
            CHECK(sw.get(z, 1));
        }
    }
    SUBCASE("all three are involutions") {
        for (auto s : {Symmetry::LaneReflect, Symmetry::LaneExchange, Symmetry::ParticleHole})
            CHECK(apply_symmetry(s, apply_symmetry(s, c)) == c);
    }
    SUBCASE("reflection is an involution on a ring too") {
        const auto rg = LaneGeometry::ring(8, 2);
        Config rc(rg);
        rc.set(3, 0, true);
        rc.set(0, 1, true);
        CHECK(apply_symmetry(Symmetry::LaneReflect, apply_symmetry(Symmetry::LaneReflect, rc)) == rc);
    }
}

TEST_CASE("weak irreducibility closed form") {
    CHECK_FALSE(is_weakly_irreducible(TwoLaneRates{1, 0, 1, 0, 1, 0}));
    CHECK(is_weakly_irreducible(TwoLaneRates{1, 0, 1, 0, 1, 0.5}));
    CHECK(is_weakly_irreducible(TwoLaneRates{1, 0, 0, 1, 1, 0}));
    CHECK_FALSE(is_weakly_irreducible(TwoLaneRates{1, 0, 1, 0, 0, 0}));  // decoupled lanes
}

namespace {

// graph-reachability oracle on a small closed window
bool weakly_irreducible_bruteforce(const TwoLaneRates& k) {
    const auto g = LaneGeometry::closed(2, 2);  // 5 columns, 10 sites
    const int n = static_cast<int>(g.n_sites());
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i) reach[i][i] = true;
    for (const auto& b : enumerate_bonds(k, g)) reach[b.from][b.to] = true;
    for (int m = 0; m < n; ++m)
        for (int i = 0; i < n; ++i)
            if (reach[i][m])
                for (int j = 0; j < n; ++j)
                    if (reach[m][j]) reach[i][j] = true;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (!reach[i][j] && !reach[j][i]) return false;
    return true;
}

}  // namespace

TEST_CASE("weak irreducibility matches the graph oracle") {
    CounterRng rng(2024);
    int checked = 0;
    for (int rep = 0; rep < 400; ++rep) {
        // random sparsity pattern: each rate is zero with probability 1/2
        auto coin = [&](double scale) { return rng.bernoulli(0.5) ? scale * rng.next_double_pos() : 0.0; };
        TwoLaneRates k{coin(1), coin(1), coin(1), coin(1), coin(1), coin(1)};
        if ((k.d0 + k.l0) * (k.d1 + k.l1) <= 0) continue;
        if (k.p + k.q <= 0) continue;
        ++checked;
        CHECK(is_weakly_irreducible(k) == weakly_irreducible_bruteforce(k));
    }
    CHECK(checked > 100);
}

TEST_CASE("normalization by symmetry conjugation") {
    CounterRng rng(99);
    for (int rep = 0; rep < 300; ++rep) {
        TwoLaneRates k{rng.next_double(), rng.next_double(), rng.next_double(),
                       rng.next_double(), rng.next_double(), rng.next_double()};
        if (k.p + k.q == 0) continue;
        const auto comp = normalizing_symmetries(k);
        REQUIRE(comp.has_value());
        TwoLaneRates r = k;
        for (auto s : *comp) r = conjugate_rates(s, r);
        CHECK(is_normalized(r));
        CHECK(normalize(k) == r);
    }
    CHECK_FALSE(normalizing_symmetries(TwoLaneRates{1, 0, 1, 0, 0, 0}).has_value());
    CHECK(normalizing_symmetries(TwoLaneRates{1, 2, 3, 4, 5, 6}).has_value());
}

TEST_CASE("kernel file parsing") {
    SUBCASE("two-lane keys") {
        const auto k = parse_kernel_text("d0 = 1.5\nl0 = 0.25\nd1: 2\nl1 0.125\np 3\nq 0.5 # comment\n");
        REQUIRE(std::holds_alternative<TwoLaneRates>(k));
        CHECK(std::get<TwoLaneRates>(k) == TwoLaneRates{1.5, 0.25, 2, 0.125, 3, 0.5});
    }
    SUBCASE("multilane arrays") {
        const auto k = parse_kernel_text("d = 1 0.5 2\nl = 0.25 0.5 0.125\nQ = 0 1 0.5\n");
        REQUIRE(std::holds_alternative<MultiLaneRates>(k));
        const auto& m = std::get<MultiLaneRates>(k);
        CHECK(m.d == std::vector<double>{1, 0.5, 2});
        CHECK(m.Q == std::vector<double>{0, 1, 0.5});
        CHECK(m.validate().empty());
    }
    SUBCASE("errors") {
        CHECK_THROWS(parse_kernel_text("d0 = nope\n"));
        CHECK_THROWS(parse_kernel_text("d0 = 1\nd = 1 1\n"));
        CHECK_THROWS(parse_kernel_text("unknown = 1\n"));
        CHECK_THROWS(parse_kernel_text("# nothing\n"));
    }
}

TEST_CASE("p + q = 0 is representable but flagged") {
    const TwoLaneRates k{1, 0, 1, 0, 0, 0};
    const auto issues = k.validate();
    CHECK(!issues.empty());
}
