#include "mlsep/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mlsep {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

}  // namespace

std::pair<double, double> solve_F(double p, double q, double rho) {
    require(rho >= 0.0 && rho <= 2.0, "solve_F: rho must lie in [0,2]");
    require(p >= 0 && q >= 0 && p + q > 0, "solve_F: requires p + q > 0");
    double rho0;
    if (q == 0.0) {
        rho0 = std::max(rho - 1.0, 0.0);
    } else if (p == 0.0) {
        rho0 = std::min(rho, 1.0);
    } else if (p == q) {
        rho0 = rho / 2.0;
    } else {
        const double r = q / p;
        if (std::abs(r - 1.0) < 1e-6) {
            // conjugate form, stable as r -> 1
            const double u = (r - 1.0) / (r + 1.0);
            const double psi = 1.0 + u * u * rho * (rho - 2.0);
            rho0 = rho / 2.0 - rho * (rho - 2.0) * (r - 1.0) / (2.0 * (r + 1.0) * (1.0 + std::sqrt(psi)));
        } else {
            const double disc = (r + 1.0) * (r + 1.0) + rho * (r - 1.0) * (r - 1.0) * (rho - 2.0);
            rho0 = rho / 2.0 + (r + 1.0 - std::sqrt(disc)) / (2.0 * (r - 1.0));
        }
        rho0 = clamp01(rho0);
    }
    // make rho0 + rho1 reconstruct rho exactly in floating point
    double rho1 = rho - rho0;
    rho0 = rho - rho1;
    if (rho0 + rho1 != rho) rho0 = std::nextafter(rho0, rho - rho1);
    return {rho0, rho1};
}

std::pair<double, double> solve_F(const TwoLaneRates& rates, double rho) {
    return solve_F(rates.p, rates.q, rho);
}

double F_residual(double p, double q, double rho0, double rho1) {
    return p * rho0 * (1.0 - rho1) - q * rho1 * (1.0 - rho0);
}

double profile_density(double theta, double lambda, double c, int z, int lane) {
    require(theta > 0 && lambda > 0 && c > 0, "profile_density: parameters must be positive");
    // odds c * theta^z * lambda^lane, evaluated in log space to survive |z| ~ 1000
    const double log_odds = std::log(c) + z * std::log(theta) + lane * std::log(lambda);
    if (log_odds > 36.0) return 1.0;   // 1 - 2e-16, saturated
    if (log_odds < -745.0) return 0.0;
    const double odds = std::exp(log_odds);
    return odds / (1.0 + odds);
}

double blocking_profile(const TwoLaneRates& rates, int z, int lane, double c) {
    require(rates.l0 > 0 && rates.l1 > 0,
            "blocking_profile: two-lane profile requires l0, l1 > 0 (use the TASEP form otherwise)");
    const double theta0 = rates.d0 / rates.l0;
    const double theta1 = rates.d1 / rates.l1;
    require(std::abs(theta0 - theta1) <= 1e-12 * std::max(theta0, theta1),
            "blocking_profile: requires d0/l0 = d1/l1");
    require(theta0 > 1.0, "blocking_profile: requires theta = d/l > 1");
    require(rates.q > 0, "blocking_profile: requires q > 0");
    return profile_density(theta0, rates.p / rates.q, c, z, lane);
}

double single_lane_profile(double d, double l, double c, int idx) {
    require(l > 0, "single_lane_profile: requires l > 0");
    return profile_density(d / l, 1.0, c, idx, 0);
}

double tasep_profile(int n, double c, int idx) {
    require(c >= 0, "tasep_profile: requires c >= 0");
    if (idx > n) return 1.0;
    if (idx == n) return c / (1.0 + c);
    return 0.0;
}

bool is_product_form(const MeasureSpec& spec) {
    return std::visit(
        [](const auto& s) -> bool {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, TwoRateBernoulli> || std::is_same_v<T, BernoulliTotal> ||
                          std::is_same_v<T, ReversibleProfile> || std::is_same_v<T, DiracStep>) {
                return true;
            } else if constexpr (std::is_same_v<T, PartialBlocking>) {
                return s.l == 0;  // the step is deterministic; l > 0 is a conditioned family
            } else if constexpr (std::is_same_v<T, TasepPairBlocking>) {
                return s.kind == TasepPairKind::Breve;
            } else {
                return false;
            }
        },
        spec);
}

namespace {

double step_density(long long n, int z) { return z > n ? 1.0 : 0.0; }

}  // namespace

std::optional<double> parent_product_density(const MeasureSpec& spec, const LaneGeometry& g, int z,
                                             int lane) {
    using R = std::optional<double>;
    return std::visit(
        [&](const auto& s) -> R {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, TwoRateBernoulli>) {
                return lane == 0 ? s.rho0 : s.rho1;
            } else if constexpr (std::is_same_v<T, BernoulliTotal>) {
                if (g.v_topology == VTopology::Torus) return s.rho / g.n_lanes;
                auto [r0, r1] = solve_F(s.p, s.q, s.rho);
                return lane == 0 ? r0 : r1;
            } else if constexpr (std::is_same_v<T, ReversibleProfile>) {
                return profile_density(s.theta, s.lambda, s.c, z - s.center, lane);
            } else if constexpr (std::is_same_v<T, ConditionedBlocking>) {
                return profile_density(s.theta, s.lambda, s.c, z, lane);
            } else if constexpr (std::is_same_v<T, PartialBlocking>) {
                const bool frozen_lane0 = s.kind != PartialBlockingKind::FullLane1;
                if (lane == (frozen_lane0 ? 0 : 1))
                    return frozen_lane0 ? 0.0 : 1.0;
                const int idx = s.kind == PartialBlockingKind::EmptyLane0Reflected ? -z : z;
                if (s.l == 0) return tasep_profile(s.n, s.c, idx);
                return single_lane_profile(s.d, s.l, s.c, idx);
            } else if constexpr (std::is_same_v<T, DiracStep>) {
                return step_density(lane == 0 ? s.i : s.j, z);
            } else if constexpr (std::is_same_v<T, TasepPairBlocking>) {
                if (s.kind == TasepPairKind::Breve) return step_density(s.z, z);
                return std::nullopt;  // two-point mixture
            } else if constexpr (std::is_same_v<T, MultilaneBlocking>) {
                if (s.variant == MultilaneBlockingVariant::ConditionedProfile)
                    return profile_density(s.theta, 1.0, s.c, z, 0);
                return std::nullopt;  // uniform-subset mixture
            }
        },
        spec);
}

std::optional<double> site_density(const MeasureSpec& spec, const LaneGeometry& g, int z, int lane) {
    if (!is_product_form(spec)) return std::nullopt;
    return parent_product_density(spec, g, z, lane);
}

namespace {

void check_geometry(const MeasureSpec& spec, const LaneGeometry& g) {
    const bool closed = g.h_boundary == HBoundary::Closed;
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, TwoRateBernoulli>) {
                require(g.n_lanes == 2, "TwoRateBernoulli needs a two-lane geometry");
                require(!closed, "translation-invariant product measures live on Periodic geometry");
            } else if constexpr (std::is_same_v<T, BernoulliTotal>) {
                require(!closed, "translation-invariant product measures live on Periodic geometry");
                require(s.rho >= 0 && s.rho <= g.n_lanes, "BernoulliTotal: rho out of [0, n_lanes]");
            } else if constexpr (std::is_same_v<T, MultilaneBlocking>) {
                require(closed, "blocking measures live on Closed geometry");
                require(s.i >= 0, "MultilaneBlocking: label must be nonnegative");
            } else {
                require(closed, "blocking measures live on Closed geometry");
                require(g.n_lanes == 2, "two-lane measure on a geometry with n_lanes != 2");
            }
        },
        spec);
}

Config draw_product(const std::vector<double>& dens, const LaneGeometry& g, CounterRng& rng) {
    Config c(g);
    std::size_t k = 0;
    for (int lane = 0; lane < g.n_lanes; ++lane)
        for (int z = g.col_min(); z <= g.col_max(); ++z, ++k)
            if (rng.bernoulli(dens[k])) c.set(z, lane, true);
    return c;
}

std::vector<double> density_field(const MeasureSpec& spec, const LaneGeometry& g) {
    std::vector<double> dens;
    dens.reserve(g.n_sites());
    for (int lane = 0; lane < g.n_lanes; ++lane)
        for (int z = g.col_min(); z <= g.col_max(); ++z) {
            auto d = parent_product_density(spec, g, z, lane);
            require(d.has_value(), "spec has no product parent density");
            dens.push_back(*d);
        }
    return dens;
}

[[noreturn]] void rejection_exhausted(long long attempts) {
    std::ostringstream msg;
    msg << "conditioned sampler: rejection budget exceeded after " << attempts
        << " attempts (acceptance rate < " << 1.0 / static_cast<double>(attempts) << ")";
    throw std::runtime_error(msg.str());
}

Config draw_conditioned_H2(const std::vector<double>& dens, const LaneGeometry& g, long long target,
                           CounterRng& rng, SampleStats* stats) {
    for (long long attempt = 1; attempt <= kRejectionBudget; ++attempt) {
        Config c = draw_product(dens, g, rng);
        if (H2(c) == target) {
            if (stats) stats->attempts = attempt;
            return c;
        }
    }
    rejection_exhausted(kRejectionBudget);
}

// single-lane height sum_{z<=0} eta(z) - sum_{z>0} (1 - eta(z)) over the window
long long lane_height(const std::vector<std::uint8_t>& lane, int col_min) {
    long long h = 0;
    for (std::size_t k = 0; k < lane.size(); ++k) {
        const int z = col_min + static_cast<int>(k);
        if (z <= 0)
            h += lane[k];
        else
            h -= 1 - lane[k];
    }
    return h;
}

}  // namespace

Config sample(const MeasureSpec& spec, const LaneGeometry& g, std::uint64_t seed, SampleStats* stats) {
    g.validate();
    check_geometry(spec, g);
    CounterRng rng(seed);
    if (stats) stats->attempts = 1;

    return std::visit(
        [&](const auto& s) -> Config {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, TwoRateBernoulli> || std::is_same_v<T, BernoulliTotal> ||
                          std::is_same_v<T, ReversibleProfile>) {
                return draw_product(density_field(spec, g), g, rng);
            } else if constexpr (std::is_same_v<T, ConditionedBlocking>) {
                const long long target = s.kind == BlockingParity::Even ? 2LL * s.n : 2LL * s.n + 1;
                return draw_conditioned_H2(density_field(spec, g), g, target, rng, stats);
            } else if constexpr (std::is_same_v<T, PartialBlocking>) {
                Config c(g);
                const bool frozen_lane0 = s.kind != PartialBlockingKind::FullLane1;
                const int frozen = frozen_lane0 ? 0 : 1;
                const int open = 1 - frozen;
                if (!frozen_lane0)
                    for (int z = g.col_min(); z <= g.col_max(); ++z) c.set(z, frozen, true);
                if (s.l == 0) {
                    // exact step eta*_n, reflected for the left-moving case
                    for (int z = g.col_min(); z <= g.col_max(); ++z) {
                        const int idx = s.kind == PartialBlockingKind::EmptyLane0Reflected ? -z : z;
                        c.set(z, open, idx > s.n);
                    }
                    return c;
                }
                // rejection on the single-lane height
                const int L = g.length;
                std::vector<double> dens(L);
                for (int z = g.col_min(); z <= g.col_max(); ++z)
                    dens[g.column_offset(z)] = single_lane_profile(s.d, s.l, s.c, z);
                std::vector<std::uint8_t> lane(L);
                for (long long attempt = 1; attempt <= kRejectionBudget; ++attempt) {
                    for (int k = 0; k < L; ++k) lane[k] = rng.bernoulli(dens[k]) ? 1 : 0;
                    if (lane_height(lane, g.col_min()) == s.n) {
                        if (stats) stats->attempts = attempt;
                        for (int z = g.col_min(); z <= g.col_max(); ++z) {
                            const int src = s.kind == PartialBlockingKind::EmptyLane0Reflected ? -z : z;
                            c.set(z, open, lane[g.column_offset(src)] != 0);
                        }
                        return c;
                    }
                }
                rejection_exhausted(kRejectionBudget);
            } else if constexpr (std::is_same_v<T, DiracStep>) {
                require(s.i >= s.j, "DiracStep: requires i >= j");
                Config c(g);
                fill_lane_step(c, 0, s.i);
                fill_lane_step(c, 1, s.j);
                return c;
            } else if constexpr (std::is_same_v<T, TasepPairBlocking>) {
                Config c(g);
                fill_lane_step(c, 0, s.z);
                fill_lane_step(c, 1, s.z);
                if (s.kind == TasepPairKind::Hat) {
                    require(s.p + s.q > 0, "TasepPairBlocking: p + q > 0 required");
                    const int lane = rng.bernoulli(s.p / (s.p + s.q)) ? 1 : 0;
                    c.set(s.z, lane, true);
                }
                return c;
            } else if constexpr (std::is_same_v<T, MultilaneBlocking>) {
                if (s.variant == MultilaneBlockingVariant::UniformSubset) {
                    require(s.i <= g.n_lanes, "MultilaneBlocking: |A| cannot exceed n_lanes");
                    Config c(g);
                    for (int lane = 0; lane < g.n_lanes; ++lane)
                        for (int z = std::max(0, g.col_min()); z <= g.col_max(); ++z)
                            c.set(z, lane, true);
                    // uniform i-subset of lanes occupies column -1
                    std::vector<int> lanes(g.n_lanes);
                    for (int i = 0; i < g.n_lanes; ++i) lanes[i] = i;
                    for (int k = 0; k < s.i; ++k) {
                        const auto j = k + static_cast<int>(rng.next_below(g.n_lanes - k));
                        std::swap(lanes[k], lanes[j]);
                        if (g.contains_column(-1)) c.set(-1, lanes[k], true);
                    }
                    return c;
                }
                return draw_conditioned_H2(density_field(spec, g), g, s.i, rng, stats);
            }
        },
        spec);
}

double log_density_ratio(const MeasureSpec& spec, const Config& a, const Config& b) {
    require(is_product_form(spec), "log_density_ratio: spec must be a product family");
    const auto& g = a.geometry();
    require(g == b.geometry(), "log_density_ratio: configurations on different geometries");
    double acc = 0.0;
    bool plus_inf = false, minus_inf = false;
    for (int lane = 0; lane < g.n_lanes; ++lane)
        for (int z = g.col_min(); z <= g.col_max(); ++z) {
            const int da = a.get(z, lane) ? 1 : 0;
            const int db = b.get(z, lane) ? 1 : 0;
            if (da == db) continue;
            const double rho = *site_density(spec, g, z, lane);
            if (rho <= 0.0 || rho >= 1.0) {
                // one of the configurations falls outside the support
                const bool toward_a = (rho >= 1.0) == (da > db);
                (toward_a ? plus_inf : minus_inf) = true;
                continue;
            }
            acc += (da - db) * (std::log(rho) - std::log1p(-rho));
        }
    if (plus_inf && minus_inf)
        throw std::domain_error("log_density_ratio: both configurations have zero density");
    if (plus_inf) return std::numeric_limits<double>::infinity();
    if (minus_inf) return -std::numeric_limits<double>::infinity();
    return acc;
}

BernoulliTotal multilane_nu_rho(int n_lanes, double rho) {
    require(n_lanes >= 2, "multilane_nu_rho: n_lanes >= 2");
    require(rho >= 0 && rho <= n_lanes, "multilane_nu_rho: rho out of [0, n]");
    BernoulliTotal s;
    s.rho = rho;
    s.p = s.q = 1;
    return s;
}

std::vector<std::uint8_t> draw_conditioned_total(const std::vector<double>& dens, int k,
                                                 CounterRng& rng) {
    const int n = static_cast<int>(dens.size());
    require(k >= 0 && k <= n, "draw_conditioned_total: count out of range");
    // backward table B[s][j] proportional to P(sum over sites >= s equals j).
    // Each row is rescaled to its maximum against underflow; the scale enters
    // the conditional once, via the row of the denominator.
    std::vector<std::vector<double>> B(n + 1, std::vector<double>(k + 1, 0.0));
    std::vector<double> rowscale(n + 1, 1.0);
    B[n][0] = 1.0;
    for (int s = n - 1; s >= 0; --s) {
        const double rho = dens[s];
        double rowmax = 0.0;
        for (int j = 0; j <= k; ++j) {
            double v = (1.0 - rho) * B[s + 1][j];
            if (j > 0) v += rho * B[s + 1][j - 1];
            B[s][j] = v;
            rowmax = std::max(rowmax, v);
        }
        require(rowmax > 0.0, "draw_conditioned_total: infeasible count");
        rowscale[s] = rowmax;
        for (int j = 0; j <= k; ++j) B[s][j] /= rowmax;
    }
    require(B[0][k] > 0.0, "draw_conditioned_total: the target count has probability zero");
    std::vector<std::uint8_t> out(n, 0);
    int rem = k;
    for (int s = 0; s < n; ++s) {
        const double p1 =
            rem > 0 ? dens[s] * B[s + 1][rem - 1] / (B[s][rem] * rowscale[s]) : 0.0;
        if (rng.next_double() < p1) {
            out[s] = 1;
            --rem;
        }
    }
    if (rem != 0) throw std::logic_error("draw_conditioned_total: count mismatch after the sweep");
    return out;
}

namespace {

// the window heights reduce to particle counts: H2 (and H_n) equal
// N - n_lanes * #right-columns, the single-lane height equals N - #right
int count_from_height(const LaneGeometry& g, long long target, int lanes) {
    const int right_cols = g.col_max();  // columns 1..col_max lie right of 0
    const long long k = target + static_cast<long long>(lanes) * right_cols;
    if (k < 0 || k > static_cast<long long>(lanes) * g.length)
        throw std::invalid_argument("conditioned sampler: target height unreachable on the window");
    return static_cast<int>(k);
}

}  // namespace

Config sample_exact_conditional(const MeasureSpec& spec, const LaneGeometry& g,
                                std::uint64_t seed) {
    g.validate();
    if (const auto* cb = std::get_if<ConditionedBlocking>(&spec)) {
        require(g.h_boundary == HBoundary::Closed, "blocking measures live on Closed geometry");
        require(g.n_lanes == 2, "two-lane measure on a geometry with n_lanes != 2");
        CounterRng rng(seed);
        const long long target = cb->kind == BlockingParity::Even ? 2LL * cb->n : 2LL * cb->n + 1;
        const auto bits =
            draw_conditioned_total(density_field(spec, g), count_from_height(g, target, 2), rng);
        Config c(g);
        std::size_t i = 0;
        for (int lane = 0; lane < 2; ++lane)
            for (int z = g.col_min(); z <= g.col_max(); ++z, ++i) c.set(z, lane, bits[i]);
        return c;
    }
    if (const auto* mb = std::get_if<MultilaneBlocking>(&spec)) {
        if (mb->variant == MultilaneBlockingVariant::ConditionedProfile) {
            require(g.h_boundary == HBoundary::Closed, "blocking measures live on Closed geometry");
            CounterRng rng(seed);
            const auto bits = draw_conditioned_total(density_field(spec, g),
                                                     count_from_height(g, mb->i, g.n_lanes), rng);
            Config c(g);
            std::size_t i = 0;
            for (int lane = 0; lane < g.n_lanes; ++lane)
                for (int z = g.col_min(); z <= g.col_max(); ++z, ++i) c.set(z, lane, bits[i]);
            return c;
        }
    }
    if (const auto* pb = std::get_if<PartialBlocking>(&spec)) {
        if (pb->l > 0) {
            require(g.h_boundary == HBoundary::Closed, "blocking measures live on Closed geometry");
            require(g.n_lanes == 2, "two-lane measure on a geometry with n_lanes != 2");
            CounterRng rng(seed);
            std::vector<double> dens(g.length);
            for (int z = g.col_min(); z <= g.col_max(); ++z)
                dens[g.column_offset(z)] = single_lane_profile(pb->d, pb->l, pb->c, z);
            const auto bits = draw_conditioned_total(dens, count_from_height(g, pb->n, 1), rng);
            Config c(g);
            const bool frozen_lane0 = pb->kind != PartialBlockingKind::FullLane1;
            const int open = frozen_lane0 ? 1 : 0;
            if (!frozen_lane0)
                for (int z = g.col_min(); z <= g.col_max(); ++z) c.set(z, 1, true);
            for (int z = g.col_min(); z <= g.col_max(); ++z) {
                const int src = pb->kind == PartialBlockingKind::EmptyLane0Reflected ? -z : z;
                c.set(z, open, bits[g.column_offset(src)] != 0);
            }
            return c;
        }
    }
    return sample(spec, g, seed);
}

}  // namespace mlsep
