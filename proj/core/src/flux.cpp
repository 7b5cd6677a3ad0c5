#include "mlsep/flux.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mlsep {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

constexpr double kGridPoints = 10001;  // extremum scans: uniform grid then golden section
constexpr double kGolden = 0.6180339887498949;

}  // namespace

double ShockPair::amplitude() const { return std::abs(rho_plus - rho_minus); }

double micro_current(const Config& config, const TwoLaneRates& rates, int cut) {
    const auto& g = config.geometry();
    require(g.contains_column(cut), "micro_current: cut out of window");
    const int right = g.right_of(cut);
    require(right >= g.col_min(), "micro_current: cut at Closed boundary");
    double j = 0;
    const double d[2] = {rates.d0, rates.d1};
    const double l[2] = {rates.l0, rates.l1};
    for (int i = 0; i < 2; ++i) {
        const int a = config.get(cut, i), b = config.get(right, i);
        j += d[i] * a * (1 - b) - l[i] * b * (1 - a);
    }
    return j;
}

double micro_current(const Config& config, const MultiLaneRates& rates, int cut) {
    const auto& g = config.geometry();
    require(g.contains_column(cut), "micro_current: cut out of window");
    require(g.n_lanes == rates.n_lanes(), "micro_current: lane count mismatch");
    const int right = g.right_of(cut);
    require(right >= g.col_min(), "micro_current: cut at Closed boundary");
    double j = 0;
    for (int i = 0; i < g.n_lanes; ++i) {
        const int a = config.get(cut, i), b = config.get(right, i);
        j += rates.d[i] * a * (1 - b) - rates.l[i] * b * (1 - a);
    }
    return j;
}

FluxCurve::FluxCurve(double gamma0, double gamma1, double r)
    : gamma0_(gamma0), gamma1_(gamma1), r_(r) {
    require(std::isfinite(gamma0) && std::isfinite(gamma1), "FluxCurve: drifts must be finite");
    require(r >= 0 && std::isfinite(r), "FluxCurve: r must be a finite nonnegative ratio");
}

FluxCurve::FluxCurve(const TwoLaneRates& rates)
    : FluxCurve(rates.gamma0(), rates.gamma1(), rates.r()) {}

namespace {

// psi(rho) = 1 + u^2 rho (rho - 2), u = (r-1)/(r+1); psi in (0, 1] for r > 0
inline double psi_of(double r, double rho) {
    const double u = (r - 1.0) / (r + 1.0);
    return 1.0 + u * u * rho * (rho - 2.0);
}

// phi(rho) = (1/2) ((r+1)/(r-1)) (1 - sqrt(psi)), in the conjugate form that
// stays finite at r = 1
inline double phi_of(double r, double rho, double sqrt_psi) {
    return -(r - 1.0) * rho * (rho - 2.0) / (2.0 * (r + 1.0) * (1.0 + sqrt_psi));
}

inline double phi1_of(double r, double rho, double sqrt_psi) {
    return -0.5 * (r - 1.0) / (r + 1.0) * (rho - 1.0) / sqrt_psi;
}

inline double phi2_of(double r, double sqrt_psi) {
    const double rp1 = r + 1.0;
    return -2.0 * r * (r - 1.0) / (rp1 * rp1 * rp1) / (sqrt_psi * sqrt_psi * sqrt_psi);
}

}  // namespace

double FluxCurve::G(double rho) const {
    require(rho >= 0.0 && rho <= 2.0, "G: rho must lie in [0,2]");
    if (r_ == 0.0) {
        // exact piecewise form of the q = 0 case
        if (rho <= 1.0) return gamma1_ * rho * (1.0 - rho);
        return gamma0_ * (rho - 1.0) * (2.0 - rho);
    }
    const double psi = psi_of(r_, rho);
    const double sq = std::sqrt(psi);
    const double phi = phi_of(r_, rho, sq);
    return (gamma0_ + gamma1_) * (rho / 2.0) * (1.0 - rho / 2.0) +
           (gamma0_ - gamma1_) * (1.0 - rho) * phi - (gamma0_ + gamma1_) * phi * phi;
}

double FluxCurve::G_derivative(double rho, int order) const {
    require(rho >= 0.0 && rho <= 2.0, "G_derivative: rho must lie in [0,2]");
    require(order >= 1 && order <= 3, "G_derivative: order must be 1, 2 or 3");
    const double gs = gamma0_ + gamma1_;
    const double gd = gamma0_ - gamma1_;
    if (r_ == 0.0) {
        if (rho == 1.0)
            throw std::domain_error("G_derivative: G has a kink at rho = 1 when q = 0");
        if (rho < 1.0) {
            if (order == 1) return gamma1_ * (1.0 - 2.0 * rho);
            if (order == 2) return -2.0 * gamma1_;
            return 0.0;
        }
        if (order == 1) return gamma0_ * (3.0 - 2.0 * rho);
        if (order == 2) return -2.0 * gamma0_;
        return 0.0;
    }
    const double psi = psi_of(r_, rho);
    const double sq = std::sqrt(psi);
    const double phi = phi_of(r_, rho, sq);
    const double phi1 = phi1_of(r_, rho, sq);
    const double phi2 = phi2_of(r_, sq);
    if (order == 1)
        return gs * 0.5 * (1.0 - rho) + gd * (-phi + (1.0 - rho) * phi1) - 2.0 * gs * phi * phi1;
    if (order == 2)
        return -0.5 * gs + gd * (-2.0 * phi1 + (1.0 - rho) * phi2) -
               2.0 * gs * (phi1 * phi1 + phi * phi2);
    // third derivative in the factored form with no (r-1) division
    const double rp1 = r_ + 1.0;
    const double u2 = (r_ - 1.0) * (r_ - 1.0) / (rp1 * rp1);
    const double inv_psi52 = 1.0 / (psi * psi * sq);
    const double a = gd * 24.0 * r_ * r_ * (r_ - 1.0) / (rp1 * rp1 * rp1 * rp1 * rp1);
    const double b = gs * (1.0 - rho) * 6.0 * r_ * u2 / (rp1 * rp1);
    return (a + b) * inv_psi52;
}

double r0() {
    const double s = std::sqrt(-7.0 + std::sqrt(52.0));
    return (1.0 - 2.0 * s) / (1.0 + 2.0 * s);
}

double r0_boundary_residual(double r) {
    const double u = (r - 1.0) / (r + 1.0);
    const double u2 = u * u;
    return 3.0 - 3.5 * u2 - u2 * u2 / 16.0;
}

double solve_rho_dr(double d, double r) {
    require(r > 0.0 && r <= 1.0, "solve_rho_dr: requires r in (0,1]");
    require(d >= 0.0 && d <= 1.0, "solve_rho_dr: requires d in [0,1]");
    const FluxCurve curve = FluxCurve::reduced(d, r);
    auto F = [&](double rho) { return curve.G(rho + 1.0) - curve.G(rho); };
    double lo = 0.0, hi = 1.0;
    double flo = F(lo);
    if (flo == 0.0) return lo;
    if (F(hi) == 0.0) return hi;
    require(flo > 0.0 && F(hi) < 0.0, "solve_rho_dr: bracket F(0) > 0 > F(1) failed");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = F(mid);
        if (std::abs(fm) < 1e-15 || hi - lo < 1e-16) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

namespace {

// golden-section refinement of a minimum of f inside [a,b]
template <class F>
double golden_min(F f, double a, double b) {
    double x1 = b - kGolden * (b - a);
    double x2 = a + kGolden * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > 1e-13) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kGolden * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (b - a);
            f2 = f(x2);
        }
    }
    return std::min(f1, f2);
}

template <class F>
double scan_min(F f, double a, double b) {
    const int n = static_cast<int>(kGridPoints);
    double best = f(a);
    int best_i = 0;
    for (int i = 1; i <= n; ++i) {
        const double x = a + (b - a) * i / n;
        const double v = f(x);
        if (v < best) {
            best = v;
            best_i = i;
        }
    }
    const double lo = a + (b - a) * std::max(0, best_i - 1) / n;
    const double hi = a + (b - a) * std::min(n, best_i + 1) / n;
    return std::min(best, golden_min(f, lo, hi));
}

}  // namespace

double interval_min(const FluxCurve& curve, double a, double b) {
    require(a <= b, "interval_min: empty interval");
    return scan_min([&](double x) { return curve.G(x); }, a, b);
}

double interval_max(const FluxCurve& curve, double a, double b) {
    require(a <= b, "interval_max: empty interval");
    return -scan_min([&](double x) { return -curve.G(x); }, a, b);
}

bool entropy_condition(const FluxCurve& curve, const ShockPair& shock, double tol) {
    require(shock.rho_minus != shock.rho_plus, "entropy_condition: not a shock");
    const double gm = curve.G(shock.rho_minus);
    const double gp = curve.G(shock.rho_plus);
    if (std::abs(gm - gp) > tol) return false;
    const double a = std::min(shock.rho_minus, shock.rho_plus);
    const double b = std::max(shock.rho_minus, shock.rho_plus);
    if (shock.rho_minus < shock.rho_plus) return std::abs(interval_min(curve, a, b) - gm) <= tol;
    return std::abs(interval_max(curve, a, b) - gm) <= tol;
}

namespace {

void append_if_entropic(std::vector<ShockPair>& out, const FluxCurve& curve, double rho) {
    for (const ShockPair cand : {ShockPair{rho, rho + 1.0}, ShockPair{rho + 1.0, rho}}) {
        bool dup = false;
        for (const auto& s : out)
            dup |= std::abs(s.rho_minus - cand.rho_minus) < 1e-7 &&
                   std::abs(s.rho_plus - cand.rho_plus) < 1e-7;
        if (!dup && entropy_condition(curve, cand)) out.push_back(cand);
    }
}

}  // namespace

R0Classification classify_R0(const FluxCurve& curve) {
    R0Classification result;
    const double gs = curve.gamma0() + curve.gamma1();
    const bool sym_deg = curve.r() == 1.0 && gs == 0.0;          // p = q, zero net drift
    const bool zero_deg = curve.gamma0() == 0.0 && curve.gamma1() == 0.0;
    const bool tasep_deg = curve.r() == 0.0 && curve.gamma0() * curve.gamma1() == 0.0;
    if (sym_deg || zero_deg || tasep_deg) {
        result.degenerate = true;
        return result;
    }

    auto F = [&](double rho) { return curve.G(rho + 1.0) - curve.G(rho); };

    // collect roots of F on [0,1]: sign-change bisection on a fine grid, plus
    // grid points where F vanishes outright (touching roots, flat stretches)
    const int n = 2000;
    std::vector<double> candidates;
    double prev = F(0.0);
    if (prev == 0.0) candidates.push_back(0.0);
    bool flat = std::abs(prev) < 1e-13;
    for (int i = 1; i <= n; ++i) {
        const double x = static_cast<double>(i) / n;
        const double fx = F(x);
        flat = flat && std::abs(fx) < 1e-13;
        if (fx == 0.0) {
            candidates.push_back(x);
        } else if ((fx > 0) != (prev > 0) && prev != 0.0) {
            double lo = static_cast<double>(i - 1) / n, hi = x;
            double flo = prev;
            for (int it = 0; it < 100; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = F(mid);
                if (fm == 0.0 || hi - lo < 1e-15) {
                    lo = hi = mid;
                    break;
                }
                if ((fm > 0) == (flo > 0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            candidates.push_back(0.5 * (lo + hi));
        }
        prev = fx;
    }
    if (flat) {
        // G(rho+1) = G(rho) identically (q = 0 with equal drifts): every rho is
        // a flux-equality candidate and the variational condition does the
        // selection; the passing set is finite, so a grid suffices
        candidates.clear();
        for (int i = 0; i <= 400; ++i) candidates.push_back(static_cast<double>(i) / 400);
    }

    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end(),
                                 [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                     candidates.end());
    for (double rho : candidates) append_if_entropic(result.pairs, curve, rho);
    return result;
}

R0Classification classify_R0(const TwoLaneRates& rates) {
    auto issues = rates.validate();
    if (!issues.empty()) throw std::invalid_argument("classify_R0: " + issues.front());
    const TwoLaneRates k = normalize(rates);
    return classify_R0(FluxCurve(k));
}

ZMembership in_Z(double d, double r) {
    require(d >= 0.0 && d <= 1.0, "in_Z: d must lie in [0,1]");
    require(r > 0.0 && r <= 1.0, "in_Z: r must lie in (0,1]");
    ZMembership m;
    m.rho_star = solve_rho_dr(d, r);
    const FluxCurve curve = FluxCurve::reduced(d, r);
    m.plateau = curve.G(m.rho_star);
    m.inf = interval_min(curve, m.rho_star, m.rho_star + 1.0);
    m.sup = interval_max(curve, m.rho_star, m.rho_star + 1.0);
    const double margin = std::min(m.plateau - m.inf, m.sup - m.plateau);
    m.inside = margin > 1e-9;
    m.near_boundary = !m.inside && margin > -1e-9;
    return m;
}

double multilane_G(const MultiLaneRates& rates, double rho) {
    const int n = rates.n_lanes();
    require(rho >= 0 && rho <= n, "multilane_G: rho out of [0, n]");
    const double x = rho / n;
    return rates.gamma_sum() * x * (1.0 - x);
}

}  // namespace mlsep
