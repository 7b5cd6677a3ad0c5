#pragma once

#include <vector>

#include "mlsep/kernels.hpp"
#include "mlsep/lattice.hpp"

namespace mlsep {

// signed particle current across the cut between columns `cut` and `cut+1`
double micro_current(const Config& config, const TwoLaneRates& rates, int cut);
double micro_current(const Config& config, const MultiLaneRates& rates, int cut);

struct ShockPair {
    double rho_minus = 0;
    double rho_plus = 0;
    double amplitude() const;
};

// Macroscopic flux G of the two-lane process on [0,2], together with its
// derivatives. Only gamma0, gamma1 and r = q/p enter. r = 0 uses the exact
// piecewise formula (the curve has a kink at rho = 1); r = 1 the parabola.
class FluxCurve {
  public:
    FluxCurve(double gamma0, double gamma1, double r);
    explicit FluxCurve(const TwoLaneRates& rates);

    // reduced curve G_{d,1-d,r}
    static FluxCurve reduced(double d, double r) { return FluxCurve(d, 1.0 - d, r); }

    double gamma0() const { return gamma0_; }
    double gamma1() const { return gamma1_; }
    double r() const { return r_; }

    double G(double rho) const;
    // order in {1,2,3}; throws for r = 0 at the rho = 1 kink
    double G_derivative(double rho, int order) const;

  private:
    double gamma0_, gamma1_, r_;
};

// r0 = (1 - 2 sqrt(-7 + sqrt(52))) / (1 + 2 sqrt(-7 + sqrt(52))) = 0.042...
double r0();
// residual of the boundary equation 3 - (7/2) u^2 - (1/16) u^4, u = (r-1)/(r+1)
double r0_boundary_residual(double r);

// unique root in [0,1] of G(rho+1) - G(rho) = 0 for the curve G_{d,1-d,r};
// requires r in (0,1]
double solve_rho_dr(double d, double r);

// extremum of G over [a,b]: dense grid plus golden-section refinement
double interval_min(const FluxCurve& curve, double a, double b);
double interval_max(const FluxCurve& curve, double a, double b);

// condition (ii) of the entropy-shock definition: flux equality at the ends
// and the min (rho- < rho+), resp. max (rho- > rho+), of G over the interval
// attained at both ends, within tol
bool entropy_condition(const FluxCurve& curve, const ShockPair& shock, double tol = 1e-10);

struct R0Classification {
    std::vector<ShockPair> pairs;  // entropy shocks of amplitude 1
    bool degenerate = false;       // parameter set outside the classified region
};

// All amplitude-1 entropy shocks of the curve. Degenerate cases
// (p = q with gamma0+gamma1 = 0; gamma0 = gamma1 = 0; q = 0 = gamma0*gamma1)
// are flagged and not classified.
R0Classification classify_R0(const FluxCurve& curve);
R0Classification classify_R0(const TwoLaneRates& rates);

struct ZMembership {
    bool inside = false;
    bool near_boundary = false;  // margin below 1e-9, returned as outside
    double rho_star = 0;
    double plateau = 0;  // common value G(rho*) = G(rho*+1)
    double inf = 0, sup = 0;
};

// strict membership in the open set Z: inf < G(rho(d,r)) < sup over
// [rho(d,r), 1 + rho(d,r)], for the reduced curve G_{d,1-d,r}
ZMembership in_Z(double d, double r);

// flux of the n-lane torus model under nu_rho
double multilane_G(const MultiLaneRates& rates, double rho);

}  // namespace mlsep
