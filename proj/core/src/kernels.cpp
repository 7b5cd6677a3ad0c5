#include "mlsep/kernels.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mlsep {

double TwoLaneRates::r() const {
    if (p <= 0) throw std::domain_error("reduced parameter r = q/p requires p > 0");
    return q / p;
}

double TwoLaneRates::dparam() const {
    const double s = gamma0() + gamma1();
    if (s == 0) throw std::domain_error("reduced parameter d requires gamma0 + gamma1 != 0");
    return gamma0() / s;
}

std::vector<std::string> TwoLaneRates::validate() const {
    std::vector<std::string> issues;
    for (double v : {d0, l0, d1, l1, p, q})
        if (!(v >= 0) || !std::isfinite(v)) issues.push_back("rates must be finite and nonnegative");
    if ((d0 + l0) * (d1 + l1) <= 0) issues.push_back("(d0+l0)(d1+l1) > 0 required: particles must be able to move on both lanes");
    if (p + q <= 0) issues.push_back("p + q > 0 required: decoupled lanes are out of scope for classification");
    return issues;
}

double MultiLaneRates::gamma_sum() const {
    double s = 0;
    for (int i = 0; i < n_lanes(); ++i) s += gamma(i);
    return s;
}

std::vector<std::string> MultiLaneRates::validate() const {
    std::vector<std::string> issues;
    const int n = n_lanes();
    if (n < 2) issues.push_back("multilane kernel needs >= 2 lanes");
    if (static_cast<int>(l.size()) != n) issues.push_back("d and l must have the same length");
    if (static_cast<int>(Q.size()) != n) issues.push_back("Q must have one entry per lane offset (Q[0] unused)");
    for (int i = 0; i < n && i < static_cast<int>(l.size()); ++i)
        if (d[i] + l[i] <= 0) issues.push_back("d_i + l_i > 0 required on every lane");
    // irreducibility of the vertical kernel on the torus
    if (static_cast<int>(Q.size()) == n && n >= 2) {
        std::vector<char> reach(n, 0);
        reach[0] = 1;
        for (int pass = 0; pass < n; ++pass)
            for (int i = 0; i < n; ++i)
                if (reach[i])
                    for (int k = 1; k < n; ++k)
                        if (Q[k] > 0) reach[(i + k) % n] = 1;
        if (std::find(reach.begin(), reach.end(), 0) != reach.end())
            issues.push_back("vertical kernel Q must be irreducible on the torus");
    }
    return issues;
}

namespace {

void push_bond(std::vector<DirectedRate>& bonds, const Config& idx, int z_from, int lane_from,
               int z_to, int lane_to, double rate) {
    if (rate <= 0) return;
    bonds.push_back({static_cast<std::uint32_t>(idx.site_index(z_from, lane_from)),
                     static_cast<std::uint32_t>(idx.site_index(z_to, lane_to)), rate});
}

void horizontal_bonds(std::vector<DirectedRate>& bonds, const Config& idx, const LaneGeometry& g,
                      int lane, double d, double l) {
    for (int z = g.col_min(); z <= g.col_max(); ++z) {
        const int zr = g.right_of(z);
        if (zr < g.col_min()) continue;  // Closed end
        push_bond(bonds, idx, z, lane, zr, lane, d);
        push_bond(bonds, idx, zr, lane, z, lane, l);
    }
}

}  // namespace

std::vector<DirectedRate> enumerate_bonds(const TwoLaneRates& rates, const LaneGeometry& g) {
    if (g.n_lanes != 2) throw std::invalid_argument("two-lane rates on a geometry with n_lanes != 2");
    Config idx(g);  // only for site indexing
    std::vector<DirectedRate> bonds;
    horizontal_bonds(bonds, idx, g, 0, rates.d0, rates.l0);
    horizontal_bonds(bonds, idx, g, 1, rates.d1, rates.l1);
    for (int z = g.col_min(); z <= g.col_max(); ++z) {
        push_bond(bonds, idx, z, 0, z, 1, rates.p);
        push_bond(bonds, idx, z, 1, z, 0, rates.q);
    }
    return bonds;
}

std::vector<DirectedRate> enumerate_bonds(const MultiLaneRates& rates, const LaneGeometry& g) {
    if (g.n_lanes != rates.n_lanes())
        throw std::invalid_argument("lane count mismatch between rates and geometry");
    Config idx(g);
    std::vector<DirectedRate> bonds;
    for (int i = 0; i < g.n_lanes; ++i) horizontal_bonds(bonds, idx, g, i, rates.d[i], rates.l[i]);
    const int n = g.n_lanes;
    for (int z = g.col_min(); z <= g.col_max(); ++z)
        for (int i = 0; i < n; ++i)
            for (int k = 1; k < n; ++k)
                if (k < static_cast<int>(rates.Q.size()))
                    push_bond(bonds, idx, z, i, z, (i + k) % n, rates.Q[k]);
    return bonds;
}

std::vector<DirectedRate> enumerate_bonds(const RateKernel& rates, const LaneGeometry& g) {
    return std::visit([&](const auto& r) { return enumerate_bonds(r, g); }, rates);
}

double total_rate_mass(const std::vector<DirectedRate>& bonds) {
    double s = 0;
    for (const auto& b : bonds) s += b.rate;
    return s;
}

Config apply_symmetry(Symmetry which, const Config& config) {
    const auto& g = config.geometry();
    Config out(g);
    switch (which) {
        case Symmetry::LaneReflect:
            for (int i = 0; i < g.n_lanes; ++i)
                for (int z = g.col_min(); z <= g.col_max(); ++z) {
                    int zr;
                    if (g.h_boundary == HBoundary::Closed) {
                        zr = -z;
                    } else {
                        zr = (g.length - z) % g.length;  // z -> -z mod L
                    }
                    out.set(z, i, config.get(zr, i));
                }
            return out;
        case Symmetry::LaneExchange:
            if (g.n_lanes != 2)
                throw std::invalid_argument("lane exchange requires a two-lane geometry");
            for (int z = g.col_min(); z <= g.col_max(); ++z) {
                out.set(z, 0, config.get(z, 1));
                out.set(z, 1, config.get(z, 0));
            }
            return out;
        case Symmetry::ParticleHole:
            for (int i = 0; i < g.n_lanes; ++i)
                for (int z = g.col_min(); z <= g.col_max(); ++z) out.set(z, i, !config.get(z, i));
            return out;
    }
    throw std::logic_error("unreachable");
}

TwoLaneRates conjugate_rates(Symmetry which, const TwoLaneRates& k) {
    switch (which) {
        case Symmetry::LaneReflect:
            return {k.l0, k.d0, k.l1, k.d1, k.p, k.q};
        case Symmetry::LaneExchange:
            return {k.d1, k.l1, k.d0, k.l0, k.q, k.p};
        case Symmetry::ParticleHole:
            return {k.l0, k.d0, k.l1, k.d1, k.q, k.p};
    }
    throw std::logic_error("unreachable");
}

bool is_normalized(const TwoLaneRates& k) {
    return k.gamma0() >= 0 && k.gamma0() + k.gamma1() >= 0 && k.p >= k.q && k.p > 0;
}

std::optional<std::vector<Symmetry>> normalizing_symmetries(const TwoLaneRates& k) {
    if (k.p + k.q <= 0) return std::nullopt;
    using S = Symmetry;
    const std::array<std::vector<S>, 8> compositions = {{
        {},
        {S::LaneReflect},
        {S::LaneExchange},
        {S::ParticleHole},
        {S::LaneReflect, S::LaneExchange},
        {S::LaneReflect, S::ParticleHole},
        {S::LaneExchange, S::ParticleHole},
        {S::LaneReflect, S::LaneExchange, S::ParticleHole},
    }};
    for (const auto& comp : compositions) {
        TwoLaneRates r = k;
        for (S s : comp) r = conjugate_rates(s, r);
        if (is_normalized(r)) return comp;
    }
    return std::nullopt;
}

TwoLaneRates normalize(const TwoLaneRates& k) {
    auto comp = normalizing_symmetries(k);
    if (!comp) throw std::invalid_argument("cannot normalize rates with p + q = 0");
    TwoLaneRates r = k;
    for (Symmetry s : *comp) r = conjugate_rates(s, r);
    return r;
}

bool is_weakly_irreducible(const TwoLaneRates& rates) {
    if ((rates.d0 + rates.l0) * (rates.d1 + rates.l1) <= 0)
        throw std::invalid_argument("weak irreducibility requires (d0+l0)(d1+l1) > 0");
    if (rates.p + rates.q <= 0) return false;  // lanes never connected
    const TwoLaneRates k = normalize(rates);
    const bool same_direction_tasep = k.d0 * k.l0 + k.d1 * k.l1 == 0 && k.d0 * k.d1 + k.l0 * k.l1 > 0;
    return !(k.q == 0 && same_direction_tasep);
}

bool is_weakly_irreducible(const MultiLaneRates& rates) {
    auto issues = rates.validate();
    if (!issues.empty()) throw std::invalid_argument(issues.front());
    return true;
}

namespace {

double parse_number(const std::string& tok) {
    double v = 0;
    const char* b = tok.data();
    const char* e = tok.data() + tok.size();
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e)
        throw std::invalid_argument("kernel file: cannot parse number '" + tok + "'");
    return v;
}

}  // namespace

RateKernel parse_kernel_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    TwoLaneRates two{};
    MultiLaneRates multi{};
    bool saw_two = false, saw_multi = false;
    while (std::getline(in, line)) {
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        std::replace(line.begin(), line.end(), '=', ' ');
        std::replace(line.begin(), line.end(), ':', ' ');
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        std::vector<std::string> toks;
        for (std::string t; ls >> t;) toks.push_back(t);
        if (toks.empty()) throw std::invalid_argument("kernel file: key '" + key + "' has no value");
        auto scalar = [&] {
            if (toks.size() != 1)
                throw std::invalid_argument("kernel file: key '" + key + "' expects one value");
            return parse_number(toks[0]);
        };
        auto array = [&] {
            std::vector<double> v;
            v.reserve(toks.size());
            for (const auto& t : toks) v.push_back(parse_number(t));
            return v;
        };
        if (key == "d0") two.d0 = scalar(), saw_two = true;
        else if (key == "l0") two.l0 = scalar(), saw_two = true;
        else if (key == "d1") two.d1 = scalar(), saw_two = true;
        else if (key == "l1") two.l1 = scalar(), saw_two = true;
        else if (key == "p") two.p = scalar(), saw_two = true;
        else if (key == "q") two.q = scalar(), saw_two = true;
        else if (key == "d") multi.d = array(), saw_multi = true;
        else if (key == "l") multi.l = array(), saw_multi = true;
        else if (key == "Q") multi.Q = array(), saw_multi = true;
        else throw std::invalid_argument("kernel file: unknown key '" + key + "'");
    }
    if (saw_two && saw_multi)
        throw std::invalid_argument("kernel file mixes two-lane keys with multilane arrays");
    if (saw_multi) return multi;
    if (saw_two) return two;
    throw std::invalid_argument("kernel file contains no rate keys");
}

RateKernel parse_kernel_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open kernel file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_kernel_text(ss.str());
}

}  // namespace mlsep
