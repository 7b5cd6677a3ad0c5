#include "mlsep/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

namespace mlsep {

using nlohmann::json;

namespace {

json geometry_json(const LaneGeometry& g) {
    return json{{"n_lanes", g.n_lanes},
                {"length", g.length},
                {"h_boundary", g.h_boundary == HBoundary::Periodic ? "periodic" : "closed"},
                {"v_topology", g.v_topology == VTopology::TwoLane ? "two_lane" : "torus"}};
}

LaneGeometry geometry_from(const json& j) {
    LaneGeometry g;
    g.n_lanes = j.at("n_lanes").get<int>();
    g.length = j.at("length").get<int>();
    const std::string hb = j.at("h_boundary").get<std::string>();
    if (hb == "periodic")
        g.h_boundary = HBoundary::Periodic;
    else if (hb == "closed")
        g.h_boundary = HBoundary::Closed;
    else
        throw std::invalid_argument("geometry: unknown h_boundary '" + hb + "'");
    const std::string vt = j.at("v_topology").get<std::string>();
    if (vt == "two_lane")
        g.v_topology = VTopology::TwoLane;
    else if (vt == "torus")
        g.v_topology = VTopology::Torus;
    else
        throw std::invalid_argument("geometry: unknown v_topology '" + vt + "'");
    g.validate();
    return g;
}

json config_json(const Config& c) {
    const auto& g = c.geometry();
    std::vector<std::string> lanes;
    for (int lane = 0; lane < g.n_lanes; ++lane) {
        std::string bits(g.length, '0');
        for (int z = g.col_min(); z <= g.col_max(); ++z)
            if (c.get(z, lane)) bits[g.column_offset(z)] = '1';
        lanes.push_back(std::move(bits));
    }
    return json{{"geometry", geometry_json(g)}, {"lanes", lanes}};
}

Config config_from(const json& j) {
    const LaneGeometry g = geometry_from(j.at("geometry"));
    Config c(g);
    const auto lanes = j.at("lanes").get<std::vector<std::string>>();
    if (static_cast<int>(lanes.size()) != g.n_lanes)
        throw std::invalid_argument("config: lane count mismatch");
    for (int lane = 0; lane < g.n_lanes; ++lane) {
        if (static_cast<int>(lanes[lane].size()) != g.length)
            throw std::invalid_argument("config: bitstring length mismatch");
        for (int z = g.col_min(); z <= g.col_max(); ++z) {
            const char ch = lanes[lane][g.column_offset(z)];
            if (ch != '0' && ch != '1') throw std::invalid_argument("config: bitstring must be 0/1");
            c.set(z, lane, ch == '1');
        }
    }
    return c;
}

long long step_from_json(const json& j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "+inf") return kStepPlusInf;
        if (s == "-inf") return kStepMinusInf;
        throw std::invalid_argument("step index: expected integer, \"+inf\" or \"-inf\"");
    }
    return j.get<long long>();
}

json step_to_json(long long v) {
    if (v >= kStepPlusInf) return "+inf";
    if (v <= kStepMinusInf) return "-inf";
    return v;
}

json measure_json(const MeasureSpec& spec) {
    return std::visit(
        [](const auto& s) -> json {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, TwoRateBernoulli>) {
                return json{{"type", "two_rate_bernoulli"}, {"rho0", s.rho0}, {"rho1", s.rho1}};
            } else if constexpr (std::is_same_v<T, BernoulliTotal>) {
                return json{{"type", "bernoulli_total"}, {"rho", s.rho}, {"p", s.p}, {"q", s.q}};
            } else if constexpr (std::is_same_v<T, ReversibleProfile>) {
                return json{{"type", "reversible_profile"},
                            {"theta", s.theta},
                            {"c", s.c},
                            {"lambda", s.lambda},
                            {"center", s.center}};
            } else if constexpr (std::is_same_v<T, ConditionedBlocking>) {
                return json{{"type", "conditioned_blocking"},
                            {"parity", s.kind == BlockingParity::Even ? "even" : "odd"},
                            {"n", s.n},
                            {"c", s.c},
                            {"theta", s.theta},
                            {"lambda", s.lambda}};
            } else if constexpr (std::is_same_v<T, PartialBlocking>) {
                const char* kind = s.kind == PartialBlockingKind::EmptyLane0      ? "empty_lane0"
                                   : s.kind == PartialBlockingKind::FullLane1     ? "full_lane1"
                                                                                  : "empty_lane0_reflected";
                return json{{"type", "partial_blocking"}, {"kind", kind}, {"n", s.n},
                            {"d", s.d},      {"l", s.l},  {"c", s.c}};
            } else if constexpr (std::is_same_v<T, DiracStep>) {
                return json{{"type", "dirac_step"}, {"i", step_to_json(s.i)}, {"j", step_to_json(s.j)}};
            } else if constexpr (std::is_same_v<T, TasepPairBlocking>) {
                return json{{"type", "tasep_pair_blocking"},
                            {"kind", s.kind == TasepPairKind::Breve ? "breve" : "hat"},
                            {"z", s.z},
                            {"p", s.p},
                            {"q", s.q}};
            } else if constexpr (std::is_same_v<T, MultilaneBlocking>) {
                return json{{"type", "multilane_blocking"},
                            {"i", s.i},
                            {"variant", s.variant == MultilaneBlockingVariant::ConditionedProfile
                                            ? "conditioned_profile"
                                            : "uniform_subset"},
                            {"theta", s.theta},
                            {"c", s.c}};
            }
        },
        spec);
}

MeasureSpec measure_from(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "two_rate_bernoulli")
        return TwoRateBernoulli{j.at("rho0").get<double>(), j.at("rho1").get<double>()};
    if (type == "bernoulli_total")
        return BernoulliTotal{j.at("rho").get<double>(), j.value("p", 1.0), j.value("q", 1.0)};
    if (type == "reversible_profile")
        return ReversibleProfile{j.at("theta").get<double>(), j.value("c", 1.0),
                                 j.at("lambda").get<double>(), j.value("center", 0)};
    if (type == "conditioned_blocking") {
        const std::string parity = j.at("parity").get<std::string>();
        if (parity != "even" && parity != "odd")
            throw std::invalid_argument("conditioned_blocking: parity must be even or odd");
        return ConditionedBlocking{parity == "even" ? BlockingParity::Even : BlockingParity::Odd,
                                   j.value("n", 0), j.value("c", 1.0), j.at("theta").get<double>(),
                                   j.at("lambda").get<double>()};
    }
    if (type == "partial_blocking") {
        const std::string kind = j.at("kind").get<std::string>();
        PartialBlockingKind k;
        if (kind == "empty_lane0")
            k = PartialBlockingKind::EmptyLane0;
        else if (kind == "full_lane1")
            k = PartialBlockingKind::FullLane1;
        else if (kind == "empty_lane0_reflected")
            k = PartialBlockingKind::EmptyLane0Reflected;
        else
            throw std::invalid_argument("partial_blocking: unknown kind '" + kind + "'");
        return PartialBlocking{k, j.value("n", 0), j.at("d").get<double>(), j.at("l").get<double>(),
                               j.value("c", 1.0)};
    }
    if (type == "dirac_step") return DiracStep{step_from_json(j.at("i")), step_from_json(j.at("j"))};
    if (type == "tasep_pair_blocking") {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind != "breve" && kind != "hat")
            throw std::invalid_argument("tasep_pair_blocking: kind must be breve or hat");
        return TasepPairBlocking{kind == "breve" ? TasepPairKind::Breve : TasepPairKind::Hat,
                                 j.value("z", 0), j.value("p", 1.0), j.value("q", 1.0)};
    }
    if (type == "multilane_blocking") {
        const std::string variant = j.at("variant").get<std::string>();
        if (variant != "conditioned_profile" && variant != "uniform_subset")
            throw std::invalid_argument("multilane_blocking: unknown variant '" + variant + "'");
        return MultilaneBlocking{j.at("i").get<int>(),
                                 variant == "conditioned_profile"
                                     ? MultilaneBlockingVariant::ConditionedProfile
                                     : MultilaneBlockingVariant::UniformSubset,
                                 j.value("theta", 2.0), j.value("c", 1.0)};
    }
    throw std::invalid_argument("unknown measure type '" + type + "'");
}

json kernel_json(const RateKernel& k) {
    if (std::holds_alternative<TwoLaneRates>(k)) {
        const auto& t = std::get<TwoLaneRates>(k);
        return json{{"type", "two_lane"}, {"d0", t.d0}, {"l0", t.l0},
                    {"d1", t.d1},         {"l1", t.l1}, {"p", t.p},  {"q", t.q}};
    }
    const auto& m = std::get<MultiLaneRates>(k);
    return json{{"type", "multilane"}, {"d", m.d}, {"l", m.l}, {"Q", m.Q}};
}

RateKernel kernel_from(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "two_lane")
        return TwoLaneRates{j.at("d0").get<double>(), j.at("l0").get<double>(),
                            j.at("d1").get<double>(), j.at("l1").get<double>(),
                            j.at("p").get<double>(),  j.at("q").get<double>()};
    if (type == "multilane") {
        MultiLaneRates m;
        m.d = j.at("d").get<std::vector<double>>();
        m.l = j.at("l").get<std::vector<double>>();
        m.Q = j.at("Q").get<std::vector<double>>();
        return m;
    }
    throw std::invalid_argument("unknown kernel type '" + type + "'");
}

json ztests_json(const std::vector<ZTest>& tests) {
    json arr = json::array();
    for (const auto& t : tests)
        arr.push_back(json{{"name", t.name},
                           {"value0", t.value0},
                           {"value1", t.value1},
                           {"z", std::isfinite(t.z) ? json(t.z) : json(t.z > 0 ? "inf" : "-inf")},
                           {"significant", t.significant}});
    return arr;
}

}  // namespace

std::string config_to_json(const Config& c) { return config_json(c).dump(); }
Config config_from_json(const std::string& text) { return config_from(json::parse(text)); }

std::string geometry_to_json(const LaneGeometry& g) { return geometry_json(g).dump(); }
LaneGeometry geometry_from_json(const std::string& text) {
    return geometry_from(json::parse(text));
}

LaneGeometry parse_geometry(const std::string& text) {
    // "LxN:periodic|closed[:torus]"
    const auto xpos = text.find('x');
    const auto cpos = text.find(':');
    if (xpos == std::string::npos || cpos == std::string::npos || cpos < xpos)
        throw std::invalid_argument("geometry: expected LxN:periodic|closed, got '" + text + "'");
    LaneGeometry g;
    g.length = std::stoi(text.substr(0, xpos));
    g.n_lanes = std::stoi(text.substr(xpos + 1, cpos - xpos - 1));
    std::string rest = text.substr(cpos + 1);
    std::string vt;
    if (const auto c2 = rest.find(':'); c2 != std::string::npos) {
        vt = rest.substr(c2 + 1);
        rest = rest.substr(0, c2);
    }
    if (rest == "periodic")
        g.h_boundary = HBoundary::Periodic;
    else if (rest == "closed")
        g.h_boundary = HBoundary::Closed;
    else
        throw std::invalid_argument("geometry: boundary must be periodic or closed");
    if (vt.empty())
        g.v_topology = g.n_lanes == 2 ? VTopology::TwoLane : VTopology::Torus;
    else if (vt == "torus")
        g.v_topology = VTopology::Torus;
    else if (vt == "two_lane")
        g.v_topology = VTopology::TwoLane;
    else
        throw std::invalid_argument("geometry: topology must be torus or two_lane");
    g.validate();
    return g;
}

std::string measure_to_json(const MeasureSpec& spec) { return measure_json(spec).dump(); }
MeasureSpec measure_from_json(const std::string& text) { return measure_from(json::parse(text)); }

std::string kernel_to_json(const RateKernel& k) { return kernel_json(k).dump(); }
RateKernel kernel_from_json(const std::string& text) { return kernel_from(json::parse(text)); }

std::string stationarity_report_to_json(const StationarityReport& rep) {
    return json{{"passed", rep.passed},
                {"replicas", rep.replicas},
                {"T", rep.T},
                {"alpha", rep.alpha},
                {"seed", rep.seed},
                {"tests", ztests_json(rep.tests)}}
        .dump(2);
}

std::string rotation_report_to_json(const RotationReport& rep) {
    return json{{"passed", rep.passed}, {"alpha", rep.alpha}, {"tests", ztests_json(rep.tests)}}
        .dump(2);
}

std::string suite_result_to_json(const SuiteResult& res) {
    json checks = json::array();
    for (const auto& [name, ok] : res.checks) checks.push_back(json{{"name", name}, {"ok", ok}});
    return json{{"suite", res.name}, {"passed", res.passed()}, {"checks", checks}}.dump(2);
}

std::string classification_to_json(const R0Classification& cls, double rho_star, bool have_rho_star,
                                   const ZMembership* z) {
    json pairs = json::array();
    for (const auto& s : cls.pairs)
        pairs.push_back(json{{"rho_minus", s.rho_minus}, {"rho_plus", s.rho_plus}});
    json out{{"R0", pairs}, {"degenerate", cls.degenerate}};
    if (have_rho_star) out["rho_star"] = rho_star;
    if (z) {
        out["in_Z"] = z->inside;
        out["near_boundary"] = z->near_boundary;
    }
    return out.dump(2);
}

std::string snapshot_to_jsonl(int replica, const Snapshot& snap) {
    json j = config_json(snap.config);
    j["replica"] = replica;
    j["t"] = snap.t;
    return j.dump();
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace mlsep
