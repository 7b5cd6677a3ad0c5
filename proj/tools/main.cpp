// mlsep: multilane exclusion process simulator and analysis toolkit.
//
// Subcommands: sample, simulate, couple, flux, classify, phase-diagram, verify.
// Every output file embeds the resolved experiment parameters and master seed,
// so re-running a command reproduces the file byte for byte.

#include <atomic>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "mlsep/analysis.hpp"
#include "mlsep/dynamics.hpp"
#include "mlsep/flux.hpp"
#include "mlsep/kernels.hpp"
#include "mlsep/measures.hpp"
#include "mlsep/serialize.hpp"

namespace {

using namespace mlsep;

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    return f;
}

// --measure accepts inline JSON or @file
MeasureSpec load_measure(const std::string& arg) {
    if (!arg.empty() && arg[0] == '@') {
        std::ifstream f(arg.substr(1));
        if (!f) throw std::runtime_error("cannot open measure file: " + arg.substr(1));
        std::ostringstream ss;
        ss << f.rdbuf();
        return measure_from_json(ss.str());
    }
    return measure_from_json(arg);
}

std::string experiment_line(const std::string& command, const RateKernel* kernel,
                            const std::string& measure_json, const LaneGeometry& g, double T,
                            int replicas, std::uint64_t seed) {
    std::ostringstream meta;
    meta << "{\"experiment\":{\"command\":\"" << command << "\"";
    if (kernel) meta << ",\"kernel\":" << kernel_to_json(*kernel);
    if (!measure_json.empty()) meta << ",\"measure\":" << measure_json;
    meta << ",\"geometry\":" << geometry_to_json(g) << ",\"T\":" << format_double(T)
         << ",\"replicas\":" << replicas << ",\"seed\":" << seed << "}}";
    return meta.str();
}

// deterministic replica fan-out: results land in their slot regardless of jobs
template <class Fn>
void for_each_replica(int replicas, int jobs, Fn fn) {
    if (jobs <= 1) {
        for (int k = 0; k < replicas; ++k) fn(k);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j)
        pool.emplace_back([&] {
            for (int k = next.fetch_add(1); k < replicas; k = next.fetch_add(1)) fn(k);
        });
    for (auto& t : pool) t.join();
}

int cmd_sample(const std::string& measure_arg, const std::string& geometry_arg, int count,
               std::uint64_t seed, const std::string& out_path) {
    const MeasureSpec spec = load_measure(measure_arg);
    const LaneGeometry g = parse_geometry(geometry_arg);
    auto out = open_out(out_path);
    out << experiment_line("sample", nullptr, measure_to_json(spec), g, 0, count, seed) << "\n";
    for (int k = 0; k < count; ++k) {
        const Config c = sample(spec, g, stream_seed(seed, k));
        out << snapshot_to_jsonl(k, {0.0, c}) << "\n";
    }
    return 0;
}

int cmd_simulate(const std::string& kernel_path, const std::string& measure_arg,
                 const std::string& geometry_arg, double T, const std::vector<double>& snapshots,
                 int replicas, std::uint64_t seed, int jobs, const std::string& out_path,
                 const std::vector<int>& flux_cuts) {
    const RateKernel kernel = parse_kernel_file(kernel_path);
    const MeasureSpec spec = load_measure(measure_arg);
    const LaneGeometry g = parse_geometry(geometry_arg);

    std::vector<Trajectory> trajs(replicas);
    for_each_replica(replicas, jobs, [&](int k) {
        RunOptions ro;
        ro.T = T;
        ro.snapshot_times = snapshots;
        ro.flux_cuts = flux_cuts;
        const Config init = sample(spec, g, stream_seed(seed, 2 * k));
        trajs[k] = run(init, kernel, ro, stream_seed(seed, 2 * k + 1));
    });

    auto out = open_out(out_path);
    out << experiment_line("simulate", &kernel, measure_to_json(spec), g, T, replicas, seed) << "\n";
    for (int k = 0; k < replicas; ++k) {
        for (const auto& snap : trajs[k].snapshots) out << snapshot_to_jsonl(k, snap) << "\n";
        std::ostringstream fin;
        fin << "{\"replica\":" << k << ",\"final\":" << config_to_json(trajs[k].final_config)
            << ",\"t\":" << format_double(trajs[k].final_time)
            << ",\"events\":" << trajs[k].accepted_events << ",\"stream\":" << trajs[k].seed;
        if (!flux_cuts.empty()) {
            fin << ",\"net_crossings\":[";
            for (std::size_t i = 0; i < trajs[k].net_crossings.size(); ++i)
                fin << (i ? "," : "") << trajs[k].net_crossings[i];
            fin << "]";
        }
        fin << "}";
        out << fin.str() << "\n";
    }
    return 0;
}

int cmd_couple(const std::string& kernel_path, const std::string& eta_arg, const std::string& xi_arg,
               const std::string& geometry_arg, double T, const std::vector<double>& snapshots,
               int replicas, std::uint64_t seed, int jobs, const std::string& out_path) {
    const RateKernel kernel = parse_kernel_file(kernel_path);
    const MeasureSpec eta_spec = load_measure(eta_arg);
    const MeasureSpec xi_spec = load_measure(xi_arg);
    const LaneGeometry g = parse_geometry(geometry_arg);

    std::vector<CoupledTrajectory> trajs(replicas);
    for_each_replica(replicas, jobs, [&](int k) {
        CoupledRunOptions co;
        co.T = T;
        co.snapshot_times = snapshots;
        CoupledConfig cc{sample(eta_spec, g, stream_seed(seed, 3 * k)),
                         sample(xi_spec, g, stream_seed(seed, 3 * k + 1))};
        trajs[k] = run_coupled(cc, kernel, co, stream_seed(seed, 3 * k + 2));
    });

    auto out = open_out(out_path);
    out << experiment_line("couple", &kernel, measure_to_json(eta_spec), g, T, replicas, seed)
        << "\n";
    for (int k = 0; k < replicas; ++k) {
        const auto& tr = trajs[k];
        for (const auto& snap : tr.snapshots) {
            std::ostringstream line;
            line << "{\"replica\":" << k << ",\"t\":" << format_double(snap.t)
                 << ",\"eta\":" << config_to_json(snap.cc.eta)
                 << ",\"xi\":" << config_to_json(snap.cc.xi)
                 << ",\"discrepancies\":" << count_discrepancies(snap.cc) << "}";
            out << line.str() << "\n";
        }
        out << "{\"replica\":" << k << ",\"final_discrepancies\":" << count_discrepancies(tr.final_cc)
            << ",\"coalescences\":" << tr.coalescences
            << ",\"monotone\":" << (tr.discrepancy_count_monotone ? "true" : "false") << "}\n";
    }
    return 0;
}

int cmd_flux(double gamma0, double gamma1, double r, int grid, const std::string& out_path) {
    const FluxCurve curve(gamma0, gamma1, r);
    std::ostream* os = &std::cout;
    std::ofstream f;
    if (!out_path.empty()) {
        f = open_out(out_path);
        os = &f;
    }
    *os << "rho,G,G1,G2,G3\r\n";
    for (int i = 0; i < grid; ++i) {
        const double rho = 2.0 * i / (grid - 1);
        *os << format_double(rho) << "," << format_double(curve.G(rho));
        for (int order = 1; order <= 3; ++order) {
            try {
                *os << "," << format_double(curve.G_derivative(rho, order));
            } catch (const std::domain_error&) {
                *os << ",nan";  // kink of the q = 0 flux at rho = 1
            }
        }
        *os << "\r\n";
    }
    return 0;
}

int cmd_classify(bool have_dr, double d, double r, const std::string& kernel_path,
                 const std::string& out_path) {
    R0Classification cls;
    double rho_star = 0;
    bool have_rho_star = false;
    ZMembership zm;
    const ZMembership* zp = nullptr;
    nlohmann::json query;
    if (have_dr) {
        query = {{"d", d}, {"r", r}};
        cls = classify_R0(FluxCurve::reduced(d, r));
        if (r > 0) {
            zm = in_Z(d, r);
            rho_star = zm.rho_star;
            have_rho_star = true;
            zp = &zm;
        }
    } else {
        const RateKernel kernel = parse_kernel_file(kernel_path);
        if (!std::holds_alternative<TwoLaneRates>(kernel))
            throw std::invalid_argument("classify: two-lane kernel required");
        const TwoLaneRates k = normalize(std::get<TwoLaneRates>(kernel));
        query = nlohmann::json::parse(kernel_to_json(RateKernel(k)));
        cls = classify_R0(k);
        if (k.q > 0 && k.gamma0() + k.gamma1() != 0) {
            zm = in_Z(k.dparam(), k.r());
            rho_star = zm.rho_star;
            have_rho_star = true;
            zp = &zm;
        }
    }
    nlohmann::json out = nlohmann::json::parse(classification_to_json(cls, rho_star, have_rho_star, zp));
    out["query"] = query;
    const std::string text = out.dump(2);
    if (out_path.empty())
        std::cout << text << "\n";
    else
        open_out(out_path) << text << "\n";
    return 0;
}

int cmd_phase_diagram(int grid_d, int grid_r, const std::string& out_path) {
    auto out = open_out(out_path);
    out << "d,r,R0_count,in_Z\r\n";
    for (int i = 0; i < grid_d; ++i) {
        const double d = static_cast<double>(i) / (grid_d - 1);
        for (int j = 0; j < grid_r; ++j) {
            const double r = static_cast<double>(j + 1) / grid_r;  // r in (0,1]
            const auto cls = classify_R0(FluxCurve::reduced(d, r));
            const auto zm = in_Z(d, r);
            out << format_double(d) << "," << format_double(r) << ","
                << (cls.degenerate ? -1 : static_cast<int>(cls.pairs.size())) << ","
                << (zm.inside ? 1 : 0) << "\r\n";
        }
    }
    return 0;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, const std::string& out_path) {
    std::vector<std::string> names =
        suite == "all" ? verify_suite_names() : std::vector<std::string>{suite};
    bool all_ok = true;
    std::ostringstream report;
    report << "[";
    for (std::size_t i = 0; i < names.size(); ++i) {
        const SuiteResult res = run_verify_suite(names[i], seed);
        for (const auto& [name, ok] : res.checks)
            std::cout << (ok ? "[PASS] " : "[FAIL] ") << res.name << ": " << name << "\n";
        all_ok &= res.passed();
        report << (i ? "," : "") << suite_result_to_json(res);
    }
    report << "]";
    if (!out_path.empty()) open_out(out_path) << report.str() << "\n";
    return all_ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multilane exclusion process simulator and analysis toolkit"};
    app.require_subcommand(1);

    // sample
    std::string measure_arg, geometry_arg = "64x2:periodic", out_path = "out.jsonl";
    int count = 1;
    std::uint64_t seed = 1;
    auto* sc_sample = app.add_subcommand("sample", "draw configurations from a measure");
    sc_sample->add_option("--measure", measure_arg, "measure spec JSON or @file")->required();
    sc_sample->add_option("--geometry", geometry_arg, "LxN:periodic|closed[:torus]");
    sc_sample->add_option("--count", count, "number of draws");
    sc_sample->add_option("--seed", seed, "master seed");
    sc_sample->add_option("--out", out_path, "output JSONL path");

    // simulate
    std::string kernel_path;
    double T = 10;
    std::vector<double> snapshots;
    int replicas = 1, jobs = 1;
    std::vector<int> flux_cuts;
    auto* sc_sim = app.add_subcommand("simulate", "run the event-driven dynamics");
    sc_sim->add_option("--kernel", kernel_path, "kernel key-value file")->required();
    sc_sim->add_option("--measure", measure_arg, "initial measure spec JSON or @file")->required();
    sc_sim->add_option("--geometry", geometry_arg, "LxN:periodic|closed[:torus]");
    sc_sim->add_option("-T,--time", T, "simulation time");
    sc_sim->add_option("--snapshots", snapshots, "snapshot times")->delimiter(',');
    sc_sim->add_option("--replicas", replicas, "independent replicas");
    sc_sim->add_option("--seed", seed, "master seed");
    sc_sim->add_option("--jobs", jobs, "worker threads (result is jobs-independent)");
    sc_sim->add_option("--out", out_path, "output JSONL path");
    sc_sim->add_option("--flux-cut", flux_cuts, "columns whose net crossing count is recorded")
        ->delimiter(',');

    // couple
    std::string eta_arg, xi_arg;
    auto* sc_couple = app.add_subcommand("couple", "run two copies under basic coupling");
    sc_couple->add_option("--kernel", kernel_path, "kernel key-value file")->required();
    sc_couple->add_option("--measure-eta", eta_arg, "eta initial measure")->required();
    sc_couple->add_option("--measure-xi", xi_arg, "xi initial measure")->required();
    sc_couple->add_option("--geometry", geometry_arg, "LxN:periodic|closed[:torus]");
    sc_couple->add_option("-T,--time", T, "simulation time");
    sc_couple->add_option("--snapshots", snapshots, "snapshot times")->delimiter(',');
    sc_couple->add_option("--replicas", replicas, "independent replicas");
    sc_couple->add_option("--seed", seed, "master seed");
    sc_couple->add_option("--jobs", jobs, "worker threads");
    sc_couple->add_option("--out", out_path, "output JSONL path");

    // flux
    double gamma0 = 1, gamma1 = 1, r = 1;
    int grid = 1001;
    std::string flux_out;
    auto* sc_flux = app.add_subcommand("flux", "tabulate G and its derivatives as CSV");
    sc_flux->add_option("--gamma0", gamma0, "drift on lane 0");
    sc_flux->add_option("--gamma1", gamma1, "drift on lane 1");
    sc_flux->add_option("--r", r, "ratio q/p");
    sc_flux->add_option("--grid", grid, "number of rho grid points")->check(CLI::Range(2, 10000000));
    sc_flux->add_option("--out", flux_out, "output CSV path (default stdout)");

    // classify
    double cd = 0.5, cr = 0.5;
    std::string classify_kernel, classify_out;
    auto* sc_classify = app.add_subcommand("classify", "entropy-shock classification report");
    auto* od = sc_classify->add_option("--d", cd, "reduced drift parameter");
    auto* orr = sc_classify->add_option("--r", cr, "ratio q/p");
    auto* ok = sc_classify->add_option("--kernel", classify_kernel, "kernel key-value file");
    sc_classify->add_option("--out", classify_out, "output JSON path (default stdout)");

    // phase-diagram
    int grid_d = 101, grid_r = 101;
    std::string phase_out = "phase.csv";
    auto* sc_phase = app.add_subcommand("phase-diagram", "R0 cardinality and Z membership per cell");
    sc_phase->add_option("--grid-d", grid_d, "grid points in d")->check(CLI::Range(2, 100000));
    sc_phase->add_option("--grid-r", grid_r, "grid points in r")->check(CLI::Range(2, 100000));
    sc_phase->add_option("--out", phase_out, "output CSV path");

    // verify
    std::string suite = "all", verify_out;
    auto* sc_verify = app.add_subcommand("verify", "statistical verification suites");
    sc_verify->add_option("--suite", suite, "invariance|reversibility|coupling|shocks|multilane|all")
        ->check(CLI::IsMember({"invariance", "reversibility", "coupling", "shocks", "multilane",
                               "all"}));
    sc_verify->add_option("--seed", seed, "master seed");
    sc_verify->add_option("--out", verify_out, "write a JSON report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints help/usage; 0 for --help
        return code == 0 ? 0 : 1;
    }

    try {
        if (sc_sample->parsed()) return cmd_sample(measure_arg, geometry_arg, count, seed, out_path);
        if (sc_sim->parsed())
            return cmd_simulate(kernel_path, measure_arg, geometry_arg, T, snapshots, replicas, seed,
                                jobs, out_path, flux_cuts);
        if (sc_couple->parsed())
            return cmd_couple(kernel_path, eta_arg, xi_arg, geometry_arg, T, snapshots, replicas,
                              seed, jobs, out_path);
        if (sc_flux->parsed()) return cmd_flux(gamma0, gamma1, r, grid, flux_out);
        if (sc_classify->parsed()) {
            const bool have_dr = od->count() > 0 || orr->count() > 0;
            if (have_dr && ok->count() > 0)
                throw std::invalid_argument("classify: give either --d/--r or --kernel, not both");
            if (!have_dr && ok->count() == 0)
                throw std::invalid_argument("classify: need --d/--r or --kernel");
            return cmd_classify(have_dr, cd, cr, classify_kernel, classify_out);
        }
        if (sc_phase->parsed()) return cmd_phase_diagram(grid_d, grid_r, phase_out);
        if (sc_verify->parsed()) return cmd_verify(suite, seed, verify_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
