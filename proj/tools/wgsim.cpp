// wgsim: runs one experiment from a key=value config and writes CSV + manifest.json.
//
//   wgsim quench --config configs/quench.cfg --out runs/quench
//   wgsim spectrum --set U=10 --set delta_t=0.25
//
// exit status: 0 ok, 1 computation failed, 2 bad invocation or config

#include <wgsim/wgsim.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <unistd.h>

using namespace wgsim;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Config {
public:
    void load(const fs::path& file) {
        std::ifstream in(file);
        if (!in) throw config_error("cannot open config " + file.string());
        std::string line;
        int no = 0;
        while (std::getline(in, line)) {
            ++no;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            if (trim(line).empty()) continue;
            try {
                set(line);
            } catch (const config_error& e) {
                throw config_error(file.string() + ":" + std::to_string(no) + ": " + e.what());
            }
        }
    }

    void set(const std::string& kv) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw config_error("expected key=value, got '" + kv + "'");
        std::string k = trim(kv.substr(0, eq)), v = trim(kv.substr(eq + 1));
        if (k.empty()) throw config_error("empty key in '" + kv + "'");
        values_[k] = v;
    }

    bool has(const std::string& k) const { return values_.count(k) > 0; }

    std::string str(const std::string& k, const std::string& def) {
        used_.insert(k);
        auto it = values_.find(k);
        return it == values_.end() ? def : it->second;
    }

    double num(const std::string& k, double def) {
        used_.insert(k);
        auto it = values_.find(k);
        if (it == values_.end()) return def;
        return parse_double(k, it->second);
    }

    int integer(const std::string& k, int def) {
        double v = num(k, def);
        if (v != std::floor(v) || std::abs(v) > 1e9) throw config_error(k + " must be an integer");
        return static_cast<int>(v);
    }

    std::vector<double> list(const std::string& k, const std::vector<double>& def) {
        used_.insert(k);
        auto it = values_.find(k);
        if (it == values_.end()) return def;
        std::vector<double> out;
        std::stringstream ss(it->second);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(parse_double(k, trim(item)));
        if (out.empty()) throw config_error(k + " is empty");
        return out;
    }

    std::vector<std::string> unused() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : values_)
            if (!used_.count(k)) out.push_back(k);
        return out;
    }

    json to_json() const {
        json j = json::object();
        for (const auto& [k, v] : values_) j[k] = v;
        return j;
    }

private:
    static std::string trim(const std::string& s) {
        auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return "";
        auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    }

    static double parse_double(const std::string& k, const std::string& v) {
        try {
            std::size_t pos = 0;
            double d = std::stod(v, &pos);
            if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw config_error(k + ": not a finite number: '" + v + "'");
        }
    }

    std::map<std::string, std::string> values_;
    std::set<std::string> used_;
};

class Csv {
public:
    Csv(const fs::path& p, const std::vector<std::string>& header) : out_(p) {
        if (!out_) throw std::runtime_error("cannot write " + p.string());
        out_.precision(17);
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << '\n';
    }
    template <class... T>
    void row(const T&... v) {
        int i = 0;
        ((out_ << (i++ ? "," : "") << v), ...);
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

Boundary boundary_of(Config& c, const std::string& def) {
    auto b = c.str("boundary", def);
    if (b == "periodic") return Boundary::periodic;
    if (b == "open") return Boundary::open;
    throw config_error("boundary must be open or periodic");
}

LatticeModel model_of(Config& c, const std::string& default_geometry) {
    auto geo = c.str("geometry", default_geometry);
    double J = c.num("J", 1.0), U = c.num("U", default_geometry == "square" ? 10.0 : 0.0);
    if (geo == "chain") return build_bose_hubbard(c.integer("nx", 8), J, U, boundary_of(c, "periodic"));
    if (geo == "square")
        return build_fqh(c.integer("nx", 4), c.integer("ny", 4), J, U, c.num("phi_plaq", 0.25), boundary_of(c, "periodic"));
    throw config_error("geometry must be chain or square");
}

json model_json(const LatticeModel& m) {
    return {{"geometry", m.geometry == Geometry::chain ? "chain" : "square"},
            {"nx", m.nx},
            {"ny", m.ny},
            {"J", m.J},
            {"U", m.U},
            {"phi_plaq", m.phi_plaq},
            {"boundary", m.boundary == Boundary::periodic ? "periodic" : "open"}};
}

std::vector<double> omega_grid(Config& c) {
    if (c.has("omega_grid")) return c.list("omega_grid", {});
    double lo = c.num("omega_min", -2.85), hi = c.num("omega_max", -2.5);
    int n = c.integer("omega_points", 31);
    if (n < 1) throw config_error("omega_points must be positive");
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
    return g;
}

json run_quench_experiment(Config& c, const fs::path& dir) {
    auto m = model_of(c, "chain");
    double dt = c.num("delta_t", 0.2 / m.J);
    int steps = c.integer("n_steps", static_cast<int>(std::lround(4.0 / (m.J * dt))));
    std::vector<int> sites;
    if (c.has("sites"))
        for (double s : c.list("sites", {})) sites.push_back(static_cast<int>(s));
    else
        sites = central_pair(m.n_sites());
    auto r = run_quench(m, dt, steps, sites);
    Csv csv(dir / "correlators.csv", {"step", "time", "i", "j", "C"});
    for (std::size_t s = 0; s < r.times.size(); ++s)
        for (int i = 0; i < m.n_sites(); ++i)
            for (int j = 0; j < m.n_sites(); ++j) csv.row(s, r.times[s], i, j, r.correlators[s](i, j));
    auto sm = side_masses(r.correlators.back(), m.n_sites() / 2.0 - 0.5);
    return {{"model", model_json(m)},
            {"delta_t", dt},
            {"n_steps", steps},
            {"sites", sites},
            {"final", {{"same_side", sm.same}, {"opposite_side", sm.opposite}}},
            {"files", {"correlators.csv"}}};
}

json run_spectrum_experiment(Config& c, const fs::path& dir) {
    auto m = model_of(c, "square");
    double dt = c.num("delta_t", 0.25);
    int kmax = c.integer("max_sector", 2);
    Csv csv(dir / "energies.csv", {"sector", "index", "energy"});
    json out = {{"model", model_json(m)}, {"delta_t", dt}};
    for (int k = 1; k <= kmax; ++k) {
        auto r = effective_energies(step_unitary(m, dt, k), dt, k);
        for (Eigen::Index i = 0; i < r.energies.size(); ++i) csv.row(k, i, r.energies[i]);
        out["sectors"][std::to_string(k)] = {{"distinct", count_distinct(r.energies, 1e-6)},
                                             {"lowest", r.energies[0]},
                                             {"aliased", r.aliased}};
        if (k == 2 && r.energies.size() >= 3) {
            auto g = ground_space(r);
            out["ground"] = {{"gap", g.gap}, {"split", g.degeneracy_split}, {"energies", {g.energies[0], g.energies[1]}}};
            if (m.geometry == Geometry::square && m.boundary == Boundary::periodic && m.nx == m.ny &&
                std::abs(m.phi_plaq * m.nx * m.ny - 4.0) < 1e-9) {
                AnalyticConfig cfg{c.num("cm_a", 0.5), c.num("cm_b", 1.0)};
                auto b = enumerate_basis(m.n_sites(), {2});
                Vec a1 = g.states.col(0), a2 = g.states.col(1);
                for (int l : {1, 2}) {
                    auto o = overlap_optimize(analytic_ground_state(m, l, b, cfg).amplitudes, a1, a2);
                    out["ground"]["overlap_l" + std::to_string(l)] = o.value;
                }
            }
        }
    }
    out["files"] = {"energies.csv"};
    return out;
}

json run_steady_state_experiment(Config& c, const fs::path& dir) {
    auto m = model_of(c, "square");
    double dt = c.num("delta_t", 0.25), K_dt = c.num("K_dt", 0.1), ratio = c.num("alpha_ratio", 0.1);
    int n_max = c.integer("n_max", 3), cut = c.integer("ancilla_cut", 3);
    double tol = c.num("tolerance", 1e-9);
    auto grid = omega_grid(c);
    auto gs = ground_space(effective_energies(step_unitary(m, dt, 2), dt, 2));

    Csv csv(dir / "steady_state.csv", {"omega", "n_photon", "P1", "P2", "P2_over_P1", "overlap", "iterations", "residual"});
    std::optional<FullChannel> first;
    std::optional<SteadyStateSolver> donor;
    std::optional<DensityMatrix> warm;
    int failed = 0;
    for (double w : grid) {
        FullChannel ch(m, dt, DriveDissParams::from_channel(K_dt, ratio * K_dt, w, dt), n_max, cut);
        if (!donor) {
            first.emplace(ch);
            donor.emplace(*first);
        }
        SteadyStateSolver solver(ch, *donor);
        auto r = with_observables(solver.solve(warm ? &*warm : nullptr, tol, c.integer("max_iter", 500)), gs.states);
        warm = r.rho_fix;
        failed += !r.converged;
        csv.row(w, r.n_photon, r.P1, r.P2, r.P1 > 0 ? r.P2 / r.P1 : 0.0, r.postselected_overlap.value_or(0.0), r.iterations,
                r.residual);
        std::cerr << "omega " << w << " n " << r.n_photon << " iterations " << r.iterations << '\n';
    }
    if (failed) throw std::runtime_error(std::to_string(failed) + " drive points did not converge");
    return {{"model", model_json(m)},
            {"delta_t", dt},
            {"K_dt", K_dt},
            {"alpha", ratio * K_dt},
            {"n_max", n_max},
            {"ground_gap", gs.gap},
            {"files", {"steady_state.csv"}}};
}

json run_incoherent_experiment(Config& c, const fs::path& dir) {
    auto m = model_of(c, "chain");
    double dt = c.num("delta_t", 0.25);
    int n_sys = c.integer("n_sys", 2), steps = c.integer("n_steps", 200);
    double need = IncoherentEngine::memory_estimate(m.n_sites(), n_sys);
    double avail = static_cast<double>(sysconf(_SC_PHYS_PAGES)) * static_cast<double>(sysconf(_SC_PAGE_SIZE));
    if (need > 0.5 * avail)
        throw std::runtime_error("joint density matrix needs " + std::to_string(need) + " bytes; " +
                                 std::to_string(avail) + " available");
    auto [p1, p2] = incoherent_phases(m, dt);
    IncoherentParams p{c.num("chi", 0.048), c.num("p_ref", 0.01), c.num("phi1", p1), c.num("phi2", p2)};
    IncoherentEngine eng(m, dt, p, n_sys);
    auto sb = eng.system_basis();
    Mat ground;
    if (n_sys >= 2 && m.n_sites() >= 2) ground = ground_space(effective_energies(step_unitary(m, dt, 2), dt, 2)).states;
    Vec sys = Vec::Zero(static_cast<Eigen::Index>(sb->size()));
    sys[0] = 1.0;
    auto rho = eng.initial_state(sys);
    std::vector<std::string> head{"step", "mean_n", "var_n"};
    for (int k = 0; k <= n_sys; ++k) head.push_back("P" + std::to_string(k));
    head.push_back("ground_population");
    Csv csv(dir / "incoherent.csv", head);
    auto write = [&](int s) {
        auto o = system_observables(eng.system_state(rho), ground.size() ? &ground : nullptr);
        std::ostringstream line;
        line.precision(17);
        line << s << ',' << o.mean_n << ',' << o.var_n;
        for (double v : o.sector_population) line << ',' << v;
        line << ',' << o.ground_population.value_or(0.0);
        csv.row(line.str());
        return o;
    };
    write(0);
    IncoherentObservables last;
    for (int s = 1; s <= steps; ++s) {
        rho = eng.step(rho);
        last = write(s);
    }
    return {{"model", model_json(m)},
            {"delta_t", dt},
            {"chi", p.chi},
            {"p_ref", p.p_ref},
            {"phi1", p.phi1},
            {"phi2", p.phi2},
            {"n_sys", n_sys},
            {"final", {{"mean_n", last.mean_n}, {"sector_population", last.sector_population}}},
            {"files", {"incoherent.csv"}}};
}

json run_subtraction_experiment(Config& c, const fs::path& dir) {
    auto name = c.str("pulse", "square");
    if (name != "square" && name != "bump") throw config_error("pulse must be square or bump");
    PulseShape pulse = name == "square" ? PulseShape::square() : PulseShape::bump();
    auto gammas = c.list("gamma_grid", {10, 100, 1000, 4000, 10000});
    auto ks = c.list("k_list", {1, 2, 3, 4});
    int grid = c.integer("grid_points", 4096);
    Csv csv(dir / "subtraction.csv", {"pulse", "gamma", "k", "layer", "infidelity"});
    Csv pf(dir / "p_fail.csv", {"pulse", "gamma", "p_fail_k1", "p_fail_k2"});
    for (double g : gammas) {
        if (!(g > 0)) throw config_error("gamma_grid entries must be positive");
        auto d = derive_quantities(pulse, g, grid);
        for (double kd : ks) {
            int k = static_cast<int>(kd);
            if (k < 1 || k != kd) throw config_error("k_list entries must be positive integers");
            csv.row(name, g, k, "single", 1.0 - f_sub_single(d, k));
            if (k >= 2) csv.row(name, g, k, "double", 1.0 - f_sub_double(d, k));
        }
        pf.row(name, g, p_fail_k1(d), p_fail_k2(d));
    }
    return {{"pulse", name}, {"grid_points", grid}, {"files", {"subtraction.csv", "p_fail.csv"}}};
}

json run_compile_experiment(Config& c, const fs::path& dir) {
    auto m = model_of(c, "chain");
    double dt = c.num("delta_t", 0.2), l_x = c.num("l_x", 1.0);
    Schedule s;
    if (m.geometry == Geometry::chain) {
        auto v = c.str("variant", "general");
        if (v != "general" && v != "even_simple") throw config_error("variant must be general or even_simple");
        s = compile_1d(m, dt, l_x, v == "general" ? Variant1D::general : Variant1D::even_simple);
    } else {
        s = compile_2d(m, dt, l_x, c.num("l_y", (m.nx / 2 + 0.5) * l_x));
    }
    {
        std::ofstream out(dir / "schedule.txt");
        out << to_text(s.events);
    }
    json cert = json::object();
    for (int k = 1; k <= c.integer("certify_sectors", 2); ++k) {
        auto b = enumerate_basis(m.n_sites(), {k});
        Mat ref(sequence_operator(b, trotter_step_sequence(m, dt)).matrix);
        auto r = certify_equivalence(Mat(simulate_schedule(s, b).unitary.matrix), ref);
        cert[std::to_string(k)] = {{"equal", r.equal}, {"distance", r.distance}};
        if (!r.equal) throw std::runtime_error("schedule does not reproduce the Trotter step in sector " + std::to_string(k));
    }
    return {{"model", model_json(m)},
            {"delta_t", dt},
            {"waveguides", s.layout.n_waveguides},
            {"events", s.events.size()},
            {"certificate", cert},
            {"files", {"schedule.txt"}}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"time-bin waveguide simulator experiments"};
    std::string experiment, config_file, out_dir = "wgsim_out";
    std::vector<std::string> sets;
    app.add_option("experiment", experiment, "quench|spectrum|steady_state|incoherent|subtraction|compile")
        ->required()
        ->check(CLI::IsMember({"quench", "spectrum", "steady_state", "incoherent", "subtraction", "compile"}));
    app.add_option("-c,--config", config_file, "key=value config file")->check(CLI::ExistingFile);
    app.add_option("-s,--set", sets, "override a config key (key=value), repeatable");
    app.add_option("-o,--out", out_dir, "output directory");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    Config cfg;
    json result;
    try {
        if (!config_file.empty()) cfg.load(config_file);
        for (const auto& s : sets) cfg.set(s);
        if (cfg.has("output")) out_dir = cfg.str("output", out_dir);
        cfg.integer("seed", 0);
        fs::create_directories(out_dir);
        if (experiment == "quench") result = run_quench_experiment(cfg, out_dir);
        else if (experiment == "spectrum") result = run_spectrum_experiment(cfg, out_dir);
        else if (experiment == "steady_state") result = run_steady_state_experiment(cfg, out_dir);
        else if (experiment == "incoherent") result = run_incoherent_experiment(cfg, out_dir);
        else if (experiment == "subtraction") result = run_subtraction_experiment(cfg, out_dir);
        else result = run_compile_experiment(cfg, out_dir);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid parameters: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    for (const auto& k : cfg.unused()) std::cerr << "warning: unused config key '" << k << "'\n";

    json manifest = {{"experiment", experiment}, {"config", cfg.to_json()}, {"result", result}};
    std::ofstream(fs::path(out_dir) / "manifest.json") << manifest.dump(2) << '\n';
    std::cout << manifest["result"].dump(2) << '\n';
    return 0;
}
