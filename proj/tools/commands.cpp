#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "mbsense/model.hpp"
#include "mbsense/optimizer.hpp"
#include "mbsense/zzb.hpp"
#include "runconfig.hpp"

namespace fs = std::filesystem;

namespace mbsense::cli {

namespace {

using json = nlohmann::json;

struct Ctx {
    RunConfig rc;
    CommandOptions opt;
    std::string command;
    std::uint64_t seed = 1;
};

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t i) {
    // splitmix64 step, keeps per-point streams independent of the thread layout
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (i + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Runs fn(i) for i in [0, n) on a small worker pool; results land in index order.
template <class T>
std::vector<T> parallel_map(int n, int threads, const std::function<T(int)>& fn) {
    std::vector<T> out(n);
    std::vector<std::string> errors(n);
    int nt = std::max(1, std::min(threads, n));
    auto work = [&](int w) {
        for (int i = w; i < n; i += nt) {
            try {
                out[i] = fn(i);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    if (nt == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < nt; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    for (int i = 0; i < n; ++i)
        if (!errors[i].empty()) throw std::runtime_error("sweep point " + std::to_string(i) + ": " + errors[i]);
    return out;
}

std::vector<std::string> provenance(const Ctx& c) {
    return {std::string("tool: ") + kToolVersion, "command: " + c.command,
            "scenario: " + (c.rc.scenario.empty() ? std::string("unnamed") : c.rc.scenario),
            "config_sha256: " + c.rc.sha256, "seed: " + std::to_string(c.seed)};
}

json provenance_json(const Ctx& c) {
    return {{"tool", kToolVersion},
            {"command", c.command},
            {"scenario", c.rc.scenario.empty() ? std::string("unnamed") : c.rc.scenario},
            {"config_sha256", c.rc.sha256},
            {"seed", c.seed}};
}

void write_file(const Ctx& c, const std::string& name, const std::string& body) {
    fs::create_directories(c.opt.out_dir);
    fs::path p = fs::path(c.opt.out_dir) / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << body;
}

void write_csv(const Ctx& c, const std::string& name, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream s;
    for (const auto& line : provenance(c)) s << "# " << line << '\n';
    for (size_t i = 0; i < header.size(); ++i) s << (i ? "," : "") << header[i];
    s << '\n';
    for (const auto& r : rows) {
        for (size_t i = 0; i < r.size(); ++i) s << (i ? "," : "") << r[i];
        s << '\n';
    }
    write_file(c, name, s.str());
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

void require_sweep(const RunConfig& rc, const std::vector<std::string>& axes, const std::string& cmd) {
    require(rc.has_sweep, cmd + ": config needs a 'sweep' section");
    for (const auto& a : axes)
        if (rc.sweep.axis == a) return;
    std::string list;
    for (const auto& a : axes) list += (list.empty() ? "" : ", ") + a;
    throw ConfigError(cmd + ": sweep axis must be one of " + list);
}

TwoPathScenario two_path(const RunConfig& rc, const std::string& cmd) {
    require(rc.has_bands, cmd + ": config needs 'bands'");
    require(rc.alpha.size() == 2, cmd + ": needs exactly two paths");
    TwoPathScenario s;
    s.bands = BandSet::from(rc.bands);
    s.alpha1 = rc.alpha[0];
    s.alpha2 = rc.alpha[1];
    s.sigma2 = rc.sigma2;
    s.sigma_p = rc.sigma_p;
    s.phase = rc.phase;
    s.timing = rc.timing;
    return s;
}

SrlQuery srl_query(const RunConfig& rc, const TwoPathScenario& s) {
    SrlQuery q;
    q.scenario = s;
    q.lo = rc.srl_lo;
    q.hi = rc.srl_hi;
    q.tol = rc.srl_tol;
    q.scan_points = rc.srl_scan;
    return q;
}

// Sets the second carrier from an aperture or absolute fc2 sweep value.
void place_second_band(std::vector<double>& fc, const std::string& axis, double v) {
    if (fc.size() < 2) throw ConfigError("aperture sweeps need at least two bands");
    fc[1] = axis == "aperture" ? fc[0] + v : v;
}

// Reported aperture: the sweep value itself on aperture axes, fc2 - fc1 otherwise.
double aperture_of(const std::string& axis, const std::vector<double>& fc, double x) {
    return axis == "aperture" ? x : fc[1] - fc[0];
}

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

double sqrt_or_inf(const std::function<double()>& f) {
    try {
        double c = f();
        return c > 0.0 ? std::sqrt(c) : std::numeric_limits<double>::infinity();
    } catch (const SingularMatrixError&) {
        return std::numeric_limits<double>::infinity();
    }
}

int cmd_crb_vs_sep(Ctx& c) {
    const RunConfig& rc = c.rc;
    require_sweep(rc, {"delta_tau"}, c.command);
    TwoPathScenario with = two_path(rc, c.command);
    require(with.bands.M() >= 2, c.command + ": needs at least two bands");
    with.phase = true;
    with.timing = true;
    TwoPathScenario without = with;
    without.phase = false;
    without.timing = false;
    TwoPathScenario single = without;
    single.bands = BandSet{{with.bands.fc[0]}, {with.bands.fs[0]}, {with.bands.N[0]}};

    auto xs = rc.sweep.values();
    using Row = std::vector<std::string>;
    auto rows = parallel_map<Row>(static_cast<int>(xs.size()), c.opt.threads, [&](int i) {
        double x = xs[i];
        return Row{fmt(x), fmt(sqrt_or_inf([&] { return with.c_dtau(x); })),
                   fmt(sqrt_or_inf([&] { return without.c_dtau(x); })),
                   fmt(sqrt_or_inf([&] { return single.c_dtau(x); }))};
    });
    write_csv(c, "crb_vs_sep.csv",
              {"delta_tau_ns", "sqrt_crb_with_distortions_ns", "sqrt_crb_without_ns", "sqrt_crb_single_band_ns"},
              rows);

    const std::vector<std::pair<std::string, const TwoPathScenario*>> curves = {
        {"with_distortions", &with}, {"without", &without}, {"single_band", &single}};
    auto srl = parallel_map<Row>(3, c.opt.threads, [&](int i) {
        try {
            SrlResult r = srl_solve(srl_query(rc, *curves[i].second));
            return Row{curves[i].first, fmt(r.dtau), fmt(r.residual), std::to_string(r.sign_changes.size())};
        } catch (const NoSrlInBracketError&) {
            return Row{curves[i].first, "nan", "nan", "0"};
        }
    });
    write_csv(c, "crb_vs_sep_srl.csv", {"curve", "srl_ns", "residual_ns", "crossings"}, srl);
    return kOk;
}

int cmd_srl_vs_aperture(Ctx& c) {
    const RunConfig& rc = c.rc;
    require_sweep(rc, {"aperture", "fc2"}, c.command);
    TwoPathScenario base = two_path(rc, c.command);
    auto xs = rc.sweep.values();
    using Row = std::vector<std::string>;
    auto rows = parallel_map<Row>(static_cast<int>(xs.size()), c.opt.threads, [&](int i) {
        TwoPathScenario s = base;
        place_second_band(s.bands.fc, rc.sweep.axis, xs[i]);
        std::string ap = fmt(aperture_of(rc.sweep.axis, s.bands.fc, xs[i]));
        try {
            SrlResult r = srl_solve(srl_query(rc, s));
            return Row{ap, fmt(r.dtau), fmt(r.residual), std::to_string(r.sign_changes.size())};
        } catch (const NoSrlInBracketError&) {
            return Row{ap, "nan", "nan", "0"};
        }
    });
    write_csv(c, "srl_vs_aperture.csv", {"aperture_ghz", "srl_ns", "residual_ns", "crossings"}, rows);
    return kOk;
}

int cmd_deb_vs_aperture(Ctx& c) {
    const RunConfig& rc = c.rc;
    require_sweep(rc, {"aperture", "fc2"}, c.command);
    require(rc.has_bands, c.command + ": config needs 'bands'");
    require(!rc.alpha.empty(), c.command + ": config needs 'paths'");
    require(rc.bands.M() >= 2, c.command + ": needs at least two bands");
    PathSet paths{rc.alpha, rc.tau};
    paths.validate();

    struct Col {
        std::string name;
        bool phase, timing;
        double sigma_p;
    };
    std::vector<Col> cols = {{"deb_no_distortion_ns", false, false, rc.sigma_p},
                             {"deb_phase_only_ns", true, false, rc.sigma_p},
                             {"deb_timing_only_ns", false, true, rc.sigma_p},
                             {"deb_phase_and_timing_ns", true, true, rc.sigma_p}};
    for (double sp : rc.sigma_p_sweep) cols.push_back({"deb_sigma_p_" + short_num(sp) + "ns_ns", true, true, sp});

    auto xs = rc.sweep.values();
    using Row = std::vector<std::string>;
    auto rows = parallel_map<Row>(static_cast<int>(xs.size()), c.opt.threads, [&](int i) {
        MultibandConfig cfg = rc.bands;
        place_second_band(cfg.fc, rc.sweep.axis, xs[i]);
        Row row{fmt(aperture_of(rc.sweep.axis, cfg.fc, xs[i]))};
        for (const auto& col : cols) {
            CanonicalParams cp = canonicalize(cfg, paths, DistortionModel::none(cfg.M(), col.sigma_p));
            double v;
            try {
                v = deb(fim_summation(cfg, cp, rc.sigma2, col.sigma_p, col.phase, col.timing), paths.K());
            } catch (const SingularMatrixError&) {
                v = std::numeric_limits<double>::infinity();
            }
            row.push_back(fmt(v));
        }
        return row;
    });
    std::vector<std::string> header{"aperture_ghz"};
    for (const auto& col : cols) header.push_back(col.name);
    write_csv(c, "deb_vs_aperture.csv", header, rows);
    return kOk;
}

ZzbSpec zzb_spec(const RunConfig& rc, const std::string& cmd) {
    require(rc.has_bands, cmd + ": config needs 'bands'");
    ZzbSpec s;
    s.config = rc.bands;
    s.a1 = rc.zzb_a1;
    s.sigma2 = rc.sigma2;
    s.D = rc.zzb_D;
    s.n_tau = rc.zzb_tau_grid;
    s.n_phi = rc.zzb_phi_grid;
    return s;
}

ZzbSpec zzb_point(const RunConfig& rc, ZzbSpec s, double x) {
    if (rc.sweep.axis == "snr_db") {
        s.sigma2 = NoiseModel::from_snr_db(x).sigma2;
    } else {
        place_second_band(s.config.fc, rc.sweep.axis, x);
    }
    return s;
}

MapOptions map_options(const RunConfig& rc) {
    MapOptions m;
    m.trials = rc.map_trials;
    m.tau_grid = rc.map_tau_grid;
    m.phi_grid = rc.map_phi_grid;
    m.threads = 1;
    return m;
}

std::string axis_column(const std::string& axis) {
    if (axis == "snr_db") return "snr_db";
    return "aperture_ghz";
}

double axis_value(const RunConfig& rc, const ZzbSpec& s, double x) {
    return rc.sweep.axis == "snr_db" ? x : aperture_of(rc.sweep.axis, s.config.fc, x);
}

int cmd_zzb(Ctx& c) {
    const RunConfig& rc = c.rc;
    require_sweep(rc, {"snr_db", "aperture", "fc2"}, c.command);
    ZzbSpec base = zzb_spec(rc, c.command);
    auto xs = rc.sweep.values();
    const bool with_map = c.opt.with_map;
    using Row = std::vector<std::string>;
    auto rows = parallel_map<Row>(static_cast<int>(xs.size()), c.opt.threads, [&](int i) {
        ZzbSpec s = zzb_point(rc, base, xs[i]);
        ZzbResult z = zzb_delay(s);
        EcrbResult e = ecrb_single_path(s, rc.ecrb_draws, mix_seed(c.seed, 2 * i));
        Row row{fmt(axis_value(rc, s, xs[i])), fmt(z.sqrt_zzb), fmt(e.ecrb)};
        if (with_map) row.push_back(fmt(map_rmse(s, map_options(rc), mix_seed(c.seed, 2 * i + 1))));
        return row;
    });
    std::vector<std::string> header{axis_column(rc.sweep.axis), "sqrt_zzb_ns", "ecrb_ns"};
    if (with_map) header.push_back("map_rmse_ns");
    write_csv(c, "zzb.csv", header, rows);
    return kOk;
}

int cmd_map_rmse(Ctx& c) {
    const RunConfig& rc = c.rc;
    require_sweep(rc, {"snr_db", "aperture", "fc2"}, c.command);
    ZzbSpec base = zzb_spec(rc, c.command);
    auto xs = rc.sweep.values();
    using Row = std::vector<std::string>;
    auto rows = parallel_map<Row>(static_cast<int>(xs.size()), c.opt.threads, [&](int i) {
        ZzbSpec s = zzb_point(rc, base, xs[i]);
        return Row{fmt(axis_value(rc, s, xs[i])), fmt(map_rmse(s, map_options(rc), mix_seed(c.seed, 2 * i + 1)))};
    });
    write_csv(c, "map_rmse.csv", {axis_column(rc.sweep.axis), "map_rmse_ns"}, rows);
    return kOk;
}

json design_json(const Design& d) {
    return {{"fc_ghz", d.fc}, {"N", d.N}, {"srl_ns", d.srl}, {"deb_ns", d.deb}, {"feasible", d.feasible}};
}

int cmd_optimize(Ctx& c) {
    const RunConfig& rc = c.rc;
    require(rc.has_optimizer, c.command + ": config needs an 'optimizer' section");
    TwoPathScenario model;
    if (!rc.estimated_paths.empty()) {
        double a = mean_amplitude(rc.estimated_paths);
        model.alpha1 = model.alpha2 = cplx(a, 0.0);
    } else {
        require(rc.alpha.size() == 2, c.command + ": needs two paths or optimizer.estimated_paths");
        model.alpha1 = rc.alpha[0];
        model.alpha2 = rc.alpha[1];
    }
    model.sigma2 = rc.sigma2;
    model.sigma_p = rc.sigma_p;
    model.phase = rc.phase;
    model.timing = rc.timing;

    SolverOptions so = rc.solver;
    so.seed = c.seed;
    so.threads = c.opt.threads;

    OptimizeResult r;
    try {
        r = ao_optimize(rc.cs, model, so);
    } catch (const InfeasibleError& e) {
        json rep = {{"provenance", provenance_json(c)},
                    {"status", "infeasible"},
                    {"message", e.what()},
                    {"violated_constraints", e.violated}};
        write_file(c, "optimize.json", rep.dump(2) + "\n");
        std::cerr << "infeasible constraint set: " << e.what() << " (violated rows:";
        for (int v : e.violated) std::cerr << ' ' << v;
        std::cerr << ")\n";
        return kInfeasible;
    }
    Design b1 = baseline_centered(rc.cs, model);
    Design b2 = baseline_outer(rc.cs, model);

    json out;
    out["provenance"] = provenance_json(c);
    out["status"] = r.converged ? "converged" : "iteration_budget_exhausted";
    out["design"] = {{"fc_ghz", r.fc}, {"N", r.N}, {"srl_ns", r.srl}, {"deb_ns", r.deb}};
    out["relaxed_srl_ns"] = r.relaxed_srl;
    out["band_groups"] = band_groups(r.fc, r.N, rc.cs.fs);
    out["feasible"] = r.feasible;
    out["residuals_ghz"] = std::vector<double>(r.residuals.data(), r.residuals.data() + r.residuals.size());
    out["ao_trace_ns"] = r.ao_trace;
    out["sca_traces_ns2"] = r.sca_traces;
    out["best_restart"] = r.best_restart;
    out["restart_srl_ns"] = r.restart_srl;
    out["init_heuristic"] = r.init_heuristic;
    out["baseline_centered"] = design_json(b1);
    out["baseline_outer"] = design_json(b2);
    out["solver"] = {{"omega", so.omega},       {"max_ao", so.max_ao},   {"max_sca", so.max_sca},
                     {"eps", so.eps},           {"ao_tol_ns", so.ao_tol}, {"restarts", so.restarts},
                     {"srl_tol_ns", so.srl_tol}};
    write_file(c, "optimize.json", out.dump(2) + "\n");

    std::vector<std::vector<std::string>> rows;
    for (size_t i = 0; i < r.ao_trace.size(); ++i) {
        std::vector<std::string> row{std::to_string(i), fmt(r.ao_trace[i])};
        if (i < r.sca_traces.size() && !r.sca_traces[i].empty()) {
            const auto& t = r.sca_traces[i];
            row.push_back(std::to_string(t.size() - 1));
            row.push_back(fmt(t.front()));
            row.push_back(fmt(t.back()));
        } else {
            row.insert(row.end(), {"0", "nan", "nan"});
        }
        rows.push_back(row);
    }
    write_csv(c, "optimize_trace.csv",
              {"ao_iteration", "srl_ns", "sca_iterations", "objective_start_ns2", "objective_end_ns2"}, rows);
    return r.converged ? kOk : kBudgetExhausted;
}

int dispatch(Ctx& c);

// Reads the provenance of every artifact in out_dir, reruns the recorded command
// into a scratch directory and compares bytes.
int cmd_verify(Ctx& c) {
    fs::path dir(c.opt.out_dir);
    require(fs::is_directory(dir), "verify: output directory not found: " + dir.string());
    std::map<std::string, std::vector<fs::path>> by_run;  // "command\nseed" -> files
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    int bad = 0;
    for (const auto& p : files) {
        std::ifstream in(p, std::ios::binary);
        std::string command, sha, seed;
        if (p.extension() == ".csv") {
            std::string line;
            while (std::getline(in, line) && line.rfind("# ", 0) == 0) {
                auto k = line.find(": ");
                if (k == std::string::npos) continue;
                std::string key = line.substr(2, k - 2), val = line.substr(k + 2);
                if (key == "command") command = val;
                if (key == "config_sha256") sha = val;
                if (key == "seed") seed = val;
            }
        } else if (p.extension() == ".json") {
            try {
                json j = json::parse(in);
                const json& pv = j.at("provenance");
                command = pv.at("command").get<std::string>();
                sha = pv.at("config_sha256").get<std::string>();
                seed = std::to_string(pv.at("seed").get<std::uint64_t>());
            } catch (const std::exception&) {
                continue;
            }
        } else {
            continue;
        }
        if (command.empty()) continue;
        if (sha != c.rc.sha256) {
            std::cerr << "verify: " << p.filename().string() << " was produced from a different config\n";
            ++bad;
            continue;
        }
        by_run[command + "\n" + seed].push_back(p);
    }
    require(!by_run.empty() || bad > 0, "verify: no artifacts with provenance found in " + dir.string());

    fs::path scratch = fs::temp_directory_path() / ("mbsense-verify-" + c.rc.sha256.substr(0, 16) + "-" +
                                                    std::to_string(std::hash<std::string>{}(dir.string())));
    for (const auto& [key, paths] : by_run) {
        auto nl = key.find('\n');
        Ctx r = c;
        r.command = key.substr(0, nl);
        r.seed = std::stoull(key.substr(nl + 1));
        r.opt.out_dir = scratch.string();
        r.opt.with_map = false;
        for (const auto& p : paths) {
            std::ifstream in(p);
            std::string head;
            std::getline(in, head);
            while (head.rfind("# ", 0) == 0 && std::getline(in, head)) {
            }
            if (head.find("map_rmse_ns") != std::string::npos) r.opt.with_map = true;
        }
        fs::remove_all(scratch);
        int code = dispatch(r);
        if (code != kOk && code != kBudgetExhausted && code != kInfeasible) {
            std::cerr << "verify: rerun of " << r.command << " failed\n";
            ++bad;
            continue;
        }
        for (const auto& p : paths) {
            auto slurp = [](const fs::path& f) {
                std::ifstream in(f, std::ios::binary);
                std::stringstream ss;
                ss << in.rdbuf();
                return ss.str();
            };
            fs::path again = scratch / p.filename();
            bool same = fs::exists(again) && slurp(again) == slurp(p);
            std::cout << (same ? "OK       " : "MISMATCH ") << p.filename().string() << '\n';
            if (!same) ++bad;
        }
    }
    fs::remove_all(scratch);
    return bad == 0 ? kOk : kFailure;
}

int dispatch(Ctx& c) {
    if (c.command == "crb-vs-sep") return cmd_crb_vs_sep(c);
    if (c.command == "srl-vs-aperture") return cmd_srl_vs_aperture(c);
    if (c.command == "deb-vs-aperture") return cmd_deb_vs_aperture(c);
    if (c.command == "zzb") return cmd_zzb(c);
    if (c.command == "map-rmse") return cmd_map_rmse(c);
    if (c.command == "optimize") return cmd_optimize(c);
    if (c.command == "verify") return cmd_verify(c);
    throw ConfigError("unknown command: " + c.command);
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {"crb-vs-sep", "srl-vs-aperture", "deb-vs-aperture", "zzb",
                                                   "map-rmse",   "optimize",        "verify"};
    return names;
}

int run_command(const std::string& name, const CommandOptions& opt) {
    try {
        Ctx c;
        c.rc = load_config(opt.config_path);
        c.opt = opt;
        c.command = name;
        c.seed = opt.seed ? *opt.seed : c.rc.seed;
        return dispatch(c);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigInvalid;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible constraint set: " << e.what() << " (violated rows:";
        for (int v : e.violated) std::cerr << ' ' << v;
        std::cerr << ")\n";
        return kInfeasible;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kConfigInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
}

}  // namespace mbsense::cli
