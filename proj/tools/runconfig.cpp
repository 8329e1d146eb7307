#include "runconfig.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mbsense::cli {

using json = nlohmann::json;

namespace {

constexpr double kHzToGHz = 1e-9;
constexpr double kSToNs = 1e9;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

double num(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
    if (!j[key].is_number()) throw ConfigError(where + "." + key + ": expected a number");
    double v = j[key].get<double>();
    if (!std::isfinite(v)) throw ConfigError(where + "." + key + ": not finite");
    return v;
}

double num_or(const json& j, const std::string& key, double dflt, const std::string& where) {
    return j.contains(key) ? num(j, key, where) : dflt;
}

int int_or(const json& j, const std::string& key, int dflt, const std::string& where) {
    if (!j.contains(key)) return dflt;
    if (!j[key].is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
    return j[key].get<int>();
}

bool bool_or(const json& j, const std::string& key, bool dflt, const std::string& where) {
    if (!j.contains(key)) return dflt;
    if (!j[key].is_boolean()) throw ConfigError(where + "." + key + ": expected a boolean");
    return j[key].get<bool>();
}

std::vector<double> num_list(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
    if (!j[key].is_array()) throw ConfigError(where + "." + key + ": expected an array");
    std::vector<double> v;
    for (const auto& e : j[key]) {
        if (!e.is_number()) throw ConfigError(where + "." + key + ": expected numbers");
        v.push_back(e.get<double>());
    }
    return v;
}

cplx gain(const json& p, const std::string& where) {
    return {num(p, "re", where), num_or(p, "im", 0.0, where)};
}

}  // namespace

std::vector<double> Sweep::values() const {
    std::vector<double> v(points);
    for (int i = 0; i < points; ++i) {
        double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
        v[i] = log ? std::exp(std::log(start) + t * (std::log(stop) - std::log(start)))
                   : start + t * (stop - start);
    }
    if (points > 0) v.front() = start;
    if (points > 1) v.back() = stop;
    return v;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    EVP_DigestUpdate(ctx, bytes.data(), bytes.size());
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j, {"scenario", "description", "bands", "paths", "noise", "distortions", "sweep", "srl", "zzb",
                   "optimizer", "seed"},
               "config");
    RunConfig rc;
    rc.raw = text;
    rc.sha256 = sha256_hex(text);
    if (j.contains("scenario")) {
        if (!j["scenario"].is_string()) throw ConfigError("config.scenario: expected a string");
        rc.scenario = j["scenario"].get<std::string>();
    }
    if (j.contains("description") && !j["description"].is_string())
        throw ConfigError("config.description: expected a string");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ConfigError("config.seed: expected a non-negative integer");
        rc.seed = j["seed"].get<std::uint64_t>();
    }

    if (j.contains("bands")) {
        if (!j["bands"].is_array() || j["bands"].empty()) throw ConfigError("config.bands: expected a non-empty array");
        for (size_t i = 0; i < j["bands"].size(); ++i) {
            const json& b = j["bands"][i];
            std::string w = "bands[" + std::to_string(i) + "]";
            check_keys(b, {"fc_hz", "fs_hz", "n", "bandwidth_hz"}, w);
            double fs = num(b, "fs_hz", w);
            if (!(fs > 0.0)) throw ConfigError(w + ".fs_hz: must be > 0");
            int n = 0;
            if (b.contains("n") == b.contains("bandwidth_hz"))
                throw ConfigError(w + ": give exactly one of 'n' or 'bandwidth_hz'");
            if (b.contains("n")) {
                n = int_or(b, "n", 0, w);
            } else {
                n = static_cast<int>(std::lround(num(b, "bandwidth_hz", w) / fs));
            }
            rc.bands.fc.push_back(num(b, "fc_hz", w) * kHzToGHz);
            rc.bands.fs.push_back(fs * kHzToGHz);
            rc.bands.N.push_back(n);
        }
        try {
            rc.bands.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        rc.has_bands = true;
    }

    if (j.contains("paths")) {
        if (!j["paths"].is_array() || j["paths"].empty()) throw ConfigError("config.paths: expected a non-empty array");
        for (size_t i = 0; i < j["paths"].size(); ++i) {
            const json& p = j["paths"][i];
            std::string w = "paths[" + std::to_string(i) + "]";
            check_keys(p, {"re", "im", "tau_s"}, w);
            rc.alpha.push_back(gain(p, w));
            rc.tau.push_back(num_or(p, "tau_s", 0.0, w) * kSToNs);
        }
    }

    if (j.contains("noise")) {
        const json& n = j["noise"];
        check_keys(n, {"snr_db", "sigma2"}, "noise");
        if (n.contains("snr_db") == n.contains("sigma2"))
            throw ConfigError("noise: give exactly one of 'snr_db' or 'sigma2'");
        if (n.contains("snr_db")) {
            rc.snr_db = num(n, "snr_db", "noise");
            rc.has_snr = true;
            rc.sigma2 = NoiseModel::from_snr_db(rc.snr_db).sigma2;
        } else {
            rc.sigma2 = num(n, "sigma2", "noise");
            if (!(rc.sigma2 > 0.0)) throw ConfigError("noise.sigma2: must be > 0");
            rc.snr_db = -10.0 * std::log10(rc.sigma2);
        }
    }

    if (j.contains("distortions")) {
        const json& d = j["distortions"];
        check_keys(d, {"phase", "timing", "sigma_p_s", "sigma_p_sweep_s"}, "distortions");
        rc.phase = bool_or(d, "phase", true, "distortions");
        rc.timing = bool_or(d, "timing", true, "distortions");
        rc.sigma_p = num_or(d, "sigma_p_s", 1e-9, "distortions") * kSToNs;
        if (!(rc.sigma_p > 0.0)) throw ConfigError("distortions.sigma_p_s: must be > 0");
        if (d.contains("sigma_p_sweep_s"))
            for (double v : num_list(d, "sigma_p_sweep_s", "distortions")) {
                if (!(v > 0.0)) throw ConfigError("distortions.sigma_p_sweep_s: values must be > 0");
                rc.sigma_p_sweep.push_back(v * kSToNs);
            }
    }

    if (j.contains("sweep")) {
        const json& s = j["sweep"];
        check_keys(s, {"axis", "start", "stop", "points", "spacing"}, "sweep");
        if (!s.contains("axis") || !s["axis"].is_string()) throw ConfigError("sweep.axis: expected a string");
        std::string axis = s["axis"].get<std::string>();
        double scale = 1.0;
        if (axis == "delta_tau_s") {
            rc.sweep.axis = "delta_tau";
            scale = kSToNs;
        } else if (axis == "fc2_hz") {
            rc.sweep.axis = "fc2";
            scale = kHzToGHz;
        } else if (axis == "aperture_hz") {
            rc.sweep.axis = "aperture";
            scale = kHzToGHz;
        } else if (axis == "snr_db") {
            rc.sweep.axis = "snr_db";
        } else {
            throw ConfigError("sweep.axis: unknown axis '" + axis + "'");
        }
        rc.sweep.start = num(s, "start", "sweep") * scale;
        rc.sweep.stop = num(s, "stop", "sweep") * scale;
        rc.sweep.points = int_or(s, "points", 0, "sweep");
        std::string spacing = "linear";
        if (s.contains("spacing")) {
            if (!s["spacing"].is_string()) throw ConfigError("sweep.spacing: expected a string");
            spacing = s["spacing"].get<std::string>();
        }
        if (spacing != "linear" && spacing != "log") throw ConfigError("sweep.spacing: 'linear' or 'log'");
        rc.sweep.log = spacing == "log";
        if (rc.sweep.points < 1) throw ConfigError("sweep: empty sweep range (points < 1)");
        if (rc.sweep.points > 1 && !(rc.sweep.stop > rc.sweep.start))
            throw ConfigError("sweep: empty sweep range (stop must exceed start)");
        if (rc.sweep.log && !(rc.sweep.start > 0.0)) throw ConfigError("sweep: log spacing needs start > 0");
        rc.has_sweep = true;
    }

    if (j.contains("srl")) {
        const json& s = j["srl"];
        check_keys(s, {"lo_s", "hi_s", "tol_s", "scan_points"}, "srl");
        rc.srl_lo = num_or(s, "lo_s", rc.srl_lo / kSToNs, "srl") * kSToNs;
        rc.srl_hi = num_or(s, "hi_s", rc.srl_hi / kSToNs, "srl") * kSToNs;
        rc.srl_tol = num_or(s, "tol_s", rc.srl_tol / kSToNs, "srl") * kSToNs;
        rc.srl_scan = int_or(s, "scan_points", rc.srl_scan, "srl");
        if (!(rc.srl_lo > 0.0) || !(rc.srl_hi > rc.srl_lo) || !(rc.srl_tol > 0.0) || rc.srl_scan < 2)
            throw ConfigError("srl: need 0 < lo_s < hi_s, tol_s > 0, scan_points >= 2");
    }

    if (j.contains("zzb")) {
        const json& z = j["zzb"];
        check_keys(z, {"D_s", "a1", "tau_grid", "phi_grid", "ecrb_draws", "map_trials", "map_tau_grid",
                       "map_phi_grid"},
                   "zzb");
        rc.zzb_D = num_or(z, "D_s", rc.zzb_D / kSToNs, "zzb") * kSToNs;
        rc.zzb_a1 = num_or(z, "a1", rc.zzb_a1, "zzb");
        rc.zzb_tau_grid = int_or(z, "tau_grid", rc.zzb_tau_grid, "zzb");
        rc.zzb_phi_grid = int_or(z, "phi_grid", rc.zzb_phi_grid, "zzb");
        rc.ecrb_draws = int_or(z, "ecrb_draws", rc.ecrb_draws, "zzb");
        rc.map_trials = int_or(z, "map_trials", rc.map_trials, "zzb");
        rc.map_tau_grid = int_or(z, "map_tau_grid", rc.map_tau_grid, "zzb");
        rc.map_phi_grid = int_or(z, "map_phi_grid", rc.map_phi_grid, "zzb");
        if (!(rc.zzb_D > 0.0) || rc.zzb_tau_grid < 16 || rc.zzb_phi_grid < 16 || rc.ecrb_draws < 1 ||
            rc.map_trials < 1 || rc.map_tau_grid < 3 || rc.map_phi_grid < 1 || !(rc.zzb_a1 >= 0.0))
            throw ConfigError("zzb: invalid values");
    }

    if (j.contains("optimizer")) {
        const json& o = j["optimizer"];
        check_keys(o, {"l_hz", "u_hz", "fs_hz", "W_hz", "omega", "max_ao", "max_sca", "eps", "ao_tol_s",
                       "restarts", "estimated_paths"},
                   "optimizer");
        for (double v : num_list(o, "l_hz", "optimizer")) rc.cs.l.push_back(v * kHzToGHz);
        for (double v : num_list(o, "u_hz", "optimizer")) rc.cs.u.push_back(v * kHzToGHz);
        if (rc.cs.l.size() != rc.cs.u.size() || rc.cs.l.empty())
            throw ConfigError("optimizer: l_hz and u_hz must be non-empty and equal length");
        if (o.contains("fs_hz") && o["fs_hz"].is_array()) {
            for (double v : num_list(o, "fs_hz", "optimizer")) rc.cs.fs.push_back(v * kHzToGHz);
        } else {
            rc.cs.fs.assign(rc.cs.l.size(), num_or(o, "fs_hz", 78125.0, "optimizer") * kHzToGHz);
        }
        if (rc.cs.fs.size() != rc.cs.l.size()) throw ConfigError("optimizer: fs_hz length mismatch");
        for (double v : rc.cs.fs)
            if (!(v > 0.0)) throw ConfigError("optimizer.fs_hz: must be > 0");
        rc.cs.W = num(o, "W_hz", "optimizer") * kHzToGHz;
        SolverOptions& so = rc.solver;
        so.omega = num_or(o, "omega", so.omega, "optimizer");
        so.max_ao = int_or(o, "max_ao", so.max_ao, "optimizer");
        so.max_sca = int_or(o, "max_sca", so.max_sca, "optimizer");
        so.eps = num_or(o, "eps", so.eps, "optimizer");
        so.ao_tol = num_or(o, "ao_tol_s", so.ao_tol / kSToNs, "optimizer") * kSToNs;
        so.restarts = int_or(o, "restarts", so.restarts, "optimizer");
        if (!(so.omega > 0.0) || so.max_ao < 1 || so.max_sca < 1 || !(so.eps > 0.0) || !(so.ao_tol > 0.0) ||
            so.restarts < 1)
            throw ConfigError("optimizer: solver options must be positive");
        if (o.contains("estimated_paths")) {
            if (!o["estimated_paths"].is_array() || o["estimated_paths"].empty())
                throw ConfigError("optimizer.estimated_paths: expected a non-empty array");
            for (size_t i = 0; i < o["estimated_paths"].size(); ++i) {
                std::string w = "optimizer.estimated_paths[" + std::to_string(i) + "]";
                check_keys(o["estimated_paths"][i], {"re", "im"}, w);
                rc.estimated_paths.push_back(gain(o["estimated_paths"][i], w));
            }
        }
        rc.has_optimizer = true;
    }
    return rc;
}

}  // namespace mbsense::cli
