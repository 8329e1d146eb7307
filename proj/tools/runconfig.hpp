#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbsense/optimizer.hpp"
#include "mbsense/types.hpp"

namespace mbsense::cli {

// Raised for anything the schema rejects; maps to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Sweep {
    std::string axis;  // delta_tau | fc2 | aperture | snr_db
    double start = 0.0, stop = 0.0;  // internal units (ns, GHz, dB)
    int points = 0;
    bool log = false;

    std::vector<double> values() const;
};

struct RunConfig {
    std::string scenario;
    std::string raw;     // file bytes
    std::string sha256;  // of raw

    MultibandConfig bands;
    bool has_bands = false;
    std::vector<cplx> alpha;
    std::vector<double> tau;  // ns

    double sigma2 = 1.0;
    double snr_db = 0.0;
    bool has_snr = false;

    bool phase = true;
    bool timing = true;
    double sigma_p = 1.0;  // ns
    std::vector<double> sigma_p_sweep;

    Sweep sweep;
    bool has_sweep = false;

    double srl_lo = 1e-3, srl_hi = 50.0, srl_tol = 1e-6;
    int srl_scan = 2000;

    double zzb_D = 10.0;
    double zzb_a1 = 1.0;
    int zzb_tau_grid = 400, zzb_phi_grid = 256;
    int ecrb_draws = 100;
    int map_trials = 200, map_tau_grid = 4000, map_phi_grid = 256;

    bool has_optimizer = false;
    ConstraintSet cs;
    SolverOptions solver;
    std::vector<cplx> estimated_paths;

    std::uint64_t seed = 1;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text);

std::string sha256_hex(const std::string& bytes);

}  // namespace mbsense::cli
