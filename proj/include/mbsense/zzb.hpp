#pragma once

#include <cstdint>
#include <vector>

#include "mbsense/types.hpp"

namespace mbsense {

// Single path, no distortions. tau_1 ~ U[0, D] (ns), phi_1 ~ U[0, 2pi].
struct ZzbSpec {
    MultibandConfig config;
    double a1 = 1.0;
    double sigma2 = 1.0;
    double D = 10.0;
    int n_tau = 400;
    int n_phi = 256;

    void validate() const;
};

double q_function(double x);

double pmin_offset(const ZzbSpec& spec, double e_tau, double e_phi);

struct ZzbResult {
    double zzb = 0.0;       // ns^2
    double sqrt_zzb = 0.0;  // ns
    double coarse = 0.0;    // value at the base resolution
    double fine = 0.0;      // value at twice the resolution
    bool extrapolated = false;
    int grid_points = 0;
};

ZzbResult zzb_delay(const ZzbSpec& spec);

struct EcrbResult {
    double ecrb = 0.0;  // ns
    double std = 0.0;   // sample std of sqrt([J^-1]_11)
};

EcrbResult ecrb_single_path(const ZzbSpec& spec, int draws, std::uint64_t seed);

struct MapOptions {
    int trials = 200;
    int tau_grid = 4000;
    int phi_grid = 256;
    bool refine = true;
    int threads = 1;
};

double map_rmse(const ZzbSpec& spec, const MapOptions& opt, std::uint64_t seed);

}  // namespace mbsense
