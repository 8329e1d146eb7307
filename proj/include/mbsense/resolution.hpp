#pragma once

#include <vector>

#include "mbsense/fisher.hpp"

namespace mbsense {

// Two-path scenario with physical gains; canonicalization against bands.fc[0]
// is done per evaluation with tau_1 = 0, tau_2 = dtau.
struct TwoPathScenario {
    BandSet bands;
    cplx alpha1{1.0, 0.0};
    cplx alpha2{1.0, 0.0};
    double sigma2 = 1.0;
    double sigma_p = 1.0;
    bool phase = true;
    bool timing = true;
    bool summation = false;  // reference FIM instead of the compact one

    FisherMatrix fim(double dtau) const;
    double c_dtau(double dtau) const;
};

struct SrlQuery {
    TwoPathScenario scenario;
    double lo = 1e-3;
    double hi = 50.0;
    double tol = 1e-6;
    int scan_points = 2000;
    bool require_positive_lo = false;  // reject brackets that start past a crossing
};

struct SrlResult {
    double dtau = 0.0;
    double residual = 0.0;               // sqrt(C(dtau)) - dtau
    std::vector<double> sign_changes;     // left scan node of every + to - crossing
    double g_min = 0.0, g_max = 0.0;      // scanned extremes
    int evaluations = 0;
};

struct NoSrlInBracketError : std::runtime_error {
    NoSrlInBracketError(const std::string& w, double gmin, double gmax)
        : std::runtime_error(w), g_min(gmin), g_max(gmax) {}
    double g_min, g_max;
};

SrlResult srl_solve(const SrlQuery& q);

}  // namespace mbsense
