#include "mbsense/resolution.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace mbsense {

FisherMatrix TwoPathScenario::fim(double dtau) const {
    const double f1 = bands.fc.at(0);
    std::vector<cplx> ap{alpha1, alpha2 * std::polar(1.0, -kTwoPi * f1 * dtau)};
    std::vector<double> tau{0.0, dtau};
    if (!summation) return fim_compact_two_path(bands, ap, tau, sigma2, sigma_p, phase, timing);

    MultibandConfig cfg;
    cfg.fc = bands.fc;
    cfg.fs = bands.fs;
    for (double n : bands.N) {
        if (std::abs(n - std::round(n)) > 1e-9)
            throw std::invalid_argument("summation FIM needs integer subcarrier counts");
        cfg.N.push_back(static_cast<int>(std::lround(n)));
    }
    CanonicalParams cp;
    for (double f : cfg.fc) cp.fc_prime.push_back(f - f1);
    cp.alpha_prime = ap;
    cp.phi_prime.assign(cfg.M() - 1, 0.0);
    cp.tau = tau;
    cp.delta.assign(cfg.M(), 0.0);
    return fim_summation(cfg, cp, sigma2, sigma_p, phase, timing);
}

double TwoPathScenario::c_dtau(double dtau) const {
    return crb_delay_separation(fim(dtau));
}

namespace {

double g_of(const TwoPathScenario& s, double x, int& evals) {
    ++evals;
    try {
        double c = s.c_dtau(x);
        if (!(c > 0.0) || !std::isfinite(c)) return std::numeric_limits<double>::infinity();
        return std::sqrt(c) - x;
    } catch (const SingularMatrixError&) {
        // coincident-path limit, the bound diverges
        return std::numeric_limits<double>::infinity();
    }
}

}  // namespace

SrlResult srl_solve(const SrlQuery& q) {
    if (!(q.lo > 0.0) || !(q.hi > q.lo)) throw std::invalid_argument("srl_solve: need 0 < lo < hi");
    if (!(q.tol > 0.0)) throw std::invalid_argument("srl_solve: tol must be > 0");
    if (q.scan_points < 2) throw std::invalid_argument("srl_solve: scan_points >= 2");

    SrlResult r;
    const int n = q.scan_points;
    const double l0 = std::log(q.lo), l1 = std::log(q.hi);
    std::vector<double> xs(n), gs(n);
    r.g_min = std::numeric_limits<double>::infinity();
    r.g_max = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        xs[i] = i == n - 1 ? q.hi : std::exp(l0 + (l1 - l0) * i / (n - 1));
        gs[i] = g_of(q.scenario, xs[i], r.evaluations);
        r.g_min = std::min(r.g_min, gs[i]);
        r.g_max = std::max(r.g_max, gs[i]);
    }
    if (q.require_positive_lo && !(gs[0] > 0.0))
        throw NoSrlInBracketError("srl_solve: g(lo) <= 0, bracket starts beyond a crossing", r.g_min,
                                  r.g_max);
    int first = -1;
    for (int i = 0; i + 1 < n; ++i) {
        if (gs[i] > 0.0 && gs[i + 1] <= 0.0) {
            r.sign_changes.push_back(xs[i]);
            if (first < 0) first = i;
        }
    }
    if (first < 0) {
        std::ostringstream os;
        os << "no SRL in bracket [" << q.lo << ", " << q.hi << "] ns: g ranges over [" << r.g_min
           << ", " << r.g_max << "]";
        throw NoSrlInBracketError(os.str(), r.g_min, r.g_max);
    }

    double a = xs[first], b = xs[first + 1];
    double ga = gs[first], gb = gs[first + 1];
    auto done = [&] {
        double best = std::min(std::abs(ga), std::abs(gb));
        return (b - a <= q.tol && best < 10.0 * q.tol) || b - a <= 4e-16 * b;
    };
    while (!done()) {
        double mid = 0.5 * (a + b);
        double gm = g_of(q.scenario, mid, r.evaluations);
        if (gm > 0.0) {
            a = mid;
            ga = gm;
        } else {
            b = mid;
            gb = gm;
        }
    }
    if (std::abs(ga) < std::abs(gb)) {
        r.dtau = a;
        r.residual = ga;
    } else {
        r.dtau = b;
        r.residual = gb;
    }
    return r;
}

}  // namespace mbsense
