#include "mbsense/zzb.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "mbsense/fisher.hpp"
#include "mbsense/model.hpp"

namespace mbsense {

namespace {

constexpr double kInvPhi = 0.6180339887498949;

template <class F>
std::pair<double, double> golden_max(F&& f, double a, double b, int iters = 48) {
    double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters; ++i) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
    }
    return fc >= fd ? std::make_pair(c, fc) : std::make_pair(d, fd);
}

// Flattened canonical frequency grid (relative to fc[0]).
std::vector<double> flat_grid(const MultibandConfig& c) {
    std::vector<double> f;
    for (int m = 0; m < c.M(); ++m)
        for (double n : subcarrier_offsets(c.N[m])) f.push_back(c.fc[m] - c.fc[0] + n * c.fs[m]);
    return f;
}

cplx offset_sum(const std::vector<double>& f, double e_tau) {
    cplx s = 0.0;
    for (double fi : f) s += std::polar(1.0, -kTwoPi * fi * e_tau);
    return s;
}

double pmin_from_sum(double snr_amp, double Nt, cplx S, double e_phi) {
    double r = Nt - (std::polar(1.0, e_phi) * S).real();
    if (r < 0.0) {
        if (r < -1e-9) throw std::logic_error("pmin_offset: negative radicand");
        r = 0.0;
    }
    return q_function(snr_amp * std::sqrt(r));
}

struct Integrand {
    const ZzbSpec& spec;
    std::vector<double> f;
    double snr_amp, Nt;

    // (D - e) * max_phi (2pi - phi) Pmin
    double operator()(double e_tau) const {
        cplx S = offset_sum(f, e_tau);
        auto h = [&](double ph) { return (kTwoPi - ph) * pmin_from_sum(snr_amp, Nt, S, ph); };
        const int n = spec.n_phi;
        int best = 0;
        double hb = h(0.0);
        for (int i = 1; i < n; ++i) {
            double v = h(kTwoPi * i / n);
            if (v > hb) {
                hb = v;
                best = i;
            }
        }
        double lo = std::max(0.0, kTwoPi * (best - 1) / n);
        double hi = std::min(kTwoPi, kTwoPi * (best + 1) / n);
        auto g = golden_max(h, lo, hi);
        return (spec.D - e_tau) * std::max(hb, g.second);
    }
};

double integrate(const Integrand& F, int n_uniform, double fine_extent, int n_fine, int& points) {
    const double D = F.spec.D;
    std::vector<double> x;
    for (int i = 0; i < n_uniform; ++i) x.push_back(D * i / (n_uniform - 1));
    if (fine_extent > 0.0)
        for (int i = 1; i < n_fine; ++i) x.push_back(fine_extent * i / (n_fine - 1));
    std::sort(x.begin(), x.end());
    x.erase(std::unique(x.begin(), x.end()), x.end());
    std::vector<double> y(x.size());
    for (size_t i = 0; i < x.size(); ++i) y[i] = F(x[i]);

    // resolve interior peaks so valley filling sees their true height
    std::vector<std::pair<double, double>> extra;
    for (size_t i = 1; i + 1 < x.size(); ++i) {
        if (y[i] >= y[i - 1] && y[i] >= y[i + 1] && (y[i] > y[i - 1] || y[i] > y[i + 1])) {
            auto p = golden_max(F, x[i - 1], x[i + 1], 40);
            if (p.second > y[i]) extra.push_back(p);
        }
    }
    for (auto& p : extra) {
        auto it = std::lower_bound(x.begin(), x.end(), p.first);
        size_t k = it - x.begin();
        x.insert(x.begin() + k, p.first);
        y.insert(y.begin() + k, p.second);
    }

    // valley filling: reverse running maximum
    for (size_t i = y.size() - 1; i-- > 0;) y[i] = std::max(y[i], y[i + 1]);
    for (size_t i = 0; i + 1 < y.size(); ++i)
        if (y[i] < y[i + 1]) throw std::logic_error("valley filling produced an increasing step");

    // exact for x * y with y linear on each segment
    double acc = 0.0;
    for (size_t i = 0; i + 1 < x.size(); ++i) {
        const double a = x[i], b = x[i + 1];
        acc += (b - a) / 6.0 * (2.0 * a * y[i] + a * y[i + 1] + b * y[i] + 2.0 * b * y[i + 1]);
    }
    points = static_cast<int>(x.size());
    return acc / (kTwoPi * D);
}

}  // namespace

void ZzbSpec::validate() const {
    config.validate();
    if (!(D > 0.0)) throw std::invalid_argument("zzb: D must be > 0");
    if (n_tau < 16 || n_phi < 16) throw std::invalid_argument("zzb: grid sizes must be >= 16");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("zzb: sigma2 must be > 0");
    if (!(a1 >= 0.0)) throw std::invalid_argument("zzb: a1 must be >= 0");
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double pmin_offset(const ZzbSpec& spec, double e_tau, double e_phi) {
    auto f = flat_grid(spec.config);
    return pmin_from_sum(spec.a1 / std::sqrt(spec.sigma2), static_cast<double>(f.size()),
                         offset_sum(f, e_tau), e_phi);
}

ZzbResult zzb_delay(const ZzbSpec& spec) {
    spec.validate();
    Integrand F{spec, flat_grid(spec.config), spec.a1 / std::sqrt(spec.sigma2), 0.0};
    F.Nt = static_cast<double>(F.f.size());

    double fine_extent = 0.0;
    if (spec.a1 > 0.0) {
        Eigen::Matrix2d J = fim_single_path(spec.config, spec.a1, spec.sigma2);
        double crb = J(1, 1) / (J(0, 0) * J(1, 1) - J(0, 1) * J(1, 0));
        fine_extent = std::min(spec.D, 10.0 * std::sqrt(crb));
    }
    ZzbResult r;
    int p1 = 0, p2 = 0;
    r.coarse = integrate(F, spec.n_tau, fine_extent, spec.n_tau, p1);
    r.fine = integrate(F, 2 * spec.n_tau, fine_extent, 2 * spec.n_tau, p2);
    r.grid_points = p2;
    r.zzb = r.fine;
    if (std::abs(r.fine - r.coarse) > 0.005 * std::abs(r.fine)) {
        r.zzb = r.fine + (r.fine - r.coarse) / 3.0;
        r.extrapolated = true;
    }
    r.zzb = std::clamp(r.zzb, 0.0, spec.D * spec.D / 12.0);
    r.sqrt_zzb = std::sqrt(r.zzb);
    return r;
}

namespace {

std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
    return std::mt19937_64(seq);
}

// Re{dmu^H dmu} over [tau, phi] evaluated at explicit parameter values.
Eigen::Matrix2d single_path_fim_at(const std::vector<double>& f, double a, double tau, double phi,
                                   double sigma2) {
    Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
    const cplx j(0.0, 1.0);
    for (double fi : f) {
        cplx mu = a * std::polar(1.0, phi - kTwoPi * fi * tau);
        cplx d[2] = {-j * kTwoPi * fi * mu, j * mu};
        for (int r = 0; r < 2; ++r)
            for (int s = 0; s < 2; ++s) J(r, s) += (std::conj(d[r]) * d[s]).real();
    }
    return (2.0 / sigma2) * J;
}

}  // namespace

EcrbResult ecrb_single_path(const ZzbSpec& spec, int draws, std::uint64_t seed) {
    spec.validate();
    if (draws < 1) throw std::invalid_argument("ecrb: draws >= 1");
    auto f = flat_grid(spec.config);
    std::vector<double> vals(draws);
    for (int t = 0; t < draws; ++t) {
        auto rng = trial_rng(seed, t);
        std::uniform_real_distribution<double> ut(0.0, spec.D), up(0.0, kTwoPi);
        double tau = ut(rng), phi = up(rng);
        Eigen::Matrix2d Ci = checked_inverse(single_path_fim_at(f, spec.a1, tau, phi, spec.sigma2));
        vals[t] = std::sqrt(Ci(0, 0));
    }
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= draws;
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    return {mean, draws > 1 ? std::sqrt(var / (draws - 1)) : 0.0};
}

namespace {

double map_trial(const ZzbSpec& spec, const std::vector<double>& f, const MapOptions& opt,
                 std::uint64_t seed, int t) {
    auto rng = trial_rng(seed, static_cast<std::uint64_t>(t));
    std::uniform_real_distribution<double> ut(0.0, spec.D), up(0.0, kTwoPi);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5 * spec.sigma2));
    const double tau = ut(rng), phi = up(rng);
    const size_t Nt = f.size();
    std::vector<cplx> y(Nt);
    for (size_t i = 0; i < Nt; ++i) {
        double re = gauss(rng);
        double im = gauss(rng);
        y[i] = spec.a1 * std::polar(1.0, phi - kTwoPi * f[i] * tau) + cplx(re, im);
    }

    // R(tau_g) = sum y e^{+j 2pi f tau_g}, rotated incrementally along the grid
    const int G = opt.tau_grid;
    const double step = spec.D / (G - 1);
    std::vector<cplx> rot(Nt), z(Nt);
    for (size_t i = 0; i < Nt; ++i) z[i] = std::polar(1.0, kTwoPi * f[i] * step);
    std::vector<double> mag(G), score(G);
    const double dphi = kTwoPi / opt.phi_grid;
    for (int g = 0; g < G; ++g) {
        if (g % 64 == 0)
            for (size_t i = 0; i < Nt; ++i) rot[i] = std::polar(1.0, kTwoPi * f[i] * step * g);
        cplx R = 0.0;
        for (size_t i = 0; i < Nt; ++i) {
            R += y[i] * rot[i];
            rot[i] *= z[i];
        }
        // best phi on the grid is the grid point closest to arg R
        double th = std::arg(R);
        double off = th - dphi * std::round(th / dphi);
        mag[g] = std::abs(R);
        score[g] = mag[g] * std::cos(off);
    }
    int best = static_cast<int>(std::max_element(score.begin(), score.end()) - score.begin());
    double est = best * step;
    if (opt.refine && best > 0 && best < G - 1) {
        double ym = mag[best - 1], y0 = mag[best], yp = mag[best + 1];
        double den = ym - 2.0 * y0 + yp;
        if (den < 0.0) est += std::clamp(0.5 * (ym - yp) / den, -1.0, 1.0) * step;
    }
    est = std::clamp(est, 0.0, spec.D);
    return (est - tau) * (est - tau);
}

}  // namespace

double map_rmse(const ZzbSpec& spec, const MapOptions& opt, std::uint64_t seed) {
    spec.validate();
    if (opt.trials < 1 || opt.tau_grid < 3 || opt.phi_grid < 1)
        throw std::invalid_argument("map_rmse: bad options");
    auto f = flat_grid(spec.config);
    std::vector<double> err(opt.trials);
    int nthreads = std::max(1, std::min(opt.threads, opt.trials));
    auto work = [&](int w) {
        for (int t = w; t < opt.trials; t += nthreads) err[t] = map_trial(spec, f, opt, seed, t);
    };
    if (nthreads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < nthreads; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
    }
    double acc = 0.0;
    for (double e : err) acc += e;
    return std::sqrt(acc / opt.trials);
}

}  // namespace mbsense
