#include "mbsense/model.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace mbsense {

int MultibandConfig::total() const {
    int t = 0;
    for (int n : N) t += n;
    return t;
}

void MultibandConfig::validate() const {
    if (fc.empty()) throw std::invalid_argument("config: at least one subband required");
    if (fs.size() != fc.size() || N.size() != fc.size())
        throw std::invalid_argument("config: fc, fs and N must have equal length");
    for (int m = 0; m < M(); ++m) {
        if (!(fs[m] > 0.0) || !std::isfinite(fs[m]))
            throw std::invalid_argument("config: subcarrier spacing must be positive");
        if (N[m] < 2) throw std::invalid_argument("config: N[m] must be >= 2");
        if (!std::isfinite(fc[m])) throw std::invalid_argument("config: carrier not finite");
    }
    for (int m = 0; m + 1 < M(); ++m) {
        if (fc[m] >= fc[m + 1])
            throw std::invalid_argument("config: subbands must be sorted by carrier");
        double gap = (fc[m + 1] - 0.5 * bandwidth(m + 1)) - (fc[m] + 0.5 * bandwidth(m));
        if (gap < -1e-12) {
            std::ostringstream os;
            os << "config: subbands " << m << " and " << m + 1 << " overlap";
            throw std::invalid_argument(os.str());
        }
    }
}

std::vector<std::string> MultibandConfig::warnings() const {
    std::vector<std::string> w;
    for (int m = 0; m < M(); ++m)
        if (N[m] % 2 != 0) w.push_back("subband " + std::to_string(m) + " has odd N");
    return w;
}

void PathSet::validate() const {
    if (alpha.empty()) throw std::invalid_argument("paths: K >= 1 required");
    if (tau.size() != alpha.size()) throw std::invalid_argument("paths: alpha/tau length mismatch");
    for (int k = 0; k < K(); ++k) {
        if (!(std::abs(alpha[k]) > 0.0)) throw std::invalid_argument("paths: amplitudes must be > 0");
        if (k > 0 && !(tau[k - 1] < tau[k]))
            throw std::invalid_argument("paths: delays must be strictly increasing");
    }
}

DistortionModel DistortionModel::none(int M, double sigma_p) {
    DistortionModel d;
    d.phi.assign(M, 0.0);
    d.delta.assign(M, 0.0);
    d.sigma_p = sigma_p;
    return d;
}

NoiseModel NoiseModel::from_snr_db(double snr_db) {
    return NoiseModel{std::pow(10.0, -snr_db / 10.0)};
}

std::vector<double> subcarrier_offsets(int N) {
    std::vector<double> n(N);
    double half = 0.5 * (N - 1);
    for (int i = 0; i < N; ++i) n[i] = i - half;
    return n;
}

std::vector<double> frequency_grid(const MultibandConfig& config, int m) {
    if (m < 0 || m >= config.M()) throw std::out_of_range("frequency_grid: subband index");
    auto n = subcarrier_offsets(config.N[m]);
    std::vector<double> f(n.size());
    for (size_t i = 0; i < n.size(); ++i) f[i] = config.fc[m] + n[i] * config.fs[m];
    return f;
}

std::vector<cplx> synthesize_cfr(const MultibandConfig& config, const PathSet& paths) {
    std::vector<cplx> h;
    h.reserve(config.total());
    for (int m = 0; m < config.M(); ++m) {
        for (double f : frequency_grid(config, m)) {
            cplx acc = 0.0;
            for (int k = 0; k < paths.K(); ++k)
                acc += paths.alpha[k] * std::polar(1.0, -kTwoPi * f * paths.tau[k]);
            h.push_back(acc);
        }
    }
    return h;
}

std::vector<cplx> synthesize_received(const MultibandConfig& config, const PathSet& paths,
                                      const DistortionModel& dist, const NoiseModel& noise,
                                      std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5 * noise.sigma2));
    std::vector<cplx> y;
    y.reserve(config.total());
    for (int m = 0; m < config.M(); ++m) {
        auto n = subcarrier_offsets(config.N[m]);
        double phi = dist.phi.empty() ? 0.0 : dist.phi.at(m);
        double delta = dist.delta.empty() ? 0.0 : dist.delta.at(m);
        for (double ni : n) {
            double f = config.fc[m] + ni * config.fs[m];
            cplx acc = 0.0;
            for (int k = 0; k < paths.K(); ++k)
                acc += paths.alpha[k] * std::polar(1.0, -kTwoPi * f * paths.tau[k]);
            acc *= std::polar(1.0, phi - kTwoPi * ni * config.fs[m] * delta);
            double re = gauss(rng);
            double im = gauss(rng);
            y.push_back(acc + cplx(re, im));
        }
    }
    return y;
}

CanonicalParams canonicalize(const MultibandConfig& config, const PathSet& paths,
                             const DistortionModel& dist) {
    CanonicalParams cp;
    double f1 = config.fc.at(0);
    double phi1 = dist.phi.empty() ? 0.0 : dist.phi.at(0);
    for (double f : config.fc) cp.fc_prime.push_back(f - f1);
    cp.fc_prime[0] = 0.0;
    for (int k = 0; k < paths.K(); ++k)
        cp.alpha_prime.push_back(paths.alpha[k] * std::polar(1.0, phi1 - kTwoPi * f1 * paths.tau[k]));
    for (int m = 1; m < config.M(); ++m)
        cp.phi_prime.push_back((dist.phi.empty() ? 0.0 : dist.phi.at(m)) - phi1);
    cp.tau = paths.tau;
    cp.delta = dist.delta.empty() ? std::vector<double>(config.M(), 0.0) : dist.delta;
    return cp;
}

std::vector<cplx> canonical_mean(const MultibandConfig& config, const CanonicalParams& cp) {
    std::vector<cplx> mu;
    mu.reserve(config.total());
    for (int m = 0; m < config.M(); ++m) {
        auto n = subcarrier_offsets(config.N[m]);
        double ph = m == 0 ? 0.0 : cp.phi_prime.at(m - 1);
        for (double ni : n) {
            double f = cp.fc_prime[m] + ni * config.fs[m];
            cplx acc = 0.0;
            for (size_t k = 0; k < cp.alpha_prime.size(); ++k)
                acc += cp.alpha_prime[k] * std::polar(1.0, -kTwoPi * f * cp.tau[k]);
            mu.push_back(acc * std::polar(1.0, ph - kTwoPi * ni * config.fs[m] * cp.delta.at(m)));
        }
    }
    return mu;
}

bool check_identifiability(const MultibandConfig& config, int K) {
    return !config.N.empty() && config.N[0] + 1 > 2 * K;
}

}  // namespace mbsense
