#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

// Units: GHz for frequencies, ns for delays. Products f*tau are cycles.
namespace mbsense {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

struct SingularMatrixError : std::runtime_error {
    explicit SingularMatrixError(const std::string& what, double cond = 0.0)
        : std::runtime_error(what), condition(cond) {}
    double condition;
};

struct InfeasibleError : std::runtime_error {
    InfeasibleError(const std::string& what, std::vector<int> idx)
        : std::runtime_error(what), violated(std::move(idx)) {}
    std::vector<int> violated;
};

struct MultibandConfig {
    std::vector<double> fc;  // carrier per subband
    std::vector<double> fs;  // subcarrier spacing
    std::vector<int> N;      // subcarrier count

    int M() const { return static_cast<int>(fc.size()); }
    int total() const;
    double bandwidth(int m) const { return N.at(m) * fs.at(m); }

    // Throws std::invalid_argument. Odd N is accepted (see warnings()).
    void validate() const;
    std::vector<std::string> warnings() const;
};

struct PathSet {
    std::vector<cplx> alpha;
    std::vector<double> tau;

    int K() const { return static_cast<int>(alpha.size()); }
    void validate() const;
};

struct DistortionModel {
    std::vector<double> phi;    // rad, per subband
    std::vector<double> delta;  // ns, per subband
    double sigma_p = 1.0;       // ns

    static DistortionModel none(int M, double sigma_p = 1.0);
};

struct NoiseModel {
    double sigma2 = 1.0;
    static NoiseModel from_snr_db(double snr_db);
};

struct CanonicalParams {
    std::vector<double> fc_prime;  // fc_prime[0] == 0
    std::vector<cplx> alpha_prime;
    std::vector<double> phi_prime;  // M-1 entries, subbands 2..M
    std::vector<double> tau;
    std::vector<double> delta;
};

}  // namespace mbsense
