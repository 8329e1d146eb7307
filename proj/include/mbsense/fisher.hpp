#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mbsense/types.hpp"

namespace mbsense {

struct DirichletTriple {
    double g;   // gamma
    double d1;  // d gamma / d dtau
    double d2;  // d2 gamma / d dtau2
};

// sin(pi N fs dtau) / sin(pi fs dtau) and its first two derivatives.
// N may be non-integer (relaxed subcarrier counts).
DirichletTriple dirichlet_gamma(double N, double fs, double dtau);

// Which nuisance blocks are present.
struct FimLayout {
    int K = 2;
    int M = 2;
    bool phase = true;   // phi'_2..phi'_M
    bool timing = true;  // delta_1..delta_M

    int size() const { return 3 * K + (phase ? M - 1 : 0) + (timing ? M : 0); }
    int tau(int k) const { return k; }
    int alpha_re(int k) const { return K + k; }
    int alpha_im(int k) const { return 2 * K + k; }
    int phi(int m) const { return 3 * K + m - 1; }  // m >= 1
    int delta(int m) const { return 3 * K + (phase ? M - 1 : 0) + m; }
};

struct FisherMatrix {
    Eigen::MatrixXd J;
    FimLayout layout;
};

// Subband layout with real-valued N, used by the compact evaluator.
struct BandSet {
    std::vector<double> fc;
    std::vector<double> fs;
    std::vector<double> N;

    int M() const { return static_cast<int>(fc.size()); }
    static BandSet from(const MultibandConfig& c);
};

FisherMatrix fim_summation(const MultibandConfig& config, const CanonicalParams& cp,
                           double sigma2, double sigma_p, bool phase = true, bool timing = true);

// K = 2 only. Frequencies are taken relative to bands.fc[0].
FisherMatrix fim_compact_two_path(const BandSet& bands, const std::vector<cplx>& alpha_prime,
                                  const std::vector<double>& tau, double sigma2, double sigma_p,
                                  bool phase = true, bool timing = true);
FisherMatrix fim_compact_two_path(const MultibandConfig& config, const CanonicalParams& cp,
                                  double sigma2, double sigma_p, bool phase = true,
                                  bool timing = true);

inline constexpr double kMaxCondition = 1e12;

// Inverse with a condition guard on the Jacobi-scaled matrix.
Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& J, double max_cond = kMaxCondition);
double scaled_condition(const Eigen::MatrixXd& J);

Eigen::MatrixXd efim(const Eigen::MatrixXd& J, int q);

// Coordinates (tau1, dtau, ..., delta_m + tau1): dtau becomes a coordinate and the common shift of
// delays against timing offsets a single one, seen only through the prior. Computing
// [inv(T' J T)]_22 there avoids the cancellation in C11 + C22 - 2 C12. K = 2 only.
Eigen::MatrixXd separation_basis(const FimLayout& layout);

double crb_delay_separation(const FisherMatrix& F);
double deb(const FisherMatrix& F, int K);

struct ClosedForm {
    double c_dtau;
    double crb_up;
    double crb_low;
    double t;
};

// Two subbands, two unit-amplitude in-phase paths, sigma2 = 2.
ClosedForm crb_closed_form(double Nbar, double fs, double dfc, double dtau);

// 2x2 FIM over [tau_1, phi_1] for one path, frequencies relative to fc[0].
Eigen::Matrix2d fim_single_path(const MultibandConfig& config, double a1, double sigma2);

}  // namespace mbsense
