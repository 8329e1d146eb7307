#include "mbsense/fisher.hpp"

#include <cmath>
#include <sstream>

#include "mbsense/model.hpp"

namespace mbsense {

namespace {

// Taylor coefficients of sin(x)/x, i.e. (-1)^k / (2k+1)!
constexpr int kSeriesTerms = 10;

struct Sinc {
    double s, d1, d2;
};

Sinc sinc3(double x) {
    Sinc r{};
    if (std::abs(x) < 0.5) {
        double x2 = x * x;
        double coef = 1.0;  // (-1)^k / (2k+1)!
        double pw = 1.0;    // x^(2k)
        r.s = 1.0;
        for (int k = 1; k < kSeriesTerms; ++k) {
            coef /= -(2.0 * k) * (2.0 * k + 1.0);
            // d/dx x^(2k) = 2k x^(2k-1); second derivative 2k(2k-1) x^(2k-2)
            r.d1 += coef * 2.0 * k * pw * x;
            r.d2 += coef * 2.0 * k * (2.0 * k - 1.0) * pw;
            pw *= x2;
            r.s += coef * pw;
        }
        return r;
    }
    double sx = std::sin(x), cx = std::cos(x);
    r.s = sx / x;
    r.d1 = (x * cx - sx) / (x * x);
    r.d2 = -r.s - 2.0 * r.d1 / x;
    return r;
}

bool is_integer(double N) { return std::abs(N - std::round(N)) < 1e-12; }

// g(u) = sin(N u) / sin(u) with derivatives in u.
DirichletTriple kernel_u(double N, double u) {
    double sign = 1.0;
    if (is_integer(N)) {
        double k = std::round(u / kPi);
        u -= k * kPi;
        long long kk = static_cast<long long>(k);
        long long nn = static_cast<long long>(std::llround(N)) - 1;
        if ((kk % 2 != 0) && (nn % 2 != 0)) sign = -1.0;
    }
    if (std::abs(u) < 0.5 * kPi) {
        Sinc a = sinc3(N * u);
        Sinc b = sinc3(u);
        double ad1 = N * a.d1, ad2 = N * N * a.d2;
        double num1 = ad1 * b.s - a.s * b.d1;
        double g = N * a.s / b.s;
        double g1 = N * num1 / (b.s * b.s);
        double g2 = N * ((ad2 * b.s - a.s * b.d2) / (b.s * b.s) -
                         2.0 * b.d1 * num1 / (b.s * b.s * b.s));
        return {sign * g, sign * g1, sign * g2};
    }
    double s = std::sin(u), c = std::cos(u);
    double sn = std::sin(N * u), cn = std::cos(N * u);
    double p = N * cn * s - sn * c;
    double dp = sn * s * (1.0 - N * N);
    return {sign * sn / s, sign * p / (s * s), sign * (dp * s - 2.0 * p * c) / (s * s * s)};
}

// Column on one subband: sum_l (u_l + v_l n) E_l.
struct Column {
    std::vector<cplx> u, v;
};

std::vector<std::vector<Column>> build_columns(const FimLayout& L, const std::vector<double>& F,
                                               const std::vector<double>& fs,
                                               const std::vector<cplx>& ap) {
    const int K = L.K, M = L.M, P = L.size();
    const cplx j(0.0, 1.0);
    std::vector<std::vector<Column>> cols(M, std::vector<Column>(P));
    for (int m = 0; m < M; ++m) {
        for (auto& c : cols[m]) {
            c.u.assign(K, 0.0);
            c.v.assign(K, 0.0);
        }
        for (int k = 0; k < K; ++k) {
            cols[m][L.tau(k)].u[k] = -j * kTwoPi * ap[k] * F[m];
            cols[m][L.tau(k)].v[k] = -j * kTwoPi * ap[k] * fs[m];
            cols[m][L.alpha_re(k)].u[k] = 1.0;
            cols[m][L.alpha_im(k)].u[k] = j;
        }
        if (L.phase && m >= 1)
            for (int l = 0; l < K; ++l) cols[m][L.phi(m)].u[l] = j * ap[l];
        if (L.timing)
            for (int l = 0; l < K; ++l) cols[m][L.delta(m)].v[l] = -j * kTwoPi * fs[m] * ap[l];
    }
    return cols;
}

void add_prior(Eigen::MatrixXd& J, const FimLayout& L, double sigma_p) {
    if (!L.timing) return;
    if (!(sigma_p > 0.0)) throw std::invalid_argument("sigma_p must be > 0 when timing offsets are modeled");
    for (int m = 0; m < L.M; ++m) J(L.delta(m), L.delta(m)) += 1.0 / (sigma_p * sigma_p);
}

void check_finite(const Eigen::MatrixXd& J) {
    if (!J.allFinite()) throw std::domain_error("FIM has non-finite entries (degenerate configuration)");
}

}  // namespace

DirichletTriple dirichlet_gamma(double N, double fs, double dtau) {
    // relaxed counts slightly below 2 occur inside finite differences
    if (!(N >= 1.0)) throw std::invalid_argument("dirichlet_gamma: N >= 1 required");
    if (!(fs > 0.0)) throw std::invalid_argument("dirichlet_gamma: fs > 0 required");
    double w = kPi * fs;
    DirichletTriple t = kernel_u(N, w * dtau);
    return {t.g, t.d1 * w, t.d2 * w * w};
}

BandSet BandSet::from(const MultibandConfig& c) {
    BandSet b;
    b.fc = c.fc;
    b.fs = c.fs;
    for (int n : c.N) b.N.push_back(n);
    return b;
}

FisherMatrix fim_summation(const MultibandConfig& config, const CanonicalParams& cp,
                           double sigma2, double sigma_p, bool phase, bool timing) {
    config.validate();
    FimLayout L{static_cast<int>(cp.alpha_prime.size()), config.M(), phase && config.M() > 1, timing};
    const int K = L.K, P = L.size();
    if (K < 1) throw std::invalid_argument("fim_summation: K >= 1 required");
    auto cols = build_columns(L, cp.fc_prime, config.fs, cp.alpha_prime);

    Eigen::MatrixXcd D(config.total(), P);
    int row = 0;
    for (int m = 0; m < L.M; ++m) {
        for (double n : subcarrier_offsets(config.N[m])) {
            double f = cp.fc_prime[m] + n * config.fs[m];
            std::vector<cplx> E(K);
            for (int k = 0; k < K; ++k) E[k] = std::polar(1.0, -kTwoPi * f * cp.tau[k]);
            for (int r = 0; r < P; ++r) {
                cplx acc = 0.0;
                for (int l = 0; l < K; ++l) acc += (cols[m][r].u[l] + cols[m][r].v[l] * n) * E[l];
                D(row, r) = acc;
            }
            ++row;
        }
    }
    Eigen::MatrixXd J = (2.0 / sigma2) * (D.adjoint() * D).real();
    J = 0.5 * (J + J.transpose()).eval();
    add_prior(J, L, sigma_p);
    check_finite(J);
    return {J, L};
}

FisherMatrix fim_compact_two_path(const BandSet& bands, const std::vector<cplx>& alpha_prime,
                                  const std::vector<double>& tau, double sigma2, double sigma_p,
                                  bool phase, bool timing) {
    if (alpha_prime.size() != 2 || tau.size() != 2)
        throw std::invalid_argument("fim_compact_two_path: K must be 2");
    const int M = bands.M();
    FimLayout L{2, M, phase && M > 1, timing};
    const int K = 2, P = L.size();
    std::vector<double> F(M);
    for (int m = 0; m < M; ++m) F[m] = bands.fc[m] - bands.fc[0];
    auto cols = build_columns(L, F, bands.fs, alpha_prime);

    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(P, P);
    for (int m = 0; m < M; ++m) {
        // W[p][k][l] = sum_n n^p exp(j 2pi f (tau_k - tau_l))
        cplx W[3][2][2];
        for (int k = 0; k < K; ++k) {
            for (int l = 0; l < K; ++l) {
                double lag = tau[k] - tau[l];
                DirichletTriple g = dirichlet_gamma(bands.N[m], bands.fs[m], lag);
                cplx rot = std::polar(1.0, kTwoPi * F[m] * lag);
                double w = kTwoPi * bands.fs[m];
                W[0][k][l] = rot * g.g;
                W[1][k][l] = rot * cplx(0.0, -g.d1 / w);
                W[2][k][l] = rot * (-g.d2 / (w * w));
            }
        }
        for (int r = 0; r < P; ++r) {
            const Column& x = cols[m][r];
            for (int s = r; s < P; ++s) {
                const Column& y = cols[m][s];
                cplx acc = 0.0;
                for (int k = 0; k < K; ++k) {
                    cplx uk = std::conj(x.u[k]), vk = std::conj(x.v[k]);
                    if (uk == 0.0 && vk == 0.0) continue;
                    for (int l = 0; l < K; ++l) {
                        acc += uk * y.u[l] * W[0][k][l] + (uk * y.v[l] + vk * y.u[l]) * W[1][k][l] +
                               vk * y.v[l] * W[2][k][l];
                    }
                }
                J(r, s) += acc.real();
            }
        }
    }
    J *= 2.0 / sigma2;
    J.triangularView<Eigen::StrictlyLower>() = J.transpose().triangularView<Eigen::StrictlyLower>();
    add_prior(J, L, sigma_p);
    check_finite(J);
    return {J, L};
}

FisherMatrix fim_compact_two_path(const MultibandConfig& config, const CanonicalParams& cp,
                                  double sigma2, double sigma_p, bool phase, bool timing) {
    config.validate();
    return fim_compact_two_path(BandSet::from(config), cp.alpha_prime, cp.tau, sigma2, sigma_p, phase,
                                timing);
}

namespace {

struct Scaled {
    Eigen::VectorXd dinv;  // 1/sqrt(diag)
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    double cond;
};

Scaled scale_and_decompose(const Eigen::MatrixXd& J) {
    Scaled s;
    const int n = static_cast<int>(J.rows());
    s.dinv.resize(n);
    for (int i = 0; i < n; ++i) {
        double d = J(i, i);
        if (!(d > 0.0) || !std::isfinite(d)) {
            s.cond = std::numeric_limits<double>::infinity();
            return s;
        }
        s.dinv(i) = 1.0 / std::sqrt(d);
    }
    Eigen::MatrixXd S = s.dinv.asDiagonal() * J * s.dinv.asDiagonal();
    s.eig.compute(S);
    double lo = s.eig.eigenvalues().minCoeff();
    double hi = s.eig.eigenvalues().maxCoeff();
    s.cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    return s;
}

}  // namespace

double scaled_condition(const Eigen::MatrixXd& J) {
    return scale_and_decompose(J).cond;
}

Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& J, double max_cond) {
    if (J.rows() != J.cols()) throw std::invalid_argument("checked_inverse: square matrix required");
    Scaled s = scale_and_decompose(J);
    if (!(s.cond <= max_cond)) {
        std::ostringstream os;
        os << "matrix is singular to working precision (scaled condition " << s.cond << ")";
        throw SingularMatrixError(os.str(), s.cond);
    }
    const auto& V = s.eig.eigenvectors();
    Eigen::VectorXd lam_inv = s.eig.eigenvalues().cwiseInverse();
    Eigen::MatrixXd Sinv = V * lam_inv.asDiagonal() * V.transpose();
    Eigen::MatrixXd inv = s.dinv.asDiagonal() * Sinv * s.dinv.asDiagonal();
    return 0.5 * (inv + inv.transpose());
}

Eigen::MatrixXd efim(const Eigen::MatrixXd& J, int q) {
    const int n = static_cast<int>(J.rows());
    if (q < 1 || q > n) throw std::invalid_argument("efim: block size out of range");
    if (q == n) return J;
    Eigen::MatrixXd A = J.topLeftCorner(q, q);
    Eigen::MatrixXd B = J.topRightCorner(q, n - q);
    Eigen::MatrixXd Cinv = checked_inverse(J.bottomRightCorner(n - q, n - q));
    return A - B * Cinv * B.transpose();
}

Eigen::MatrixXd separation_basis(const FimLayout& L) {
    const int n = L.size();
    Eigen::MatrixXd T = Eigen::MatrixXd::Identity(n, n);
    T(L.tau(1), 0) = 1.0;
    if (L.timing)
        for (int m = 0; m < L.M; ++m) T(L.delta(m), 0) = -1.0;
    return T;
}

double crb_delay_separation(const FisherMatrix& F) {
    if (F.layout.K != 2) throw std::invalid_argument("crb_delay_separation: K must be 2");
    Eigen::MatrixXd T = separation_basis(F.layout);
    return checked_inverse(T.transpose() * F.J * T)(1, 1);
}

double deb(const FisherMatrix& F, int K) {
    if (K < 1 || K > F.J.rows()) throw std::invalid_argument("deb: bad K");
    Eigen::MatrixXd Ci = checked_inverse(F.J);
    return std::sqrt(Ci.topLeftCorner(K, K).trace());
}

ClosedForm crb_closed_form(double Nbar, double fs, double dfc, double dtau) {
    if (!(Nbar >= 2.0) || !(fs > 0.0) || !(dfc > 0.0) || !(dtau > 0.0))
        throw std::invalid_argument("crb_closed_form: requires Nbar >= 2, fs > 0, dfc > 0, dtau > 0");
    DirichletTriple gt = dirichlet_gamma(Nbar, fs, dtau);
    const double N = Nbar, g = gt.g, g1 = gt.d1, g2 = gt.d2;
    const double pi2 = kPi * kPi, f2 = fs * fs, D2 = dfc * dfc;
    const double N2 = N * N, N3 = N2 * N, g1s = g1 * g1, gsq = g * g;

    double a = 12.0 * N2 - 6.0 * gsq;
    double b = -6.0 * gsq;
    double c = -3.0 * gsq * g2 + 3.0 * g * g1s;
    double d = 6.0 * pi2 * D2 * gsq * g + (-2.0 * N3 * pi2 * f2 + 2.0 * N * pi2 * f2 - 6.0 * g2) * gsq +
               (-6.0 * N2 * pi2 * D2 + 6.0 * g1s) * g + 6.0 * N2 * g2 - 6.0 * N * g1s;
    double e = 4.0 * N3 * N2 * pi2 * f2 + pi2 * (-2.0 * f2 * gsq + 12.0 * D2 - 4.0 * f2) * N3 +
               (-6.0 * pi2 * D2 * g + 6.0 * g2) * N2 +
               ((-12.0 * D2 + 2.0 * f2) * gsq * pi2 - 6.0 * g1s) * N - 3.0 * gsq * g2 + 3.0 * g * g1s +
               6.0 * pi2 * D2 * gsq * g;
    double h = -12.0 * kPi * dfc * N * g1 * (N - g);

    double psi = kTwoPi * dfc * dtau;
    double t = std::cos(psi), s = std::sin(psi);

    ClosedForm out{};
    out.t = t;
    out.c_dtau = (a + b * t) / (c * t * t + d * t + e + h * s);
    double cc = (N + g) * (N3 * f2 - N * f2) * pi2 + 3.0 * N * g2 + 3.0 * g * g2 - 3.0 * g1s;
    out.crb_up = (3.0 * N + 3.0 * g) / ((N + g) * (3.0 * N - 3.0 * g) * pi2 * D2 + cc);
    out.crb_low = 3.0 * N / (pi2 * ((3.0 * N2 - 3.0 * gsq) * D2 + N2 * N2 * f2 - N2 * f2));
    return out;
}

Eigen::Matrix2d fim_single_path(const MultibandConfig& config, double a1, double sigma2) {
    config.validate();
    double s1 = 0.0, s2 = 0.0;
    int Nt = 0;
    for (int m = 0; m < config.M(); ++m) {
        double F = config.fc[m] - config.fc[0];
        for (double n : subcarrier_offsets(config.N[m])) {
            double f = F + n * config.fs[m];
            s1 += f;
            s2 += f * f;
        }
        Nt += config.N[m];
    }
    double k = 2.0 / sigma2 * a1 * a1;
    Eigen::Matrix2d J;
    J(0, 0) = k * 4.0 * kPi * kPi * s2;
    J(0, 1) = J(1, 0) = -k * kTwoPi * s1;
    J(1, 1) = k * Nt;
    return J;
}

}  // namespace mbsense
