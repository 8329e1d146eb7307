#include <cmath>

#include "doctest.h"
#include "mbsense/fisher.hpp"
#include "mbsense/zzb.hpp"

using namespace mbsense;

namespace {

ZzbSpec spec_at(double snr_db) {
    ZzbSpec s;
    s.config = MultibandConfig{{2.4, 2.9}, {7.8125e-5, 7.8125e-5}, {256, 256}};
    s.sigma2 = std::pow(10.0, -snr_db / 10.0);
    return s;
}

}  // namespace

TEST_CASE("Q function reference values") {
    CHECK(q_function(0.0) == doctest::Approx(0.5));
    CHECK(q_function(1.0) == doctest::Approx(0.15865525393145707).epsilon(1e-12));
    CHECK(q_function(3.0) == doctest::Approx(0.0013498980316300946).epsilon(1e-10));
    CHECK(q_function(-1.0) == doctest::Approx(1.0 - 0.15865525393145707).epsilon(1e-12));
}

TEST_CASE("binary error probability") {
    auto s = spec_at(0.0);
    CHECK(pmin_offset(s, 0.0, 0.0) == doctest::Approx(0.5));
    // direct evaluation of Q(a/sigma * sqrt(Nt - Re{e^{j e_phi} S}))
    double e = 0.37, ph = 1.1;
    cplx S = 0.0;
    for (int m = 0; m < 2; ++m)
        for (int i = 0; i < 256; ++i) {
            double f = s.config.fc[m] - 2.4 + (i - 127.5) * 7.8125e-5;
            S += std::exp(cplx(0, -kTwoPi * f * e));
        }
    double ref = q_function(std::sqrt((512.0 - (std::exp(cplx(0, ph)) * S).real()) / s.sigma2));
    CHECK(pmin_offset(s, e, ph) == doctest::Approx(ref).epsilon(1e-10));
    CHECK(pmin_offset(s, e, ph) < 0.5);
}

TEST_CASE("no signal gives the prior variance") {
    auto s = spec_at(0.0);
    s.a1 = 0.0;
    auto z = zzb_delay(s);
    CHECK(z.zzb == doctest::Approx(s.D * s.D / 12.0).epsilon(1e-6));
}

TEST_CASE("ZZB is bounded by the prior and meets the ECRB at high SNR") {
    for (double snr : {-10.0, 10.0, 30.0}) {
        auto z = zzb_delay(spec_at(snr));
        CHECK(z.zzb <= 100.0 / 12.0 + 1e-12);
        CHECK(z.zzb > 0.0);
    }
    auto s = spec_at(30.0);
    auto z = zzb_delay(s);
    auto e = ecrb_single_path(s, 10, 3);
    CHECK(z.sqrt_zzb == doctest::Approx(e.ecrb).epsilon(0.02));
    // ECRB equals the deterministic single-path CRB for this model
    Eigen::Matrix2d C = fim_single_path(s.config, s.a1, s.sigma2).inverse();
    CHECK(e.ecrb == doctest::Approx(std::sqrt(C(0, 0))).epsilon(1e-9));
    CHECK(e.std < 1e-9 * e.ecrb);
}

TEST_CASE("ZZB decreases with SNR") {
    double prev = 1e9;
    for (double snr : {-20.0, -10.0, 0.0, 10.0, 20.0}) {
        double v = zzb_delay(spec_at(snr)).sqrt_zzb;
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("MAP RMSE is seeded and thread independent") {
    auto s = spec_at(20.0);
    MapOptions o;
    o.trials = 12;
    o.tau_grid = 800;
    double a = map_rmse(s, o, 5);
    o.threads = 3;
    double b = map_rmse(s, o, 5);
    CHECK(a == b);
    CHECK(map_rmse(s, o, 6) != a);
    CHECK(a < 0.05);
}

TEST_CASE("invalid ZZB inputs") {
    auto s = spec_at(0.0);
    s.D = 0.0;
    CHECK_THROWS_AS(zzb_delay(s), std::invalid_argument);
    s = spec_at(0.0);
    s.n_tau = 4;
    CHECK_THROWS_AS(zzb_delay(s), std::invalid_argument);
}
