#include <cmath>
#include <numeric>

#include "doctest.h"
#include "mbsense/model.hpp"

using namespace mbsense;

TEST_CASE("symmetric subcarrier grid") {
    auto n4 = subcarrier_offsets(4);
    CHECK(n4 == std::vector<double>{-1.5, -0.5, 0.5, 1.5});
    auto n5 = subcarrier_offsets(5);
    CHECK(n5 == std::vector<double>{-2, -1, 0, 1, 2});
    CHECK(std::accumulate(n4.begin(), n4.end(), 0.0) == 0.0);

    MultibandConfig c{{1.8, 2.0}, {1e-3, 2e-3}, {4, 3}};
    auto f = frequency_grid(c, 1);
    REQUIRE(f.size() == 3);
    CHECK(f[0] == doctest::Approx(1.998));
    CHECK(f[2] == doctest::Approx(2.002));
    CHECK_THROWS_AS(frequency_grid(c, 2), std::out_of_range);
    CHECK_THROWS_AS(frequency_grid(c, -1), std::out_of_range);
}

TEST_CASE("config validation") {
    MultibandConfig ok{{1.8, 2.0}, {7.8125e-5, 7.8125e-5}, {256, 256}};
    CHECK_NOTHROW(ok.validate());
    CHECK(ok.total() == 512);
    CHECK(ok.warnings().empty());

    MultibandConfig small = ok;
    small.N[1] = 1;
    CHECK_THROWS_AS(small.validate(), std::invalid_argument);

    MultibandConfig overlap{{1.0, 1.01}, {1e-3, 1e-3}, {16, 16}};
    CHECK_THROWS_AS(overlap.validate(), std::invalid_argument);

    MultibandConfig touching{{1.0, 1.016}, {1e-3, 1e-3}, {16, 16}};
    CHECK_NOTHROW(touching.validate());

    MultibandConfig odd{{1.0}, {1e-3}, {17}};
    CHECK(odd.warnings().size() == 1);
}

TEST_CASE("single path at zero delay gives a flat CFR") {
    MultibandConfig c{{2.4}, {1e-3}, {8}};
    PathSet p{{cplx(0.3, -0.4)}, {0.0}};
    for (const auto& h : synthesize_cfr(c, p)) CHECK(std::abs(h - cplx(0.3, -0.4)) < 1e-15);
}

TEST_CASE("canonical mean reproduces the physical noise-free signal") {
    MultibandConfig c{{1.8, 2.05, 2.3}, {7.8125e-5, 1.5625e-4, 7.8125e-5}, {16, 9, 12}};
    PathSet p{{cplx(0.8, 0.6), cplx(-0.2, 0.5)}, {1.25, 3.7}};
    DistortionModel d{{0.3, -1.1, 2.0}, {0.4, -0.7, 1.3}, 1.0};
    auto cp = canonicalize(c, p, d);
    CHECK(cp.fc_prime[0] == 0.0);
    CHECK(cp.phi_prime.size() == 2);
    auto mu = canonical_mean(c, cp);

    // direct physical model
    size_t i = 0;
    for (int m = 0; m < c.M(); ++m) {
        for (double n : subcarrier_offsets(c.N[m])) {
            double f = c.fc[m] + n * c.fs[m];
            cplx h = 0.0;
            for (int k = 0; k < p.K(); ++k) h += p.alpha[k] * std::exp(cplx(0, -kTwoPi * f * p.tau[k]));
            h *= std::exp(cplx(0, d.phi[m] - kTwoPi * n * c.fs[m] * d.delta[m]));
            CHECK(std::abs(mu[i++] - h) < 1e-9);
        }
    }
}

TEST_CASE("received samples: seeded noise with the stated variance") {
    MultibandConfig c{{1.0, 1.5}, {1e-3, 1e-3}, {4000, 4000}};
    PathSet p{{cplx(1.0, 0.0)}, {2.0}};
    auto d = DistortionModel::none(2);
    NoiseModel nz{2.0};
    auto y1 = synthesize_received(c, p, d, nz, 42);
    auto y2 = synthesize_received(c, p, d, nz, 42);
    auto y3 = synthesize_received(c, p, d, nz, 43);
    CHECK(y1 == y2);
    CHECK(y1 != y3);
    auto h = synthesize_cfr(c, p);
    double re = 0.0, im = 0.0;
    for (size_t i = 0; i < h.size(); ++i) {
        cplx e = y1[i] - h[i];
        re += e.real() * e.real();
        im += e.imag() * e.imag();
    }
    re /= h.size();
    im /= h.size();
    CHECK(re == doctest::Approx(1.0).epsilon(0.05));
    CHECK(im == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("snr convention and identifiability") {
    CHECK(NoiseModel::from_snr_db(10.0).sigma2 == doctest::Approx(0.1));
    CHECK(NoiseModel::from_snr_db(-20.0).sigma2 == doctest::Approx(100.0));
    MultibandConfig c{{1.0}, {1e-3}, {4}};
    CHECK(check_identifiability(c, 2));
    c.N[0] = 3;
    CHECK_FALSE(check_identifiability(c, 2));
}

TEST_CASE("path validation") {
    PathSet bad{{cplx(1, 0), cplx(1, 0)}, {2.0, 1.0}};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    PathSet zero{{cplx(0, 0)}, {0.0}};
    CHECK_THROWS_AS(zero.validate(), std::invalid_argument);
}
