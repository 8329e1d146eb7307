import math

import numpy as np
import pytest

import mbsense

FS = 7.8125e-5
BANDS = dict(fc=[1.8, 2.0], fs=[FS, FS], N=[256, 256])


def test_dirichlet_gamma_matches_direct_sum():
    N, dtau = 64, 3.7
    n = np.arange(N) - (N - 1) / 2
    direct = np.exp(-2j * np.pi * n * FS * dtau).sum().real
    g, _, _ = mbsense.dirichlet_gamma(N, FS, dtau)
    assert g == pytest.approx(direct, rel=1e-12)


def test_fim_is_symmetric_and_methods_agree():
    alpha = [0.8 + 0.6j, 0.3 - 0.2j]
    a = mbsense.fim(**BANDS, alpha=alpha, tau=[0.0, 1.3], sigma2=0.05, method="compact")
    b = mbsense.fim(**BANDS, alpha=alpha, tau=[0.0, 1.3], sigma2=0.05, method="summation")
    assert a.shape == (9, 9)  # 3K + (M - 1) + M
    assert np.allclose(a, a.T)
    assert np.allclose(a, b, rtol=1e-8, atol=1e-8 * np.abs(b).max())


def test_closed_form_matches_pipeline():
    # fc1 * dtau is an integer, so the canonical gains are (1, 1) as the closed form assumes
    cf = mbsense.crb_closed_form(256, FS, 0.2, 2.5)
    c = mbsense.crb_delay_separation([2.0, 2.2], [FS, FS], [256, 256], [1, 1], [0.0, 2.5], 2.0)
    assert cf["c_dtau"] == pytest.approx(c, rel=1e-9)


def test_srl_is_a_fixed_point():
    s2 = mbsense.snr_to_sigma2(15)
    srl, res = mbsense.srl(BANDS["fc"], BANDS["fs"], [256.0, 256.0], 0.8 + 0.6j, 0.6 + 0.8j, s2)
    c = mbsense.crb_delay_separation(**BANDS, alpha=[0.8 + 0.6j, 0.6 + 0.8j], tau=[0.0, srl], sigma2=s2)
    assert abs(math.sqrt(c) - srl) < 1e-5
    assert abs(res) < 1e-5


def test_zzb_is_between_ecrb_and_prior():
    bands = dict(fc=[2.4, 2.9], fs=[FS, FS], N=[256, 256])
    z = mbsense.zzb(**bands, snr_db=0.0)
    e = mbsense.ecrb(**bands, snr_db=0.0, draws=20)
    assert e < z <= math.sqrt(100 / 12) + 1e-12


def test_optimizer_beats_baselines():
    args = dict(l=[2.4, 2.7], u=[2.5, 2.9], fs=[FS, FS], W=0.04, alpha1=0.8 + 0.6j, alpha2=0.6 + 0.8j,
                sigma2=mbsense.snr_to_sigma2(10))
    r = mbsense.optimize(**args, restarts=2)
    b1, b2 = mbsense.baselines(**args)
    assert r["feasible"]
    assert r["srl"] <= min(b1["srl"], b2["srl"])
    assert sum(r["N"]) * FS <= 0.04 + 1e-12


def test_errors_are_mapped():
    with pytest.raises(mbsense.InfeasibleError):
        mbsense.optimize([2.5, 2.7], [2.4, 2.9], [FS, FS], 0.04, 1, 1, 0.1)
    with pytest.raises(mbsense.SingularMatrixError):
        mbsense.crb_delay_separation(**BANDS, alpha=[1, 1], tau=[1.0, 1.0 + 1e-9], sigma2=0.1)
