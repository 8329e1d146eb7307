"""Multiband delay-estimation limits: CRB, SRL, ZZB and spectrum optimization.

Frequencies are in GHz and delays in ns.
"""

from ._mbsense import (
    InfeasibleError,
    NoSrlInBracketError,
    SingularMatrixError,
    baselines,
    crb_closed_form,
    crb_delay_separation,
    deb,
    dirichlet_gamma,
    ecrb,
    fim,
    map_rmse,
    optimize,
    snr_to_sigma2,
    srl,
    zzb,
)

__all__ = [
    "InfeasibleError",
    "NoSrlInBracketError",
    "SingularMatrixError",
    "baselines",
    "crb_closed_form",
    "crb_delay_separation",
    "deb",
    "dirichlet_gamma",
    "ecrb",
    "fim",
    "map_rmse",
    "optimize",
    "snr_to_sigma2",
    "srl",
    "zzb",
]
