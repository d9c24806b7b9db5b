"""Impulse responses and forecast-error variance decompositions.

Responses are Theta_h = Phi_h B, with Phi_h the moving-average matrices of
the level-VAR representation and B the identified impact matrix; horizon 0
is B itself.  The h-step FEVD share of shock j in variable i is

    shares[h][i][j] = sum_{s<h} Theta_s[i,j]^2 / sum_j sum_{s<h} Theta_s[i,j]^2

so horizon 1 uses the impact matrix alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateVariance
from .svec import SvecModel
from .vecm import VecmModel, to_level_var

#: default table horizons for decompositions
FEVD_HORIZONS = (1, 2, 5, 10, 15, 20)


@dataclass(frozen=True)
class IrfResult:
    horizons: np.ndarray          # 0..H
    responses: np.ndarray         # (H+1) x K x K, [h, i, j] = var i to shock j
    accumulated: bool
    variable_names: tuple
    shock_names: tuple


@dataclass(frozen=True)
class FevdResult:
    horizons: tuple
    shares: dict                  # horizon -> K x K share matrix
    variable_names: tuple
    shock_names: tuple


def ma_coefficients(model: VecmModel, H: int) -> np.ndarray:
    """Phi_0..Phi_H of the level representation (Phi_0 = I)."""
    K = model.K
    coef = to_level_var(model)
    p = len(coef)
    phi = np.zeros((H + 1, K, K))
    phi[0] = np.eye(K)
    for h in range(1, H + 1):
        acc = np.zeros((K, K))
        for i in range(1, min(h, p) + 1):
            acc += coef[i - 1] @ phi[h - i]
        phi[h] = acc
    return phi


def irf(svec: SvecModel, vecm: VecmModel, H: int = 50, accumulated: bool = False) -> IrfResult:
    """Structural impulse responses out to horizon H (one-sigma shocks)."""
    if H < 1:
        raise ValueError("H must be >= 1")
    phi = ma_coefficients(vecm, H)
    responses = phi @ svec.b
    responses[0] = svec.b
    if accumulated:
        responses = np.cumsum(responses, axis=0)
    return IrfResult(
        horizons=np.arange(H + 1),
        responses=responses,
        accumulated=accumulated,
        variable_names=vecm.names,
        shock_names=svec.shock_names,
    )


def shares_from_responses(responses: np.ndarray, horizons) -> dict:
    """FEVD shares from a stack of response matrices (injection-friendly)."""
    out = {}
    cum = np.cumsum(responses**2, axis=0)
    for h in horizons:
        if h < 1:
            raise ValueError("FEVD horizons must be >= 1")
        if h > responses.shape[0]:
            raise ValueError(f"horizon {h} beyond computed responses")
        num = cum[h - 1]
        total = num.sum(axis=1, keepdims=True)
        if np.any(total <= 0.0):
            bad = int(np.flatnonzero(total.ravel() <= 0.0)[0])
            raise DegenerateVariance(f"zero forecast-error variance for variable index {bad}")
        out[h] = num / total
    return out


def fevd(svec: SvecModel, vecm: VecmModel, horizons=FEVD_HORIZONS) -> FevdResult:
    """Forecast-error variance decomposition at the requested horizons."""
    horizons = tuple(int(h) for h in horizons)
    if not horizons:
        raise ValueError("need at least one horizon")
    H = max(horizons)
    res = irf(svec, vecm, H=H, accumulated=False)
    return FevdResult(
        horizons=horizons,
        shares=shares_from_responses(res.responses, horizons),
        variable_names=vecm.names,
        shock_names=svec.shock_names,
    )
