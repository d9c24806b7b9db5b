"""Reduced-form VECM estimation.

The model, for a K-variable panel X_t and cointegration rank r, is

    dX_t = alpha beta' X_{t-1} + sum_{i=1}^{p-1} Gamma_i dX_{t-i} + c + u_t

with alpha the K x r loadings, beta the K x r cointegration matrix taken
from the reduced-rank eigenvectors (or a restricted fit), and Sigma the
residual covariance with divisor T - p (the ML convention, so likelihood
values and t-ratios are comparable across fits).  For p = 1 the Gamma
block is empty; every code path supports that.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cointegration import (
    BetaRestriction,
    JohansenDecomposition,
    johansen,
    restricted_eigenvalues,
)
from .dataset import TimePanel
from .exceptions import RankOutOfRange, SingularDesign

_PD_TOL = 1e-12


@dataclass(frozen=True)
class VecmModel:
    """Estimated reduced-form VECM, immutable after fitting."""

    alpha: np.ndarray          # K x r loadings
    beta: np.ndarray           # K x r cointegration vectors
    gammas: tuple              # p-1 short-run K x K matrices
    det_coeffs: np.ndarray     # K-vector intercept (zeros when absent)
    sigma: np.ndarray          # K x K residual covariance
    residuals: np.ndarray      # (T - p) x K
    T: int
    p: int
    r: int
    deterministic: str
    names: tuple
    levels: np.ndarray         # original T x K data, kept for resampling
    rrr: JohansenDecomposition
    loglik: float

    @property
    def K(self) -> int:
        return self.levels.shape[1]

    @property
    def nobs(self) -> int:
        return self.T - self.p

    def beta_normalized(self, on: int = 0) -> np.ndarray:
        """Beta rescaled so row ``on`` of each column equals one."""
        b = self.beta.copy()
        for j in range(b.shape[1]):
            if abs(b[on, j]) < 1e-12:
                raise ValueError(f"cannot normalize on coefficient {on}: it is zero")
            b[:, j] = b[:, j] / b[on, j]
        return b


def fit_vecm(
    panel: TimePanel,
    p: int,
    r: int,
    deterministic: str = "constant",
    beta_restriction: BetaRestriction | None = None,
) -> VecmModel:
    """ML estimation at a given lag order and cointegration rank.

    beta comes from the reduced-rank eigenvectors (restricted to span(H)
    when a restriction is supplied); alpha, the short-run matrices and the
    intercept follow by least squares given beta.
    """
    K = panel.K
    if not 1 <= r <= K - 1:
        raise RankOutOfRange(f"need 1 <= r <= K-1 = {K - 1}, got r = {r}")
    if deterministic not in ("constant", "none"):
        raise ValueError("fit_vecm supports deterministic in {'constant', 'none'}")
    _, decomp = johansen(panel, p, deterministic)
    if beta_restriction is None:
        beta = decomp.vectors[:, :r].copy()
    else:
        if beta_restriction.s < r:
            raise RankOutOfRange(f"restriction spans {beta_restriction.s} < r = {r} directions")
        _, vecs = restricted_eigenvalues(decomp, beta_restriction)
        beta = vecs[:, :r].copy()

    N = decomp.nobs
    ec = decomp.y1 @ beta                      # N x r error-correction terms
    design = np.hstack([ec, decomp.z]) if decomp.z.shape[1] else ec
    coef, _, rank, _ = np.linalg.lstsq(design, decomp.y0, rcond=None)
    if rank < design.shape[1]:
        raise SingularDesign("collinear regressors in the VECM stage")
    resid = decomp.y0 - design @ coef
    sigma = resid.T @ resid / N
    w = np.linalg.eigvalsh(sigma)
    if w[0] <= _PD_TOL * max(w[-1], 1e-300):
        raise SingularDesign("residual covariance numerically singular")

    alpha = coef[:r].T
    gammas = tuple(coef[r + K * i: r + K * (i + 1)].T for i in range(p - 1))
    if deterministic == "constant":
        det_coeffs = coef[-1].copy()
    else:
        det_coeffs = np.zeros(K)
    sign, logdet = np.linalg.slogdet(sigma)
    loglik = -0.5 * N * (K * np.log(2.0 * np.pi) + logdet + K)
    return VecmModel(
        alpha=alpha,
        beta=beta,
        gammas=gammas,
        det_coeffs=det_coeffs,
        sigma=sigma,
        residuals=resid,
        T=panel.T,
        p=p,
        r=r,
        deterministic=deterministic,
        names=panel.names,
        levels=panel.values,
        rrr=decomp,
        loglik=float(loglik),
    )


def to_level_var(model: VecmModel) -> list:
    """Equivalent level-VAR coefficient matrices A_1..A_p.

    A_1 = I + alpha beta' + Gamma_1, A_i = Gamma_i - Gamma_{i-1} for
    1 < i < p, A_p = -Gamma_{p-1}; for p = 1 simply A_1 = I + alpha beta'.
    """
    K = model.K
    pi = model.alpha @ model.beta.T
    p = model.p
    if p == 1:
        return [np.eye(K) + pi]
    gammas = model.gammas
    mats = [np.eye(K) + pi + gammas[0]]
    for i in range(1, p - 1):
        mats.append(gammas[i] - gammas[i - 1])
    mats.append(-gammas[p - 2])
    return mats


def level_var_path(
    coef_mats,
    const: np.ndarray,
    initial: np.ndarray,
    innovations: np.ndarray,
) -> np.ndarray:
    """Iterate X_t = c + sum_i A_i X_{t-i} + u_t from ``initial`` history.

    ``initial`` is the presample (p x K, oldest first); returns the p + N
    path including it.
    """
    p = len(coef_mats)
    initial = np.atleast_2d(initial)
    if initial.shape[0] != p:
        raise ValueError(f"need {p} presample rows, got {initial.shape[0]}")
    N, K = innovations.shape
    path = np.empty((p + N, K))
    path[:p] = initial
    for t in range(N):
        x = const + innovations[t]
        for i, a in enumerate(coef_mats, start=1):
            x = x + a @ path[p + t - i]
        path[p + t] = x
    return path


def vecm_path(
    alpha: np.ndarray,
    beta: np.ndarray,
    gammas,
    const: np.ndarray,
    initial: np.ndarray,
    innovations: np.ndarray,
) -> np.ndarray:
    """Iterate the error-correction recursion directly (oracle for
    ``to_level_var``: both recursions must produce identical paths)."""
    p = len(gammas) + 1
    initial = np.atleast_2d(initial)
    if initial.shape[0] != p:
        raise ValueError(f"need {p} presample rows, got {initial.shape[0]}")
    N, K = innovations.shape
    path = np.empty((p + N, K))
    path[:p] = initial
    for t in range(N):
        prev = path[p + t - 1]
        dx = const + alpha @ (beta.T @ prev) + innovations[t]
        for i, g in enumerate(gammas, start=1):
            dx = dx + g @ (path[p + t - i] - path[p + t - i - 1])
        path[p + t] = prev + dx
    return path
