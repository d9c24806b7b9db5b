"""Augmented Dickey-Fuller unit-root testing.

The regression is

    dx_t = c + delta*t + rho*x_{t-1} + sum_i phi_i dx_{t-i} + e_t

with the deterministic part controlled by ``deterministic`` in
{"none", "constant", "constant+trend"}; the reported statistic is the
t-ratio on rho.  Critical values come from response-surface coefficients
in the MacKinnon style: cv = b0 + b1/N + b2/N^2 + b3/N^3 with N the number
of regression observations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import SingularRegression, TooShort

DETERMINISTIC_CASES = ("none", "constant", "constant+trend")

# response-surface coefficients (b0, b1, b2, b3) per significance level
_RESPONSE_SURFACE = {
    "none": {
        "1%": (-2.56574, -2.2358, -3.627, 0.0),
        "5%": (-1.94100, -0.2686, -3.365, 31.223),
        "10%": (-1.61682, 0.2656, -2.714, 25.364),
    },
    "constant": {
        "1%": (-3.43035, -6.5393, -16.786, -79.433),
        "5%": (-2.86154, -2.8903, -4.234, -40.040),
        "10%": (-2.56677, -1.5384, -2.809, 0.0),
    },
    "constant+trend": {
        "1%": (-3.95877, -9.0531, -28.428, -134.155),
        "5%": (-3.41049, -4.3904, -9.036, -45.374),
        "10%": (-3.12705, -2.5856, -3.925, -22.380),
    },
}

_LEVELS = ("1%", "5%", "10%")


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    lags_used: int
    deterministic: str
    critical_values: dict
    reject_at: str | None

    def rejects(self, level: str = "5%") -> bool:
        return self.statistic < self.critical_values[level]


def adf_critical_values(deterministic: str, nobs: int) -> dict:
    """Critical values at 1/5/10% for a given regression sample size."""
    if deterministic not in _RESPONSE_SURFACE:
        raise ValueError(f"deterministic must be one of {DETERMINISTIC_CASES}")
    out = {}
    for level in _LEVELS:
        b0, b1, b2, b3 = _RESPONSE_SURFACE[deterministic][level]
        out[level] = b0 + b1 / nobs + b2 / nobs**2 + b3 / nobs**3
    return out


def _design(x: np.ndarray, lags: int, deterministic: str, usable: int):
    """Build (y, X) for the ADF regression using the last ``usable`` obs."""
    dx = np.diff(x)
    total = dx.shape[0]
    rows = usable
    y = dx[total - rows:]
    cols = [x[total - rows: total][:, None]]  # x_{t-1}, aligned with y
    for i in range(1, lags + 1):
        cols.append(dx[total - rows - i: total - i][:, None])
    if deterministic in ("constant", "constant+trend"):
        cols.append(np.ones((rows, 1)))
    if deterministic == "constant+trend":
        cols.append(np.arange(1, rows + 1, dtype=float)[:, None])
    X = np.hstack(cols)
    return y, X


def _tstat_first(y: np.ndarray, X: np.ndarray) -> tuple[float, float]:
    """t-ratio on the first column plus the regression's log(SSR/n)."""
    n, k = X.shape
    if n <= k:
        raise TooShort(f"{n} observations for {k} regressors")
    # scale columns for conditioning; t-ratios are scale invariant
    scale = np.sqrt((X**2).mean(axis=0))
    scale[scale == 0.0] = 1.0
    Xs = X / scale
    _, sv, _ = np.linalg.svd(Xs, full_matrices=False)
    if sv[-1] < 1e-12 * sv[0]:
        raise SingularRegression("ADF design matrix is numerically singular")
    beta, _, _, _ = np.linalg.lstsq(Xs, y, rcond=None)
    resid = y - Xs @ beta
    ssr = float(resid @ resid)
    sigma2 = ssr / (n - k)
    xtx_inv = np.linalg.inv(Xs.T @ Xs)
    se = np.sqrt(sigma2 * xtx_inv[0, 0])
    tstat = beta[0] / se
    return float(tstat), float(np.log(ssr / n))


def adf_test(
    series,
    deterministic: str = "constant",
    max_lags: int = 0,
    lag_selection: str = "fixed",
) -> AdfResult:
    """Run the ADF regression and compare against response-surface criticals.

    ``lag_selection="fixed"`` uses exactly ``max_lags`` lagged differences;
    "aic"/"sc" search 0..max_lags on a common estimation sample and refit
    the chosen order on the longest sample it allows.
    """
    x = np.asarray(series, dtype=float).ravel()
    if deterministic not in DETERMINISTIC_CASES:
        raise ValueError(f"deterministic must be one of {DETERMINISTIC_CASES}")
    if lag_selection not in ("fixed", "aic", "sc"):
        raise ValueError("lag_selection must be 'fixed', 'aic' or 'sc'")
    if max_lags < 0:
        raise ValueError("max_lags must be nonnegative")
    n_regressors = 1 + max_lags + (deterministic != "none") + (deterministic == "constant+trend")
    if len(x) - max_lags - 2 <= n_regressors:
        raise TooShort(f"series of length {len(x)} too short for max_lags={max_lags}")

    if lag_selection == "fixed":
        chosen = max_lags
    else:
        usable = len(x) - 1 - max_lags  # common sample across candidates
        best = None
        for lag in range(max_lags + 1):
            y, X = _design(x, lag, deterministic, usable)
            n, k = X.shape
            _, log_ssr_n = _tstat_first(y, X)
            penalty = 2.0 * k / n if lag_selection == "aic" else k * np.log(n) / n
            ic = log_ssr_n + penalty
            if best is None or ic < best[0] - 1e-14:
                best = (ic, lag)
        chosen = best[1]

    usable = len(x) - 1 - chosen
    y, X = _design(x, chosen, deterministic, usable)
    stat, _ = _tstat_first(y, X)
    crit = adf_critical_values(deterministic, len(y))
    reject_at = None
    for level in _LEVELS:  # tightest level first
        if stat < crit[level]:
            reject_at = level
            break
    return AdfResult(
        statistic=stat,
        lags_used=chosen,
        deterministic=deterministic,
        critical_values=crit,
        reject_at=reject_at,
    )


def integration_order(
    series,
    deterministic: str = "constant",
    max_lags: int = 0,
    lag_selection: str = "fixed",
    level: str = "5%",
) -> tuple[AdfResult, AdfResult, str]:
    """ADF on levels and first differences with an I(0)/I(1)/I(2+) verdict."""
    x = np.asarray(series, dtype=float).ravel()
    res_level = adf_test(x, deterministic, max_lags, lag_selection)
    res_diff = adf_test(np.diff(x), deterministic, max_lags, lag_selection)
    if res_level.rejects(level):
        verdict = "I(0)"
    elif res_diff.rejects(level):
        verdict = "I(1)"
    else:
        verdict = "I(2+)"
    return res_level, res_diff, verdict
