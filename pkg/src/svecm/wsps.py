"""WS-PS labor-market simulator used as ground truth for the estimators.

The model is a log-linear wage-setting / price-setting economy driven by
five structural innovations: demand (d), technology (s), price (p), wage
(w) and labor supply (l).  Under total hysteresis (lambda = 0) the five
observables (p, y-n, w-p, n, u) follow unit-root processes whose one-period
increments are exact linear combinations of the innovations:

    d(y-n) = e_s
    d(w-p) = e_s - e_p
    dp     = -e_s + (1+g2)*e_p + e_w + g1*e_d
    dn     = (phi+a-1)*e_s - phi*(1+g2)*e_p - phi*e_w + phi*(1-g1)*e_d
    du     = [-(phi+a+alpha-1)*e_s + (phi*(1+g2)-alpha)*e_p + phi*e_w
              - phi*(1-g1)*e_d + e_l] / (1+b)

The wage innovation is transitory by default: it perturbs the current
level through the same coefficients but never cumulates, so its long-run
impact on every series is zero and the system has exactly one
cointegration relation (four common trends).  That makes the simulated
data an exact structural VECM with one transitory shock -- the known truth
each estimator test checks against.  ``wage_shock="permanent"`` switches to
literal accumulation of all five innovations (five common trends, no
cointegration), which is occasionally useful for unit tests of the
increment algebra itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import SYSTEM_COLUMNS, TimePanel
from .exceptions import AllZeroCoefficients, InvalidParams

#: column order of shocks in every matrix this module emits
SHOCK_NAMES = ("eps_p", "eps_s", "eps_w", "eps_d", "eps_l")

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def standard_normals(seed: int, n: int) -> np.ndarray:
    """Portable deterministic N(0,1) draws.

    The generator is fully specified so fixtures are reproducible from the
    description alone: the k-th 64-bit word is splitmix64 applied to
    ``seed + k * 0x9E3779B97F4A7C15`` (mod 2^64); words are mapped to
    uniforms on (0, 1] via ``((word >> 11) + 1) * 2**-53`` and to normals
    by the Box-Muller transform, pairing consecutive uniforms as
    (radius, angle).
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    m = (n + 1) // 2
    with np.errstate(over="ignore"):
        z = np.uint64(seed % 2**64) + np.arange(1, 2 * m + 1, dtype=np.uint64) * _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        z = z ^ (z >> np.uint64(31))
    u = ((z >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53
    r = np.sqrt(-2.0 * np.log(u[0::2]))
    theta = 2.0 * np.pi * u[1::2]
    out = np.empty(2 * m)
    out[0::2] = r * np.cos(theta)
    out[1::2] = r * np.sin(theta)
    return out[:n]


@dataclass(frozen=True)
class WsPsParams:
    """Structural parameters of the WS-PS economy.

    phi     : demand elasticity (> 0)
    a       : production shift coefficient
    alpha_l : labor-supply elasticity w.r.t. the real wage (> 0)
    b       : discouragement coefficient (> 0)
    gamma1  : wage indexation to demand shocks, in [0, 1]
    gamma2  : wage indexation to price shocks, in [0, 1]
    lam     : hysteresis parameter in [0, 1]; 0 = total hysteresis
    """

    phi: float = 0.5
    a: float = 0.1
    alpha_l: float = 0.2
    b: float = 0.5
    gamma1: float = 0.3
    gamma2: float = 0.2
    lam: float = 0.0

    def __post_init__(self):
        if not (self.phi > 0 and self.alpha_l > 0 and self.b > 0):
            raise InvalidParams("phi, alpha_l and b must be strictly positive")
        if not (0.0 <= self.gamma1 <= 1.0 and 0.0 <= self.gamma2 <= 1.0):
            raise InvalidParams("gamma1 and gamma2 must lie in [0, 1]")
        if not 0.0 <= self.lam <= 1.0:
            raise InvalidParams("lam must lie in [0, 1]")

    @property
    def rho(self) -> float:
        """Unemployment persistence (1+b-lam)/(1+b); 1 iff lam = 0."""
        return (1.0 + self.b - self.lam) / (1.0 + self.b)

    def increment_matrix(self) -> np.ndarray:
        """5x5 map from unit innovations to increments of (p, y-n, w-p, n, u).

        Columns follow ``SHOCK_NAMES`` order (eps_p, eps_s, eps_w, eps_d, eps_l).
        """
        phi, a, al, b = self.phi, self.a, self.alpha_l, self.b
        g1, g2 = self.gamma1, self.gamma2
        ib = 1.0 / (1.0 + b)
        c_p = np.array([1 + g2, 0.0, -1.0, -phi * (1 + g2), ib * (phi * (1 + g2) - al)])
        c_s = np.array([-1.0, 1.0, 1.0, phi + a - 1, -ib * (phi + a + al - 1)])
        c_w = np.array([1.0, 0.0, 0.0, -phi, ib * phi])
        c_d = np.array([g1, 0.0, 0.0, phi * (1 - g1), -ib * phi * (1 - g1)])
        c_l = np.array([0.0, 0.0, 0.0, 0.0, ib])
        return np.column_stack([c_p, c_s, c_w, c_d, c_l])


#: default innovation standard deviations; the wage scale is kept an order
#: of magnitude below the permanent shocks so its transitory contribution
#: to unemployment variance stays marginal, matching its designation as
#: the single short-lived shock.
DEFAULT_SIGMAS = {"d": 0.1, "s": 0.1, "p": 0.1, "w": 0.015, "l": 0.1}


@dataclass(frozen=True)
class ShockSequence:
    """Drawn structural innovations (already scaled by their sigmas)."""

    T: int
    eps_d: np.ndarray
    eps_s: np.ndarray
    eps_p: np.ndarray
    eps_w: np.ndarray
    eps_l: np.ndarray
    sigmas: dict = field(default_factory=lambda: dict(DEFAULT_SIGMAS))
    seed: int | None = None

    def __post_init__(self):
        for name in ("eps_d", "eps_s", "eps_p", "eps_w", "eps_l"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (self.T,):
                raise InvalidParams(f"{name} must have length T={self.T}")
            object.__setattr__(self, name, v)
        if any(s < 0 for s in self.sigmas.values()):
            raise InvalidParams("sigmas must be nonnegative")

    @classmethod
    def draw(cls, T: int, sigmas: dict | None = None, seed: int = 0) -> "ShockSequence":
        """Draw T periods of independent innovations.

        The 5*T underlying normals come from ``standard_normals(seed, 5*T)``
        split into consecutive blocks ordered (d, s, p, w, l), each scaled
        by its sigma.
        """
        sig = dict(DEFAULT_SIGMAS)
        if sigmas:
            unknown = set(sigmas) - set(sig)
            if unknown:
                raise InvalidParams(f"unknown sigma keys: {sorted(unknown)}")
            sig.update(sigmas)
        z = standard_normals(seed, 5 * T).reshape(5, T)
        return cls(
            T=T,
            eps_d=sig["d"] * z[0],
            eps_s=sig["s"] * z[1],
            eps_p=sig["p"] * z[2],
            eps_w=sig["w"] * z[3],
            eps_l=sig["l"] * z[4],
            sigmas=sig,
            seed=seed,
        )

    def stacked(self) -> np.ndarray:
        """T x 5 matrix of innovations in SHOCK_NAMES order."""
        return np.column_stack([self.eps_p, self.eps_s, self.eps_w, self.eps_d, self.eps_l])


def simulate(
    params: WsPsParams,
    shocks: ShockSequence,
    initial_levels=None,
    start_year: int = 1960,
    wage_shock: str = "transitory",
) -> TimePanel:
    """Simulate the (p, y-n, w-p, n, u) system in levels.

    ``initial_levels`` gives the five pre-sample levels (default zeros,
    except u = 0.1).  With ``wage_shock="transitory"`` (the default) the
    wage innovation moves the current period only; with ``"permanent"`` it
    cumulates like the other four.
    """
    if params.lam != 0.0:
        raise InvalidParams("unit-root simulation requires total hysteresis (lam = 0)")
    if wage_shock not in ("transitory", "permanent"):
        raise InvalidParams(f"wage_shock must be 'transitory' or 'permanent', got {wage_shock!r}")
    if initial_levels is None:
        initial_levels = np.array([0.0, 0.0, 0.0, 0.0, 0.1])
    x0 = np.asarray(initial_levels, dtype=float)
    if x0.shape != (5,):
        raise InvalidParams("initial_levels must have length 5")

    C = params.increment_matrix()
    eps = shocks.stacked()  # T x 5, SHOCK_NAMES order
    w_col = SHOCK_NAMES.index("eps_w")
    if wage_shock == "permanent":
        increments = eps @ C.T
        levels = x0 + np.cumsum(increments, axis=0)
    else:
        eps_perm = eps.copy()
        eps_perm[:, w_col] = 0.0
        levels = x0 + np.cumsum(eps_perm @ C.T, axis=0)
        levels += np.outer(eps[:, w_col], C[:, w_col])
    years = np.arange(start_year, start_year + shocks.T)
    return TimePanel(SYSTEM_COLUMNS, years, levels)


def raw_series(
    params: WsPsParams,
    shocks: ShockSequence,
    initial_levels=None,
    start_year: int = 1960,
    wage_shock: str = "transitory",
    exponentiate: bool = True,
) -> TimePanel:
    """Recover raw (y, n, w, p, u) series from a simulation.

    y and w are rebuilt from the differentials (y = (y-n) + n,
    w = (w-p) + p).  With ``exponentiate=True`` the four log series are
    exponentiated so the panel can be fed through the standard log-based
    ingestion; u is passed through unchanged.
    """
    sys_panel = simulate(params, shocks, initial_levels, start_year, wage_shock)
    p = sys_panel.column("p")
    yn = sys_panel.column("y-n")
    wp = sys_panel.column("w-p")
    n = sys_panel.column("n")
    u = sys_panel.column("u")
    y = yn + n
    w = wp + p
    cols = np.column_stack([y, n, w, p, u])
    if exponentiate:
        cols[:, :4] = np.exp(cols[:, :4])
    return TimePanel(("y", "n", "w", "p", "u"), sys_panel.years, cols)


def reconstruct_output_wage(params: WsPsParams, shocks: ShockSequence):
    """Per-period increments of the full variable set (y, n, w, p, u).

    Returns the tuple (dy, dn, dw, dp, du) implied by the structural
    solution for output, employment, the nominal wage, the price level and
    unemployment.  By construction dy - dn equals eps_s and dw - dp equals
    eps_s - eps_p, exactly.
    """
    phi, a, al, b = params.phi, params.a, params.alpha_l, params.b
    g1, g2 = params.gamma1, params.gamma2
    e_d, e_s, e_p = shocks.eps_d, shocks.eps_s, shocks.eps_p
    e_w, e_l = shocks.eps_w, shocks.eps_l
    dy = phi * (1 - g1) * e_d - phi * (1 + g2) * e_p - phi * e_w + (phi + a) * e_s
    dn = phi * (1 - g1) * e_d - phi * (1 + g2) * e_p - phi * e_w + (phi + a - 1) * e_s
    dw = e_w + g1 * e_d + g2 * e_p
    dp = e_w + (1 + g2) * e_p + g1 * e_d - e_s
    du = (
        -(phi + a + al - 1) * e_s
        + (phi * (1 + g2) - al) * e_p
        + phi * e_w
        - phi * (1 - g1) * e_d
        + e_l
    ) / (1.0 + b)
    return dy, dn, dw, dp, du


def analytic_fevd_u(params: WsPsParams, sigmas) -> np.ndarray:
    """Variance shares of the unemployment increment, ordered (s, p, w, d, l).

    share_j = (c_j sigma_j)^2 / sum_k (c_k sigma_k)^2 with
    c = (1+b)^-1 * (-(phi+a+alpha-1), phi(1+g2)-alpha, phi, -phi(1-g1), 1).
    ``sigmas`` is a 5-vector in the same (s, p, w, d, l) order or a mapping
    with keys d/s/p/w/l.
    """
    phi, a, al, b = params.phi, params.a, params.alpha_l, params.b
    g1, g2 = params.gamma1, params.gamma2
    c = np.array([-(phi + a + al - 1), phi * (1 + g2) - al, phi, -phi * (1 - g1), 1.0])
    c /= 1.0 + b
    if isinstance(sigmas, dict):
        sig = np.array([sigmas[k] for k in ("s", "p", "w", "d", "l")], dtype=float)
    else:
        sig = np.asarray(sigmas, dtype=float)
    if sig.shape != (5,):
        raise InvalidParams("sigmas must supply five standard deviations")
    weights = (c * sig) ** 2
    total = weights.sum()
    if total == 0.0:
        raise AllZeroCoefficients("every shock contribution to du is zero")
    return weights / total


def true_impact_matrices(params: WsPsParams, sigmas=None, wage_shock: str = "transitory"):
    """Ground-truth impact matrices for one-standard-deviation shocks.

    Returns (B, XiB): contemporaneous and long-run impacts, rows in system
    order (p, y-n, w-p, n, u), columns in SHOCK_NAMES order.  Under the
    transitory wage regime the wage column of XiB is identically zero.
    """
    sig = dict(DEFAULT_SIGMAS)
    if sigmas:
        sig.update(sigmas)
    scale = np.array([sig["p"], sig["s"], sig["w"], sig["d"], sig["l"]])
    B = params.increment_matrix() * scale
    XiB = B.copy()
    if wage_shock == "transitory":
        XiB[:, SHOCK_NAMES.index("eps_w")] = 0.0
    return B, XiB
