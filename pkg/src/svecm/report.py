"""Plain-text table rendering and minimal SVG line plots.

Rendering conventions: coefficients print with 4 decimals, variance shares
with 2, t-ratios in parentheses with significance stars at the 10/5/1%
normal quantiles (* / ** / ***).  All formatting is locale-free and
deterministic so identical inputs produce byte-identical output.
"""

from __future__ import annotations

import numpy as np


def stars(t: float) -> str:
    a = abs(t)
    if a >= 2.576:
        return "***"
    if a >= 1.96:
        return "**"
    if a >= 1.645:
        return "*"
    return ""


def _table(rows, header, widths=None) -> str:
    cols = len(header)
    if widths is None:
        widths = [max(len(str(r[c])) for r in [header, *rows]) for c in range(cols)]
    lines = ["  ".join(str(header[c]).ljust(widths[c]) for c in range(cols)).rstrip()]
    lines.append("  ".join("-" * widths[c] for c in range(cols)))
    for r in rows:
        lines.append("  ".join(str(r[c]).ljust(widths[c]) for c in range(cols)).rstrip())
    return "\n".join(lines)


def render_adf_table(rows) -> str:
    """rows: (name, level stat, diff stat, verdict) tuples."""
    body = [
        (name, f"{lvl:.4f}", f"{dif:.4f}", verdict)
        for name, lvl, dif, verdict in rows
    ]
    return _table(body, ("variable", "level stat", "diff stat", "order"))


def render_rank_table(result) -> str:
    """Rank-test table: eigenvalue, hypothesis, trace and adjusted columns."""
    rows = []
    K = result.K
    for j in range(K):
        hyp = "r = 0" if j == 0 else f"r <= {j}"
        row = [
            f"{result.eigenvalues[j]:.4f}",
            hyp,
            f"{result.trace_stats[j]:.2f}",
            f"{result.trace_cv[j]['5%']:.2f}",
            f"{result.trace_cv[j]['1%']:.2f}",
        ]
        if result.sl_stats is not None:
            row += [
                f"{result.sl_stats[j]:.2f}",
                f"{result.sl_cv[j]['5%']:.2f}",
                f"{result.sl_cv[j]['1%']:.2f}",
            ]
        rows.append(tuple(row))
    header = ("eigenvalue", "H0", "trace", "5%", "1%")
    if result.sl_stats is not None:
        header += ("S&L", "5%", "1%")
    return _table(rows, header)


def render_relation(beta_col: np.ndarray, names, normalize_on: str = "w-p") -> str:
    """One cointegration vector as an equation solved for ``normalize_on``."""
    names = list(names)
    k = names.index(normalize_on)
    if abs(beta_col[k]) < 1e-12:
        raise ValueError(f"cannot solve the relation for {normalize_on}: zero coefficient")
    b = beta_col / beta_col[k]
    terms = []
    for i, name in enumerate(names):
        if i == k:
            continue
        c = -b[i]
        if abs(c) < 5e-5:
            continue
        mag = f"{abs(c):.4f}"
        if not terms:
            terms.append(f"-{mag}*{name}" if c < 0 else f"{mag}*{name}")
        else:
            terms.append(f"{'-' if c < 0 else '+'} {mag}*{name}")
    rhs = " ".join(terms) if terms else "0"
    return f"({normalize_on}) = {rhs}"


def render_impact_table(values: np.ndarray, tvalues, var_names, shock_names, title: str) -> str:
    rows = []
    for i, name in enumerate(var_names):
        cells = [name]
        for j in range(values.shape[1]):
            v = values[i, j]
            if tvalues is None:
                cells.append(f"{v:.4f}")
            elif tvalues[i, j] == 0.0 and v == 0.0:
                cells.append("0")
            else:
                t = tvalues[i, j]
                cells.append(f"{v:.4f} ({t:.4f}{stars(t)})")
        rows.append(tuple(cells))
    return title + "\n" + _table(rows, ("", *shock_names))


def render_fevd_table(result, variable: str) -> str:
    i = list(result.variable_names).index(variable)
    rows = []
    for h in result.horizons:
        shares = result.shares[h][i]
        rows.append((str(h), *[f"{s:.2f}" for s in shares]))
    title = f"Forecast-error variance decomposition: {variable}"
    return title + "\n" + _table(rows, ("period", *result.shock_names))


def svg_line_plot(path, x, y, title: str, ylabel: str = "") -> None:
    """Write a single-series SVG line chart with fixed, deterministic layout."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    W, Hg = 640, 420
    ml, mr, mt, mb = 60, 20, 40, 45
    iw, ih = W - ml - mr, Hg - mt - mb
    x0, x1 = float(x.min()), float(x.max())
    ylo, yhi = float(y.min()), float(y.max())
    if yhi - ylo < 1e-15:
        ylo -= 1.0
        yhi += 1.0
    pad = 0.05 * (yhi - ylo)
    ylo, yhi = ylo - pad, yhi + pad

    def sx(v):
        return ml + (v - x0) / (x1 - x0 or 1.0) * iw

    def sy(v):
        return mt + (yhi - v) / (yhi - ylo) * ih

    pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{Hg}">',
        f'<rect width="{W}" height="{Hg}" fill="white"/>',
        f'<text x="{W/2:.0f}" y="22" text-anchor="middle" font-family="monospace" font-size="14">{title}</text>',
        f'<rect x="{ml}" y="{mt}" width="{iw}" height="{ih}" fill="none" stroke="black"/>',
    ]
    if ylo < 0.0 < yhi:
        zy = sy(0.0)
        parts.append(
            f'<line x1="{ml}" y1="{zy:.2f}" x2="{ml+iw}" y2="{zy:.2f}" stroke="#999" stroke-dasharray="4 3"/>'
        )
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        xv = x0 + frac * (x1 - x0)
        yv = ylo + frac * (yhi - ylo)
        parts.append(
            f'<text x="{sx(xv):.2f}" y="{Hg-20}" text-anchor="middle" font-family="monospace" font-size="11">{xv:.0f}</text>'
        )
        parts.append(
            f'<text x="{ml-6}" y="{sy(yv)+4:.2f}" text-anchor="end" font-family="monospace" font-size="11">{yv:.4g}</text>'
        )
    if ylabel:
        parts.append(
            f'<text x="14" y="{mt + ih/2:.0f}" text-anchor="middle" font-family="monospace" font-size="12" transform="rotate(-90 14 {mt + ih/2:.0f})">{ylabel}</text>'
        )
    parts.append(f'<polyline points="{pts}" fill="none" stroke="#1f4e9c" stroke-width="1.5"/>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
