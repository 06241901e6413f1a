"""CSV and SVG output for trajectories.

Floats are written with 17 significant digits, which is enough for every
double to read back bit-for-bit. The SVG is assembled by hand so that the
bytes depend only on the data.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .simulator import Trajectory


def fmt(x) -> str:
    return format(float(x), ".17g")


def trajectory_header(n: int, m: int) -> list[str]:
    cols = ["t"]
    cols += [f"x_{i + 1}_{k + 1}" for i in range(n) for k in range(m)]
    cols += ["H", "h", "hbar", "f_bar"]
    for name in ("gamma", "alpha", "theta"):
        cols += [f"{name}_{i + 1}" for i in range(n)]
    return cols


def _diag_cells(rec) -> list[str]:
    cells = [fmt(rec.H), "" if rec.h is None else fmt(rec.h), fmt(rec.hbar), fmt(rec.f_bar)]
    for arr in (rec.gamma, rec.alpha, rec.theta):
        cells += [fmt(v) for v in arr]
    return cells


def write_trajectory_csv(traj: Trajectory, path) -> Path:
    path = Path(path)
    _, n, m = traj.states.shape
    if len(traj.diagnostics) != len(traj.times):
        raise ValueError("trajectory has no diagnostics for every sample")
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trajectory_header(n, m))
        for t, X, rec in zip(traj.times, traj.states, traj.diagnostics):
            w.writerow([fmt(t)] + [fmt(v) for v in X.ravel()] + _diag_cells(rec))
    return path


def write_diagnostics_csv(traj: Trajectory, path) -> Path:
    path = Path(path)
    n = traj.states.shape[1]
    header = trajectory_header(n, traj.states.shape[2])
    header = [header[0]] + header[1 + n * traj.states.shape[2]:]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for rec in traj.diagnostics:
            w.writerow([fmt(rec.t)] + _diag_cells(rec))
    return path


def read_trajectory_csv(path):
    """Return ``(times, states, columns)`` where ``columns`` maps every header to an array.

    Empty cells (``h`` in the empty-intersection case) become NaN.
    """
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array([[float(c) if c != "" else math.nan for c in r] for r in body])
    columns = {name: data[:, j] for j, name in enumerate(header)}
    xcols = [c for c in header if c.startswith("x_")]
    n = max(int(c.split("_")[1]) for c in xcols)
    m = max(int(c.split("_")[2]) for c in xcols)
    states = np.column_stack([columns[c] for c in xcols]).reshape(len(body), n, m)
    return columns["t"], states, columns


# --- SVG -------------------------------------------------------------------

PANEL_W, PANEL_H, PAD = 420, 320, 48
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")
LOG_FLOOR = 1e-16


def _num(x: float) -> str:
    return f"{x:.2f}"


def _polyline(xs, ys, color, column, width=1.2):
    pts = " ".join(f"{_num(x)},{_num(y)}" for x, y in zip(xs, ys))
    return (f'<polyline fill="none" stroke="{color}" stroke-width="{width}" '
            f'data-column="{escape(column)}" points="{pts}"/>')


def _text(x, y, s, anchor="middle", size=11):
    return f'<text x="{_num(x)}" y="{_num(y)}" font-size="{size}" text-anchor="{anchor}">{escape(s)}</text>'


def _paths_panel(states, x_off):
    n = states.shape[1]
    P = states.reshape(-1, 2)
    lo, hi = P.min(axis=0), P.max(axis=0)
    span = max(float(np.max(hi - lo)), 1e-12)
    inner_w, inner_h = PANEL_W - 2 * PAD, PANEL_H - 2 * PAD
    scale = min(inner_w, inner_h) / span

    def sx(v):
        return x_off + PAD + (v - lo[0]) * scale

    def sy(v):
        return PANEL_H - PAD - (v - lo[1]) * scale

    out = [f'<rect x="{x_off + PAD}" y="{PAD}" width="{inner_w}" height="{inner_h}" fill="none" stroke="#999"/>',
           _text(x_off + PANEL_W / 2, PAD / 2, "agent paths")]
    for i in range(n):
        col = COLORS[i % len(COLORS)]
        out.append(_polyline(sx(states[:, i, 0]), sy(states[:, i, 1]), col, f"x_{i + 1}_1,x_{i + 1}_2"))
        out.append(f'<circle cx="{_num(sx(states[0, i, 0]))}" cy="{_num(sy(states[0, i, 1]))}" r="3" '
                   f'fill="none" stroke="{col}"/>')
    out.append(_text(x_off + PAD, PANEL_H - PAD / 3, f"x1 in [{lo[0]:.3g}, {hi[0]:.3g}]", "start", 10))
    out.append(_text(x_off + PANEL_W - PAD, PANEL_H - PAD / 3, f"x2 in [{lo[1]:.3g}, {hi[1]:.3g}]", "end", 10))
    return out


def _log_panel(times, series, x_off):
    inner_w, inner_h = PANEL_W - 2 * PAD, PANEL_H - 2 * PAD
    logs = {k: np.log10(np.maximum(v, LOG_FLOOR)) for k, v in series.items()}
    lo = math.floor(min(float(v.min()) for v in logs.values()))
    hi = math.ceil(max(float(v.max()) for v in logs.values()))
    if hi == lo:
        hi = lo + 1
    t0, t1 = float(times[0]), float(times[-1])
    tspan = (t1 - t0) or 1.0

    def sx(t):
        return x_off + PAD + (t - t0) / tspan * inner_w

    def sy(lv):
        return PAD + (hi - lv) / (hi - lo) * inner_h

    out = [f'<rect x="{x_off + PAD}" y="{PAD}" width="{inner_w}" height="{inner_h}" fill="none" stroke="#999"/>',
           _text(x_off + PANEL_W / 2, PAD / 2, "H(t) and f_bar(t), log scale")]
    step = max(1, (hi - lo) // 8)
    for e in range(lo, hi + 1, step):
        y = sy(e)
        out.append(f'<line x1="{_num(x_off + PAD - 4)}" y1="{_num(y)}" x2="{_num(x_off + PAD)}" y2="{_num(y)}" stroke="#333"/>')
        out.append(_text(x_off + PAD - 6, y + 3, f"1e{e}", "end", 9))
    for j, (name, lv) in enumerate(logs.items()):
        col = COLORS[j % len(COLORS)]
        out.append(_polyline(sx(times), sy(lv), col, name))
        out.append(_text(x_off + PANEL_W - PAD, PAD + 14 + 12 * j, name, "end", 10))
    out.append(_text(x_off + PANEL_W / 2, PANEL_H - PAD / 3, f"t in [{t0:g}, {t1:g}]", "middle", 10))
    return out


def render_svg(traj: Trajectory) -> str:
    """Agent paths (planar runs only) next to H and f_bar on a log axis."""
    times = traj.times
    H = np.array([r.H for r in traj.diagnostics])
    f_bar = np.array([r.f_bar for r in traj.diagnostics])
    parts = []
    x_off = 0
    if traj.states.shape[2] == 2:
        parts += _paths_panel(traj.states, 0)
        x_off = PANEL_W
    parts += _log_panel(times, {"H": H, "f_bar": f_bar}, x_off)
    width = x_off + PANEL_W
    head = (f'<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{PANEL_H}" '
            f'viewBox="0 0 {width} {PANEL_H}">\n'
            f'<rect width="{width}" height="{PANEL_H}" fill="white"/>\n')
    return head + "\n".join(parts) + "\n</svg>\n"


def write_svg(traj: Trajectory, path) -> Path:
    path = Path(path)
    path.write_text(render_svg(traj))
    return path
