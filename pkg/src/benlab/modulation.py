"""Decomposition of a state near the solitary wave as u = Q(.-rho) + eta.

The translation rho is pinned by the orthogonality <Q', u(.+rho) - Q> = 0,
located by a circular cross-correlation scan over all grid shifts and
refined by Newton iteration. Along a trajectory, rho is unwrapped across
the periodic seam and differentiated to estimate the instantaneous speed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import Field, derivative, inner, norm, shift
from .waves import WaveParams, _solve_at

__all__ = [
    "ModulationRecord",
    "NoConvergence",
    "AmbiguousFit",
    "OutOfRange",
    "fit_translation",
    "decompose",
    "match_speed",
    "track_modulation",
]


class NoConvergence(RuntimeError):
    """Newton refinement of the translation failed."""


class AmbiguousFit(RuntimeError):
    """Two coarse-scan candidates tie within tolerance."""


class OutOfRange(ValueError):
    """Mass target outside the L2 range of the branch over c in [0.5, 2]."""


@dataclass(frozen=True)
class ModulationRecord:
    t: float
    rho: float
    rho_dot: float
    c_star: float
    eta_l2: float
    eta_h1: float
    ortho_defect: float
    ok: bool = True


def _coarse_scan(u: Field, q: Field) -> float:
    """argmax over grid shifts of <u, q(.-s)> by circular cross-correlation."""
    g = u.grid
    corr = np.fft.irfft(u.hat * np.conj(q.hat), n=g.n)
    best = int(np.argmax(corr))
    peak = corr[best]
    near = np.flatnonzero(corr >= peak - 1e-9 * abs(peak))
    if near.size > 1:
        spread = (near - best) % g.n
        spread = np.minimum(spread, g.n - spread)
        if np.max(spread) > 2:
            raise AmbiguousFit(
                f"{near.size} correlation candidates tie within tolerance"
            )
    return best * g.dx


def fit_translation(u: Field, q: Field, max_newton: int = 50) -> float:
    """Translation rho with <q'(x), u(x+rho) - q(x)> = 0, modulo L.

    Seeded by the coarse correlation scan, refined by Newton on the
    orthogonality residual.
    """
    g = u.grid
    qp = derivative(q, 1)
    scale = norm(qp, "l2") * max(norm(u, "l2"), 1e-300)
    tol = 1e-10 * scale

    s = _coarse_scan(u, q)
    for _ in range(max_newton):
        us = shift(u, s)
        f_val = inner(qp, us - q)
        if abs(f_val) < tol:
            break
        slope = inner(qp, derivative(us, 1))
        if slope <= 0:
            raise NoConvergence(f"degenerate Newton slope {slope:.3g}")
        step = -f_val / slope
        if abs(step) > g.L / 4:
            raise NoConvergence(f"Newton step {step:.3g} diverges")
        s += step
    else:
        raise NoConvergence(f"no Newton convergence, residual {f_val:.3g}")
    s = (s + g.L / 2) % g.L - g.L / 2
    return float(s)


def decompose(u: Field, params: WaveParams, profile: Field | None = None):
    """Split u = Q(.-rho) + eta(.-rho) with <Q', eta> = 0.

    Returns (rho, eta) where eta lives in the frame of the profile.
    """
    if profile is None:
        profile = _solve_at(params, u.grid).profile
    rho = fit_translation(u, profile)
    eta = shift(u, rho) - profile
    return rho, eta


def match_speed(
    target_l2sq: float,
    gamma: float,
    grid,
    c_range=(0.5, 2.0),
    tol: float = 1e-8,
) -> float:
    """Speed c* with ||Q_{gamma,c*}||_L2^2 = target, by monotone bisection.

    The squared L2 norm is strictly increasing in c along the branch, so
    bisection over c_range is safe whenever the target is in range.
    """
    cache = {}

    def l2sq(c):
        if c not in cache:
            cache[c] = norm(_solve_at(WaveParams(gamma, c), grid).profile, "l2") ** 2
        return cache[c]

    lo, hi = c_range
    f_lo, f_hi = l2sq(lo) - target_l2sq, l2sq(hi) - target_l2sq
    if f_lo > 0 or f_hi < 0:
        raise OutOfRange(
            f"target {target_l2sq:.6g} outside branch range "
            f"[{f_lo + target_l2sq:.6g}, {f_hi + target_l2sq:.6g}]"
        )
    while hi - lo > 1e-13:
        mid = 0.5 * (lo + hi)
        f_mid = l2sq(mid) - target_l2sq
        if abs(f_mid) < tol:
            return mid
        if f_mid < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _unwrap(rhos: np.ndarray, L: float) -> np.ndarray:
    out = np.array(rhos, float)
    for i in range(1, out.size):
        d = out[i] - out[i - 1]
        d -= L * np.round(d / L)
        out[i] = out[i - 1] + d
    return out


def _smoothed_gradient(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Centered differences with 3-point smoothing of the input."""
    if y.size < 2:
        return np.zeros_like(y)
    ys = y.copy()
    if y.size >= 3:
        ys[1:-1] = (y[:-2] + y[1:-1] + y[2:]) / 3
    return np.gradient(ys, t)


def track_modulation(trajectory, params: WaveParams, profile: Field | None = None):
    """Modulation records for every snapshot of a trajectory.

    rho is unwrapped across the periodic seam; rho_dot uses smoothed
    centered differences; c_star comes from mass matching of the first
    snapshot (mass is conserved along the flow).
    """
    snaps = trajectory.snapshots
    if not snaps:
        raise ValueError("trajectory carries no snapshots")
    grid = trajectory.grid
    if profile is None:
        profile = _solve_at(params, grid).profile
    qp = derivative(profile, 1)

    c_star = match_speed(inner(snaps[0][1], snaps[0][1]), params.gamma, grid)

    times, rhos, etas, oks = [], [], [], []
    for t, u in snaps:
        times.append(t)
        try:
            rho, eta = decompose(u, params, profile=profile)
            rhos.append(rho)
            etas.append(eta)
            oks.append(True)
        except (NoConvergence, AmbiguousFit):
            rhos.append(rhos[-1] if rhos else 0.0)
            etas.append(None)
            oks.append(False)

    t_arr = np.array(times)
    rho_un = _unwrap(np.array(rhos), grid.L)
    rho_dot = _smoothed_gradient(t_arr, rho_un)

    records = []
    for i, (t, u) in enumerate(snaps):
        if oks[i]:
            eta = etas[i]
            records.append(
                ModulationRecord(
                    t=t,
                    rho=rho_un[i],
                    rho_dot=float(rho_dot[i]),
                    c_star=c_star,
                    eta_l2=norm(eta, "l2"),
                    eta_h1=norm(eta, "h1"),
                    ortho_defect=abs(inner(qp, eta)),
                )
            )
        else:
            records.append(
                ModulationRecord(
                    t=t, rho=rho_un[i], rho_dot=float(rho_dot[i]), c_star=c_star,
                    eta_l2=np.nan, eta_h1=np.nan, ortho_defect=np.nan, ok=False,
                )
            )
    return records
