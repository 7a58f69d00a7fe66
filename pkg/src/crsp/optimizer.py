"""Controller-angle optimization for the single-qubit protocol.

The real-class success probability at a controller setting is
``2 (p0 lambda00 + p1 lambda10)``. Each product ``p lambda`` equals the
squared smallest singular value of the corresponding unnormalized
projection of the channel slices, which is the form evaluated here: it is
algebraically identical to normalizing first and is continuous where a
branch probability vanishes.

Sweeps evaluate the whole landscape with one batched SVD; maximization
runs a coarse grid followed by a compass pattern search with halving
steps, which is robust at the kinks the smallest singular value has where
the two Schmidt weights cross.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .canonical import CanonicalThreeQubit
from .protocols import ControllerSetting

_MAX_REFINE_ROUNDS = 5000


def _slices(channel: CanonicalThreeQubit) -> tuple[np.ndarray, np.ndarray]:
    a = channel.a
    t0 = np.array([[a[0], 0.0], [0.0, 0.0]], dtype=np.complex128)
    t1 = np.array([[a[1] * np.exp(1j * channel.mu), a[2]],
                   [a[3], a[4]]], dtype=np.complex128)
    return t0, t1


def _grid_eval(channel: CanonicalThreeQubit, thetas: np.ndarray,
               etas: np.ndarray):
    """Vectorized branch data over a theta x eta grid. Returns arrays of
    shape (len(thetas), len(etas)): p0, p1, lambda00, lambda10, values."""
    t0, t1 = _slices(channel)
    ct = np.cos(thetas / 2.0)[:, None]
    st = np.sin(thetas / 2.0)[:, None]
    ph = np.exp(-1j * etas)[None, :]
    m0 = ct[..., None, None] * t0 + (st * ph)[..., None, None] * t1
    m1 = st[..., None, None] * t0 - (ct * ph)[..., None, None] * t1
    s0 = np.linalg.svd(m0, compute_uv=False)
    s1 = np.linalg.svd(m1, compute_uv=False)
    p0 = np.sum(s0 ** 2, axis=-1)
    p1 = np.sum(s1 ** 2, axis=-1)
    min0 = s0[..., 1] ** 2
    min1 = s1[..., 1] ** 2
    floor = 1e-14
    lam00 = np.where(p0 > floor, min0 / np.maximum(p0, floor), 0.0)
    lam10 = np.where(p1 > floor, min1 / np.maximum(p1, floor), 0.0)
    values = np.clip(2.0 * (min0 + min1), 0.0, 1.0)
    return p0, p1, lam00, lam10, values


def _value(channel: CanonicalThreeQubit, theta: float, eta: float) -> float:
    return float(_grid_eval(channel, np.array([theta]), np.array([eta]))[4][0, 0])


def success_value(channel: CanonicalThreeQubit,
                  setting: ControllerSetting) -> float:
    """Real-class success probability 2(p0 lambda00 + p1 lambda10) at one
    controller setting, clamped to [0, 1]. A branch with vanishing
    probability contributes zero rather than erroring."""
    return _value(channel, setting.theta, setting.eta)


@dataclass(frozen=True, eq=False)
class Landscape:
    """Success-probability surface over inclusive uniform grids covering
    theta in [0, pi] and eta in [0, 2*pi], with the per-cell branch data
    the export format carries."""

    theta_grid: np.ndarray
    eta_grid: np.ndarray
    p0: np.ndarray
    p1: np.ndarray
    lambda00: np.ndarray
    lambda10: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class Optimum:
    theta_star: float
    eta_star: float
    p_real: float
    p_complex: float
    iterations: int


def sweep(channel: CanonicalThreeQubit, theta_steps: int = 181,
          eta_steps: int = 361) -> Landscape:
    """Evaluate the landscape on a theta_steps x eta_steps inclusive grid
    in deterministic row-major order."""
    if theta_steps < 2 or eta_steps < 2:
        raise ValueError("grids need at least two steps per axis")
    thetas = np.linspace(0.0, np.pi, theta_steps)
    etas = np.linspace(0.0, 2.0 * np.pi, eta_steps)
    p0, p1, lam00, lam10, values = _grid_eval(channel, thetas, etas)
    return Landscape(theta_grid=thetas, eta_grid=etas, p0=p0, p1=p1,
                     lambda00=lam00, lambda10=lam10, values=values)


def landscape_to_csv(landscape: Landscape) -> str:
    """Render a landscape in the export format, one row per grid cell,
    12 significant digits."""
    lines = ["theta,eta,p0,p1,lambda00,lambda10,P_real,P_complex"]
    for i, theta in enumerate(landscape.theta_grid):
        for j, eta in enumerate(landscape.eta_grid):
            cells = (theta, eta, landscape.p0[i, j], landscape.p1[i, j],
                     landscape.lambda00[i, j], landscape.lambda10[i, j],
                     landscape.values[i, j], landscape.values[i, j] / 2.0)
            lines.append(",".join(format(c, ".12g") for c in cells))
    return "\n".join(lines) + "\n"


def save_landscape(landscape: Landscape, path: str | Path) -> None:
    Path(path).write_text(landscape_to_csv(landscape), encoding="utf-8")


def maximize(channel: CanonicalThreeQubit, *, theta_steps: int = 181,
             eta_steps: int = 361, refine_tol: float = 1e-7) -> Optimum:
    """Locate the best controller setting: coarse grid, then compass
    search with halving steps until the step drops below ``refine_tol``.

    Grid cells within 1e-12 of the best sampled value count as tied, and
    ties resolve to the smallest eta, then the smallest theta; that pins a
    deterministic representative when the optimum is a whole curve of
    settings. Refinement accepts a move only when it improves the
    incumbent by more than the same 1e-12 guard, so float noise on a flat
    optimum cannot walk the point away. The incumbent value never
    decreases.
    """
    land = sweep(channel, theta_steps, eta_steps)
    tied = land.values >= float(np.max(land.values)) - 1e-12
    flat = int(np.argmax(tied.T))
    ei, ti = divmod(flat, land.theta_grid.size)
    theta = float(land.theta_grid[ti])
    eta = float(land.eta_grid[ei])
    best = float(land.values[ti, ei])
    step_t = float(np.pi / (theta_steps - 1))
    step_e = float(2.0 * np.pi / (eta_steps - 1))
    iterations = 0
    while max(step_t, step_e) >= refine_tol and iterations < _MAX_REFINE_ROUNDS:
        iterations += 1
        probes = [
            (min(theta + step_t, np.pi), eta),
            (max(theta - step_t, 0.0), eta),
            (theta, (eta + step_e) % (2.0 * np.pi)),
            (theta, (eta - step_e) % (2.0 * np.pi)),
        ]
        scored = [(_value(channel, th, et), th, et) for th, et in probes]
        top = max(scored, key=lambda item: item[0])
        if top[0] > best + 1e-12:
            best, theta, eta = top
        else:
            step_t /= 2.0
            step_e /= 2.0
    return Optimum(theta_star=theta, eta_star=eta, p_real=best,
                   p_complex=best / 2.0, iterations=iterations)
