"""Reduction of pure three-qubit states to a five-coefficient normal form.

Any pure state of three qubits (controller wire first) is locally equivalent
to

    a0|000> + a1 e^{i mu}|100> + a2|101> + a3|110> + a4|111>

with all ai >= 0 and mu in [0, pi]. ``decompose`` finds the coefficients and
the three single-qubit unitaries realizing the reduction; ``canonical_state``
materializes a coefficient tuple as a state on wires (c, a, b).

Procedure: split the vector into the two controller slices T0, T1, choose a
controller-basis row (r0, r1) making det(r0 T0 + r1 T1) = 0 (a quadratic in
the mixing ratio, with explicit linear, constant and identically-zero
fallbacks including the projective root at infinity), diagonalize the singular
slice by SVD, then absorb residual phases into diagonal rotations on the three
wires. Each admissible root yields one candidate form; the one whose residual
phase lies in [0, pi] is selected (generically unique), with larger a0 and
then smaller mu as tie-breaks for edge cases such as fully real states.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InvalidCoefficientsError, NotNormalizedError, WireMismatchError
from .qcore import LocalOperator, PureState, apply_local, fidelity
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "CANONICAL_WIRES",
    "CanonicalThreeQubit",
    "canonical_state",
    "decompose",
    "verify_canonical",
    "canonical_to_dict",
    "canonical_from_dict",
    "load_channel",
    "save_channel",
]

CANONICAL_WIRES = ("c", "a", "b")
TWO_PI = 2.0 * np.pi
_COEFF_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class CanonicalThreeQubit:
    """Coefficients of the normal form plus the local unitaries reaching it.

    ``u_c``, ``u_a``, ``u_b`` applied to the source state reproduce
    ``canonical_state(a, mu)`` up to numerical error; ``source_fidelity``
    records how well. ``degenerate`` flags states that are product across
    some bipartition (the reduction still goes through).
    """

    a: tuple[float, float, float, float, float]
    mu: float
    u_c: LocalOperator
    u_a: LocalOperator
    u_b: LocalOperator
    source_fidelity: float
    degenerate: bool = False

    def __post_init__(self) -> None:
        coeffs = tuple(float(v) for v in self.a)
        if len(coeffs) != 5:
            raise InvalidCoefficientsError(f"expected 5 coefficients, got {len(coeffs)}")
        if not all(np.isfinite(v) for v in coeffs) or not np.isfinite(self.mu):
            raise InvalidCoefficientsError(f"non-finite coefficient in {coeffs!r}")
        if any(v < -_COEFF_SLACK or v > 1.0 + _COEFF_SLACK for v in coeffs):
            raise InvalidCoefficientsError(f"coefficients out of [0, 1]: {coeffs!r}")
        coeffs = tuple(min(max(v, 0.0), 1.0) for v in coeffs)
        total = sum(v * v for v in coeffs)
        if abs(total - 1.0) > _COEFF_SLACK:
            raise InvalidCoefficientsError(f"squared coefficients sum to {total!r}, not 1")
        mu = float(self.mu)
        if mu < -_COEFF_SLACK or mu > np.pi + _COEFF_SLACK:
            raise InvalidCoefficientsError(f"mu {mu!r} outside [0, pi]")
        mu = min(max(mu, 0.0), float(np.pi))
        if coeffs[1] < DEFAULT_TOLERANCES.rank:
            mu = 0.0
        object.__setattr__(self, "a", coeffs)
        object.__setattr__(self, "mu", mu)

    @classmethod
    def from_coefficients(cls, a: Sequence[float], mu: float = 0.0) -> "CanonicalThreeQubit":
        """Wrap a coefficient tuple as a channel (identity local unitaries)."""
        eye = LocalOperator(np.eye(2))
        channel = cls(tuple(float(v) for v in a), float(mu), eye, eye, eye, 1.0)
        flag = _degenerate_flag(canonical_state(channel).amplitudes)
        if flag != channel.degenerate:
            object.__setattr__(channel, "degenerate", flag)
        return channel


def canonical_state(a: Sequence[float] | CanonicalThreeQubit, mu: float | None = None) -> PureState:
    """Materialize normal-form coefficients on wires (c, a, b)."""
    if isinstance(a, CanonicalThreeQubit):
        coeffs, phase = a.a, a.mu
    else:
        coeffs = tuple(float(v) for v in a)
        phase = float(mu) if mu is not None else 0.0
    if len(coeffs) != 5 or any(v < -_COEFF_SLACK for v in coeffs):
        raise InvalidCoefficientsError(f"bad coefficient tuple {coeffs!r}")
    amps = np.zeros(8, dtype=np.complex128)
    amps[0] = coeffs[0]
    amps[4] = coeffs[1] * np.exp(1j * phase)
    amps[5] = coeffs[2]
    amps[6] = coeffs[3]
    amps[7] = coeffs[4]
    norm = float(np.linalg.norm(amps))
    if abs(norm - 1.0) > _COEFF_SLACK:
        raise InvalidCoefficientsError(f"squared coefficients sum to {norm**2!r}, not 1")
    return PureState(CANONICAL_WIRES, amps / norm)


def _mixing_rows(t0: np.ndarray, t1: np.ndarray, eps: float) -> list[np.ndarray]:
    # Projective roots of det(r0 T0 + r1 T1) = 0, as normalized rows (r0, r1).
    c2 = complex(np.linalg.det(t1))
    c1 = complex(t0[0, 0] * t1[1, 1] + t1[0, 0] * t0[1, 1]
                 - t0[0, 1] * t1[1, 0] - t1[0, 1] * t0[1, 0])
    c0 = complex(np.linalg.det(t0))
    scale = max(abs(c2), abs(c1), abs(c0))
    if scale <= eps:
        # every mixing works; leave the controller basis alone
        return [np.array([1.0, 0.0], dtype=np.complex128)]
    c2, c1, c0 = c2 / scale, c1 / scale, c0 / scale

    def row(x: complex) -> np.ndarray:
        if abs(x) <= 1.0:
            v = np.array([1.0, x], dtype=np.complex128)
        else:
            v = np.array([1.0 / x, 1.0], dtype=np.complex128)
        return v / np.linalg.norm(v)

    if abs(c2) > eps:
        disc = np.sqrt(c1 * c1 - 4.0 * c2 * c0)
        return [row((-c1 + disc) / (2.0 * c2)), row((-c1 - disc) / (2.0 * c2))]
    rows = []
    if abs(c1) > eps:
        rows.append(row(-c0 / c1))
    # leading coefficient zero means the pure-T1 direction is itself singular
    rows.append(np.array([0.0, 1.0], dtype=np.complex128))
    return rows


def _phase_gauge(t0_entry: complex, t1p: np.ndarray, thr: float):
    """Diagonal phase angles making a0, a2, a3, a4 real non-negative.

    Returns (gamma0, gamma1, alpha1, beta1, mu). Angles for the |0> levels of
    the sender and receiver wires are fixed at 0. Entries below ``thr``, or a
    million times smaller than the largest entry, are treated as absent; the
    relative floor keeps arithmetic noise (double roots of the mixing
    quadratic leave residue around sqrt machine epsilon) from injecting junk
    angles, at a fidelity cost bounded by the square of the floor. Whenever
    one of a2, a3, a4 is absent the leftover freedom is spent driving mu to 0.
    """
    mags = np.abs(t1p)
    thr = max(thr, 1e-6 * float(max(np.max(mags), abs(t0_entry))))
    a1, a2, a3, a4 = mags[0, 0], mags[0, 1], mags[1, 0], mags[1, 1]
    phi0 = float(np.angle(t0_entry)) if abs(t0_entry) > thr else 0.0
    ang = np.where(mags > thr, np.angle(t1p), 0.0)
    p1, p2, p3, p4 = (float(ang[0, 0]), float(ang[0, 1]),
                      float(ang[1, 0]), float(ang[1, 1]))
    gamma0 = -phi0
    if a2 > thr and a3 > thr and a4 > thr:
        alpha1 = p2 - p4
        beta1 = p3 - p4
        gamma1 = -p2 - p3 + p4
        mu = (p1 + gamma1) % TWO_PI if a1 > thr else 0.0
        return gamma0, gamma1, alpha1, beta1, mu
    gamma1 = -p1 if a1 > thr else 0.0
    alpha1 = beta1 = 0.0
    if a4 > thr:
        if a2 > thr:        # a3 absent
            beta1 = -p2 - gamma1
            alpha1 = -p4 - gamma1 - beta1
        elif a3 > thr:      # a2 absent
            alpha1 = -p3 - gamma1
            beta1 = -p4 - gamma1 - alpha1
        else:
            alpha1 = -p4 - gamma1
    else:
        if a2 > thr:
            beta1 = -p2 - gamma1
        if a3 > thr:
            alpha1 = -p3 - gamma1
    return gamma0, gamma1, alpha1, beta1, 0.0


def _form_from_row(amps: np.ndarray, mix: np.ndarray, thr: float):
    t0 = amps[:4].reshape(2, 2)
    t1 = amps[4:].reshape(2, 2)
    u_c = np.array([mix, [-np.conj(mix[1]), np.conj(mix[0])]])
    singular_slice = mix[0] * t0 + mix[1] * t1
    u, s, vh = np.linalg.svd(singular_slice)
    u_a = u.conj().T
    u_b = vh.conj()
    t0p = u_a @ singular_slice @ u_b.T
    t1p = u_a @ (u_c[1, 0] * t0 + u_c[1, 1] * t1) @ u_b.T
    gamma0, gamma1, alpha1, beta1, mu = _phase_gauge(t0p[0, 0], t1p, thr)
    mags = np.abs(t1p)
    coeffs = np.array([abs(t0p[0, 0]), mags[0, 0], mags[0, 1], mags[1, 0], mags[1, 1]])
    d_c = np.array([np.exp(1j * gamma0), np.exp(1j * gamma1)])
    d_a = np.array([1.0, np.exp(1j * alpha1)])
    d_b = np.array([1.0, np.exp(1j * beta1)])
    return coeffs, mu, d_c[:, None] * u_c, d_a[:, None] * u_a, d_b[:, None] * u_b


def _degenerate_flag(amps: np.ndarray, thr: float = DEFAULT_TOLERANCES.rank) -> bool:
    cube = amps.reshape(2, 2, 2)
    for axes in ((0, 1, 2), (1, 0, 2), (2, 0, 1)):
        mat = cube.transpose(axes).reshape(2, 4)
        if np.linalg.svd(mat, compute_uv=False)[1] <= thr:
            return True
    return False


def decompose(state: PureState, *, tol: Tolerances = DEFAULT_TOLERANCES) -> CanonicalThreeQubit:
    """Reduce a three-qubit state to normal form.

    The first wire of ``state`` is taken as the controller slot. Selection
    among the admissible controller mixings prefers the candidate whose
    residual phase lies in [0, pi], then the larger a0, then the smaller mu.
    """
    if state.num_wires != 3:
        raise WireMismatchError(f"need a three-wire state, got {state.wires!r}")
    amps = state.amplitudes
    thr = tol.rank
    candidates = []
    for mix in _mixing_rows(amps[:4].reshape(2, 2), amps[4:].reshape(2, 2), tol.norm):
        coeffs, mu, u_c, u_a, u_b = _form_from_row(amps, mix, thr)
        if mu > TWO_PI - _COEFF_SLACK:
            mu = 0.0
        in_range = mu <= np.pi + _COEFF_SLACK
        candidates.append((0 if in_range else 1, -coeffs[0], mu, coeffs, u_c, u_a, u_b))
    candidates.sort(key=lambda c: c[:3])
    _, _, mu, coeffs, u_c, u_a, u_b = candidates[0]
    mu = min(max(mu, 0.0), float(np.pi))
    ops = tuple(LocalOperator(m) for m in (u_c, u_a, u_b))
    target = canonical_state(np.clip(coeffs, 0.0, 1.0) / np.linalg.norm(coeffs), mu)
    rotated = state
    for op, wire in zip(ops, state.wires):
        rotated = apply_local(rotated, op, (wire,))
    fid = float(np.abs(np.vdot(target.amplitudes, rotated.amplitudes)) ** 2)
    return CanonicalThreeQubit(tuple(np.clip(coeffs, 0.0, 1.0) / np.linalg.norm(coeffs)),
                               mu, *ops, source_fidelity=fid,
                               degenerate=_degenerate_flag(amps, thr))


def verify_canonical(state: PureState, result: CanonicalThreeQubit) -> float:
    """Fidelity between the locally rotated source and the claimed form."""
    if state.num_wires != 3:
        raise WireMismatchError(f"need a three-wire state, got {state.wires!r}")
    rotated = state
    for op, wire in zip((result.u_c, result.u_a, result.u_b), state.wires):
        rotated = apply_local(rotated, op, (wire,))
    return fidelity(canonical_state(result), PureState(CANONICAL_WIRES, rotated.amplitudes))


def _matrix_to_pairs(matrix: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in matrix]


def _pairs_to_matrix(rows: list) -> np.ndarray:
    return np.array([[complex(float(re), float(im)) for re, im in row] for row in rows],
                    dtype=np.complex128)


def canonical_to_dict(channel: CanonicalThreeQubit) -> dict:
    return {
        "a": [float(v) for v in channel.a],
        "mu": float(channel.mu),
        "unitaries": {
            "u_c": _matrix_to_pairs(channel.u_c.matrix),
            "u_a": _matrix_to_pairs(channel.u_a.matrix),
            "u_b": _matrix_to_pairs(channel.u_b.matrix),
        },
        "source_fidelity": float(channel.source_fidelity),
        "degenerate": bool(channel.degenerate),
    }


def canonical_from_dict(data: dict, *, tol: Tolerances = DEFAULT_TOLERANCES) -> CanonicalThreeQubit:
    """Decode the on-disk channel format; unitaries are optional."""
    try:
        coeffs = np.array([float(v) for v in data["a"]], dtype=float)
        mu = float(data.get("mu", 0.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidCoefficientsError(f"malformed channel payload: {exc}") from exc
    if coeffs.size != 5:
        raise InvalidCoefficientsError(f"expected 5 coefficients, got {coeffs.size}")
    if np.any(coeffs < -tol.input_norm):
        raise InvalidCoefficientsError(f"negative coefficients: {coeffs.tolist()!r}")
    norm = float(np.linalg.norm(coeffs))
    if abs(norm - 1.0) > tol.input_norm:
        raise NotNormalizedError(
            f"coefficient norm {norm!r} deviates from 1 by more than {tol.input_norm}")
    coeffs = np.clip(coeffs, 0.0, None) / norm
    unit = data.get("unitaries") or {}
    ops = []
    for key in ("u_c", "u_a", "u_b"):
        if key in unit:
            ops.append(LocalOperator(_pairs_to_matrix(unit[key])))
        else:
            ops.append(LocalOperator(np.eye(2)))
    fid = float(data.get("source_fidelity", 1.0))
    channel = CanonicalThreeQubit(tuple(coeffs), mu, *ops, source_fidelity=fid,
                                  degenerate=bool(data.get("degenerate", False)))
    return channel


def load_channel(path: str | Path, *, tol: Tolerances = DEFAULT_TOLERANCES) -> CanonicalThreeQubit:
    with open(path, "r", encoding="utf-8") as fh:
        return canonical_from_dict(json.load(fh), tol=tol)


def save_channel(channel: CanonicalThreeQubit, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(canonical_to_dict(channel), fh, indent=2)
        fh.write("\n")
