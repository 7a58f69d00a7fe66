"""Pure-state mechanics for small named-wire qubit registers.

States are dense complex vectors over an ordered tuple of named wires, the
first listed wire being the most significant bit of the amplitude index.
Everything here is immutable and side-effect free: operations return new
values, so callers may share states freely across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    DuplicateWireError,
    NotNormalizedError,
    UnknownWireError,
    WireMismatchError,
)
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "PureState",
    "LocalOperator",
    "MeasurementBasis",
    "SchmidtPair",
    "MeasurementOutcome",
    "basis_state",
    "tensor",
    "reorder",
    "apply_local",
    "measure",
    "computational_basis",
    "bipartite_schmidt",
    "fidelity",
    "haar_random_state",
    "load_state",
    "save_state",
    "state_to_dict",
    "state_from_dict",
]


def _complex_vector(values: Iterable[complex]) -> np.ndarray:
    arr = np.array(list(values) if not isinstance(values, np.ndarray) else values,
                   dtype=np.complex128)
    return arr


@dataclass(frozen=True, eq=False)
class PureState:
    """A normalized pure state over named wires.

    Parameters
    ----------
    wires:
        Ordered unique labels, first label most significant in the index.
    amplitudes:
        Complex vector of length ``2 ** len(wires)`` with unit norm.
    """

    wires: tuple[str, ...]
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        wires = tuple(self.wires)
        if len(set(wires)) != len(wires):
            raise DuplicateWireError(f"duplicate wire labels in {wires!r}")
        amps = _complex_vector(self.amplitudes)
        if amps.ndim != 1 or amps.size != 2 ** len(wires):
            raise DimensionMismatchError(
                f"expected {2 ** len(wires)} amplitudes for wires {wires!r}, "
                f"got shape {amps.shape}")
        if not np.all(np.isfinite(amps.view(np.float64))):
            raise NotNormalizedError("non-finite amplitude")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > DEFAULT_TOLERANCES.norm:
            raise NotNormalizedError(f"state norm {norm!r} deviates from 1")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "wires", wires)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, wires: Sequence[str], amplitudes: Iterable[complex]) -> "PureState":
        """Build a state from an unnormalized but nonzero amplitude vector."""
        amps = _complex_vector(amplitudes)
        norm = float(np.linalg.norm(amps))
        if norm == 0.0:
            raise NotNormalizedError("cannot normalize the zero vector")
        return cls(tuple(wires), amps / norm)

    @property
    def num_wires(self) -> int:
        return len(self.wires)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def _tensor_view(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.num_wires)


@dataclass(frozen=True, eq=False)
class LocalOperator:
    """A square operator on one or more wires, computational basis, first
    target wire most significant. Checked for unitarity unless flagged off."""

    matrix: np.ndarray
    unitary: bool = True

    def __post_init__(self) -> None:
        mat = np.array(self.matrix, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionMismatchError(f"operator must be square, got {mat.shape}")
        d = mat.shape[0]
        if d & (d - 1) or d == 0:
            raise DimensionMismatchError(f"operator dimension {d} is not a power of two")
        if self.unitary:
            gap = np.max(np.abs(mat.conj().T @ mat - np.eye(d)))
            if gap > DEFAULT_TOLERANCES.unitarity:
                raise DimensionMismatchError(
                    f"operator is not unitary (deviation {gap:.3e})")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """An orthonormal projective basis; row k of ``vectors`` is the ket for
    outcome k."""

    vectors: np.ndarray

    def __post_init__(self) -> None:
        vecs = np.array(self.vectors, dtype=np.complex128)
        if vecs.ndim != 2 or vecs.shape[0] != vecs.shape[1]:
            raise DimensionMismatchError(f"basis must be square, got {vecs.shape}")
        gram = vecs.conj() @ vecs.T
        gap = np.max(np.abs(gram - np.eye(vecs.shape[0])))
        if gap > DEFAULT_TOLERANCES.unitarity:
            raise DimensionMismatchError(f"basis is not orthonormal (deviation {gap:.3e})")
        vecs.setflags(write=False)
        object.__setattr__(self, "vectors", vecs)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]


@dataclass(frozen=True, eq=False)
class SchmidtPair:
    """Schmidt data of a two-qubit split: coefficients sorted small first and
    the matching orthonormal local bases (row 0 pairs with lambda_small)."""

    lambda_small: float
    lambda_large: float
    basis_left: np.ndarray
    basis_right: np.ndarray


@dataclass(frozen=True, eq=False)
class MeasurementOutcome:
    """One branch of a projective measurement. ``state`` is None when the
    branch probability sits below the probability floor."""

    outcome: int
    probability: float
    state: PureState | None


def basis_state(wires: Sequence[str], index: int) -> PureState:
    """Computational basis state |index> over the given wires."""
    n = len(wires)
    amps = np.zeros(2 ** n, dtype=np.complex128)
    amps[index] = 1.0
    return PureState(tuple(wires), amps)


def tensor(left: PureState, right: PureState) -> PureState:
    """Tensor product; wire order is left wires then right wires."""
    overlap = set(left.wires) & set(right.wires)
    if overlap:
        raise DuplicateWireError(f"states share wires {sorted(overlap)!r}")
    return PureState(left.wires + right.wires,
                     np.kron(left.amplitudes, right.amplitudes))


def reorder(state: PureState, wires: Sequence[str]) -> PureState:
    """Reindex a state onto a permutation of its own wires."""
    wires = tuple(wires)
    if set(wires) != set(state.wires) or len(wires) != state.num_wires:
        raise WireMismatchError(
            f"{wires!r} is not a permutation of {state.wires!r}")
    if wires == state.wires:
        return state
    perm = [state.wires.index(w) for w in wires]
    amps = state._tensor_view().transpose(perm).reshape(-1)
    return PureState(wires, amps)


def _split_targets(state: PureState, targets: Sequence[str]) -> tuple[tuple[str, ...], tuple[str, ...], list[int]]:
    targets = tuple(targets)
    if len(set(targets)) != len(targets):
        raise DuplicateWireError(f"duplicate target wires {targets!r}")
    for w in targets:
        if w not in state.wires:
            raise UnknownWireError(f"wire {w!r} not in state over {state.wires!r}")
    rest = tuple(w for w in state.wires if w not in targets)
    perm = [state.wires.index(w) for w in targets + rest]
    return targets, rest, perm


def apply_local(state: PureState, op: LocalOperator | np.ndarray,
                targets: Sequence[str]) -> PureState:
    """Apply an operator to the listed wires, leaving the rest untouched.

    The operator's basis runs lexicographically over the target wires in the
    order given, first target most significant.
    """
    matrix = op.matrix if isinstance(op, LocalOperator) else np.asarray(op, dtype=np.complex128)
    targets, rest, perm = _split_targets(state, targets)
    t = len(targets)
    if matrix.shape != (2 ** t, 2 ** t):
        raise DimensionMismatchError(
            f"operator shape {matrix.shape} does not fit {t} target wires")
    mat = state._tensor_view().transpose(perm).reshape(2 ** t, -1)
    new = (matrix @ mat).reshape((2,) * state.num_wires)
    inverse = np.argsort(perm)
    amps = new.transpose(inverse).reshape(-1)
    return PureState(state.wires, amps)


def measure(state: PureState, basis: MeasurementBasis, targets: Sequence[str],
            *, tol: Tolerances = DEFAULT_TOLERANCES) -> list[MeasurementOutcome]:
    """Projectively measure the listed wires in the given basis.

    Returns one entry per outcome, in basis order, each carrying its
    probability and the collapsed state on the remaining wires (measured
    wires are removed). Branches below the probability floor carry None.
    """
    targets, rest, perm = _split_targets(state, targets)
    t = len(targets)
    if basis.dim != 2 ** t:
        raise DimensionMismatchError(
            f"basis dimension {basis.dim} does not fit {t} target wires")
    mat = state._tensor_view().transpose(perm).reshape(2 ** t, -1)
    outcomes: list[MeasurementOutcome] = []
    for k in range(basis.dim):
        amp = basis.vectors[k].conj() @ mat
        prob = float(np.real(np.vdot(amp, amp)))
        if prob < tol.probability_floor:
            outcomes.append(MeasurementOutcome(k, prob, None))
        else:
            collapsed = PureState(rest, amp / np.sqrt(prob))
            outcomes.append(MeasurementOutcome(k, prob, collapsed))
    return outcomes


def computational_basis(num_wires: int) -> MeasurementBasis:
    return MeasurementBasis(np.eye(2 ** num_wires, dtype=np.complex128))


def _gauge_pair(left: np.ndarray, right: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Rotate the pair phase so the left vector's first significant component
    # is real positive; the right vector absorbs the opposite phase so the
    # product term is unchanged.
    idx = int(np.argmax(np.abs(left) > 1e-12))
    comp = left[idx]
    if abs(comp) <= 1e-12:
        return left, right
    phase = comp / abs(comp)
    return left * np.conj(phase), right * phase


def bipartite_schmidt(state: PureState, left: str, right: str) -> SchmidtPair:
    """Schmidt decomposition of a two-qubit state across (left | right).

    The returned coefficients satisfy lambda_small <= lambda_large and sum
    to 1; basis row k on each side pairs with coefficient k, so the state
    rebuilds as sqrt(l_s)|0'0'> + sqrt(l_l)|1'1'> exactly. The left vectors
    carry the phase gauge (first significant component real positive); each
    right vector absorbs the compensating phase.
    """
    if set(state.wires) != {left, right} or state.num_wires != 2:
        raise WireMismatchError(
            f"state over {state.wires!r} does not split as ({left!r}|{right!r})")
    ordered = reorder(state, (left, right))
    m = ordered.amplitudes.reshape(2, 2)
    u, s, vh = np.linalg.svd(m)
    lam = np.clip(s ** 2, 0.0, 1.0)
    rows_left = []
    rows_right = []
    for k in (1, 0):  # small coefficient first
        ell, r = _gauge_pair(u[:, k], vh[k, :])
        rows_left.append(ell)
        rows_right.append(r)
    return SchmidtPair(float(lam[1]), float(lam[0]),
                       np.array(rows_left), np.array(rows_right))


def fidelity(a: PureState, b: PureState) -> float:
    """Squared overlap |<a|b>|^2; wire order may differ, wire sets may not."""
    if set(a.wires) != set(b.wires):
        raise WireMismatchError(f"wire sets differ: {a.wires!r} vs {b.wires!r}")
    if a.wires != b.wires:
        b = reorder(b, a.wires)
    return float(np.abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def _haar_from_rng(num_wires: int, rng: np.random.Generator,
                   wires: Sequence[str] | None = None) -> PureState:
    dim = 2 ** num_wires
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    if wires is None:
        wires = tuple(f"q{i}" for i in range(num_wires))
    return PureState.normalized(wires, z)


def haar_random_state(num_wires: int, seed: int,
                      wires: Sequence[str] | None = None) -> PureState:
    """Draw a Haar-distributed pure state, reproducibly.

    The vector is built from 2**num_wires independent standard complex
    Gaussians (via numpy's seeded Generator) and normalized; identical seeds
    give bit-identical states.
    """
    if not 1 <= num_wires <= 5:
        raise DimensionMismatchError(f"num_wires must be 1..5, got {num_wires}")
    return _haar_from_rng(num_wires, np.random.default_rng(seed), wires)


def state_to_dict(state: PureState) -> dict:
    return {
        "wires": list(state.wires),
        "amplitudes": [[float(a.real), float(a.imag)] for a in state.amplitudes],
    }


def state_from_dict(data: dict, *, tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[PureState, bool]:
    """Decode the on-disk state format.

    Returns the state and a flag telling whether the amplitudes had to be
    renormalized. Norm deviations beyond ``tol.input_norm`` are rejected.
    """
    try:
        wires = [str(w) for w in data["wires"]]
        pairs = data["amplitudes"]
        amps = np.array([complex(float(re), float(im)) for re, im in pairs],
                        dtype=np.complex128)
    except (KeyError, TypeError, ValueError) as exc:
        raise NotNormalizedError(f"malformed state payload: {exc}") from exc
    if amps.size != 2 ** len(wires):
        raise DimensionMismatchError(
            f"{len(wires)} wires need {2 ** len(wires)} amplitudes, got {amps.size}")
    norm = float(np.linalg.norm(amps))
    if abs(norm - 1.0) > tol.input_norm:
        raise NotNormalizedError(
            f"norm {norm!r} deviates from 1 by more than {tol.input_norm}")
    renormalized = abs(norm - 1.0) > tol.norm
    return PureState(tuple(wires), amps / norm), renormalized


def load_state(path: str | Path, *, tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[PureState, bool]:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return state_from_dict(data, tol=tol)


def save_state(state: PureState, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(state_to_dict(state), fh, indent=2)
        fh.write("\n")
