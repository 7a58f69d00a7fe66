"""Branch-exhaustive execution of the two preparation protocols.

Both protocols run on a channel already reduced to canonical coefficients.
The controller measures wire ``c`` in a tunable basis, the sender measures
in a target-dependent basis built on the Schmidt vectors of the collapsed
pair, and the receiver applies an aux-assisted correction. Every branch of
the measurement tree is enumerated into a :class:`ProtocolReport`, and the
enumerated success mass is reconciled against the closed-form expression
for the target's coefficient class.

Final receiver states are expressed in the post-correction computational
frame (the Schmidt frame relabeled), which is the frame the corrections
are defined in; fidelities compare against the phase-canonicalized target
in that same frame.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .canonical import CanonicalThreeQubit, canonical_state
from .errors import (
    ChannelNotControllableError,
    DegenerateSchmidtError,
    DegenerateTargetError,
    NoCorrectionExistsError,
    NotNormalizedError,
    NotRealCoefficientsError,
)
from .qcore import (
    LocalOperator,
    MeasurementBasis,
    PureState,
    bipartite_schmidt,
    measure,
    state_to_dict,
    tensor,
)
from .tolerances import DEFAULT_TOLERANCES, Tolerances


class CoefficientClass(Enum):
    """Target classification after global-phase canonicalization."""

    REAL = "Real"
    COMPLEX_GENERAL = "ComplexGeneral"
    COMPLEX_ZETA_ONE = "ComplexZetaOne"


def _canonical_coeffs(values: Sequence[complex]) -> np.ndarray:
    vec = np.asarray(values, dtype=np.complex128)
    for comp in vec:
        if abs(comp) > 1e-12:
            return vec * (np.conj(comp) / abs(comp))
    raise NotNormalizedError("target has no significant coefficient")


@dataclass(frozen=True)
class ControllerSetting:
    """The controller's measurement angles, theta in [0, pi] and eta in
    [0, 2*pi]."""

    theta: float
    eta: float

    def __post_init__(self) -> None:
        slack = 1e-9
        if not (-slack <= self.theta <= np.pi + slack):
            raise ValueError(f"theta {self.theta!r} outside [0, pi]")
        if not (-slack <= self.eta <= 2 * np.pi + slack):
            raise ValueError(f"eta {self.eta!r} outside [0, 2*pi]")
        object.__setattr__(self, "theta", float(np.clip(self.theta, 0.0, np.pi)))
        object.__setattr__(self, "eta", float(np.clip(self.eta, 0.0, 2 * np.pi)))


@dataclass(frozen=True)
class TargetQubit:
    alpha: complex
    beta: complex

    def __post_init__(self) -> None:
        total = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(total - 1.0) > 1e-10:
            raise NotNormalizedError(f"target norm^2 = {total!r}")

    @classmethod
    def from_coefficients(cls, alpha: complex, beta: complex) -> "TargetQubit":
        norm = np.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
        if norm <= 1e-12:
            raise NotNormalizedError("target coefficients are all zero")
        return cls(complex(alpha) / norm, complex(beta) / norm)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=np.complex128)


@dataclass(frozen=True)
class TargetTwoQubit:
    alpha: complex
    beta: complex
    gamma: complex
    delta: complex

    def __post_init__(self) -> None:
        total = float(np.sum(np.abs(self.coefficients) ** 2))
        if abs(total - 1.0) > 1e-10:
            raise NotNormalizedError(f"target norm^2 = {total!r}")

    @classmethod
    def from_coefficients(cls, alpha: complex, beta: complex,
                          gamma: complex, delta: complex) -> "TargetTwoQubit":
        vec = np.array([alpha, beta, gamma, delta], dtype=np.complex128)
        norm = np.linalg.norm(vec)
        if norm <= 1e-12:
            raise NotNormalizedError("target coefficients are all zero")
        vec = vec / norm
        return cls(*map(complex, vec))

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma, self.delta],
                        dtype=np.complex128)

    @property
    def zeta(self) -> float:
        """Weight ratio between the upper and lower coefficient blocks."""
        top = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if top <= 1e-10:
            raise DegenerateTargetError(
                "upper coefficient block is empty; use the single-qubit protocol")
        bottom = abs(self.gamma) ** 2 + abs(self.delta) ** 2
        return float(np.sqrt(bottom / top))


@dataclass(frozen=True, eq=False)
class BranchRecord:
    """One leaf of the outcome tree. Branches that terminate before the
    receiver's aux measurement (no correction, or negligible conditional
    probability) carry ``bob_aux_outcome=None`` with the whole conditional
    mass assigned at the sender's node."""

    charlie_outcome: int
    charlie_prob: float
    alice_outcome: int
    alice_prob: float
    bob_aux_outcome: int | None
    bob_aux_prob: float
    joint_prob: float
    bob_final: PureState | None
    fidelity_to_target: float | None
    success: bool


@dataclass(frozen=True, eq=False)
class ProtocolReport:
    protocol: str
    coefficient_class: CoefficientClass
    p0: float
    p1: float
    lambda00: float
    lambda01: float
    lambda10: float
    lambda11: float
    branches: tuple[BranchRecord, ...]
    enumerated_success: float
    closed_form_success: float
    cbits_used: int


def classify(target: TargetQubit | TargetTwoQubit, *,
             tol: Tolerances = DEFAULT_TOLERANCES) -> CoefficientClass:
    """Coefficient class of a target after removing its global phase."""
    coeffs = _canonical_coeffs(target.coefficients)
    if float(np.max(np.abs(coeffs.imag))) <= tol.real_class:
        return CoefficientClass.REAL
    if isinstance(target, TargetTwoQubit):
        top = abs(target.alpha) ** 2 + abs(target.beta) ** 2
        if top > 1e-10 and abs(target.zeta - 1.0) <= tol.zeta_one:
            return CoefficientClass.COMPLEX_ZETA_ONE
    return CoefficientClass.COMPLEX_GENERAL


def charlie_basis(setting: ControllerSetting) -> MeasurementBasis:
    half = setting.theta / 2
    phase = np.exp(1j * setting.eta)
    return MeasurementBasis(np.array([
        [np.cos(half), phase * np.sin(half)],
        [np.sin(half), -phase * np.cos(half)],
    ]))


def charlie_closed_form(channel: CanonicalThreeQubit,
                        setting: ControllerSetting) -> tuple[float, float]:
    """Outcome probabilities of the controller's measurement, in closed
    form from the canonical coefficients."""
    a0, a1 = channel.a[0], channel.a[1]
    p0 = (np.sin(setting.theta / 2) ** 2
          + a0 ** 2 * np.cos(setting.theta)
          + a0 * a1 * np.cos(channel.mu - setting.eta) * np.sin(setting.theta))
    return float(p0), float(1.0 - p0)


def alice_basis_single(target: TargetQubit,
                       schmidt_left_basis: np.ndarray) -> MeasurementBasis:
    alpha, beta = _canonical_coeffs(target.coefficients)
    low, high = schmidt_left_basis[0], schmidt_left_basis[1]
    return MeasurementBasis(np.array([
        alpha * low + beta * high,
        np.conj(beta) * low - np.conj(alpha) * high,
    ]))


def _schmidt_products(schmidt_left_basis: np.ndarray) -> list[np.ndarray]:
    eye = np.eye(2)
    return [np.kron(schmidt_left_basis[s], eye[t])
            for s in range(2) for t in range(2)]


def alice_basis_two_real(target: TargetTwoQubit,
                         schmidt_left_basis: np.ndarray, *,
                         tol: Tolerances = DEFAULT_TOLERANCES) -> MeasurementBasis:
    coeffs = _canonical_coeffs(target.coefficients)
    if float(np.max(np.abs(coeffs.imag))) > tol.real_class:
        raise NotRealCoefficientsError(
            "two-qubit real basis needs real coefficients after phase removal")
    al, be, ga, de = coeffs.real
    rows = np.array([
        [al, be, ga, de],
        [be, -al, -de, ga],
        [ga, de, -al, -be],
        [de, -ga, be, -al],
    ])
    prods = _schmidt_products(schmidt_left_basis)
    return MeasurementBasis(np.array(
        [sum(rows[j, m] * prods[m] for m in range(4)) for j in range(4)]))


def alice_basis_two_complex(target: TargetTwoQubit,
                            schmidt_left_basis: np.ndarray) -> MeasurementBasis:
    coeffs = _canonical_coeffs(target.coefficients)
    top = float(np.sum(np.abs(coeffs[:2]) ** 2))
    bottom = float(np.sum(np.abs(coeffs[2:]) ** 2))
    if top <= 1e-10 or bottom <= 1e-10:
        raise DegenerateTargetError(
            "a coefficient block is empty; the weighted rows collapse")
    zeta = np.sqrt(bottom / top)
    al, be, ga, de = coeffs
    ac, bc, gc, dc = np.conj(coeffs)
    zi = 1.0 / zeta
    rows = np.array([
        [ac, -bc, gc, -dc],
        [zeta * ac, -zeta * bc, -zi * gc, zi * dc],
        [-be, -al, -de, -ga],
        [-zeta * be, -zeta * al, zi * de, zi * ga],
    ])
    prods = _schmidt_products(schmidt_left_basis)
    return MeasurementBasis(np.array(
        [sum(rows[j, m] * prods[m] for m in range(4)) for j in range(4)]))


def _balance_block(lambdas: tuple[float, float]) -> tuple[float, float]:
    lam_small, lam_large = lambdas
    if lam_large <= 1e-12:
        raise DegenerateSchmidtError("largest Schmidt weight is numerically zero")
    if lam_small > lam_large + 1e-12:
        raise DegenerateSchmidtError("Schmidt weights are out of order")
    ratio = min(lam_small / lam_large, 1.0)
    return float(np.sqrt(ratio)), float(np.sqrt(1.0 - ratio))


def bob_correction_single(alice_outcome: int,
                          lambdas: tuple[float, float]) -> LocalOperator:
    """Aux-assisted correction on (receiver qubit, aux), defined by its
    action: the aux=0 image of the collapsed input carries the target with
    amplitude sqrt(lambda_small)."""
    root, comp = _balance_block(lambdas)
    if alice_outcome == 0:
        mat = np.array([
            [1, 0, 0, 0],
            [0, 1, 0, 0],
            [0, 0, root, comp],
            [0, 0, comp, -root],
        ])
    elif alice_outcome == 1:
        mat = np.array([
            [0, 0, -root, comp],
            [0, 1, 0, 0],
            [1, 0, 0, 0],
            [0, 0, comp, root],
        ])
    else:
        raise NoCorrectionExistsError(f"no single-qubit correction for outcome "
                                      f"{alice_outcome}")
    return LocalOperator(mat)


_A_QUARTER = np.array([[0.0, -1.0], [1.0, 0.0]])
_B_QUARTER = np.array([[0.0, 1.0], [-1.0, 0.0]])
_Z = np.diag([1.0, -1.0])
_X = np.array([[0.0, 1.0], [1.0, 0.0]])


def bob_correction_two(alice_outcome: int, lambdas: tuple[float, float],
                       coefficient_class: CoefficientClass) -> LocalOperator:
    """Correction on (receiver qubit, pair qubit, aux). Composed of the
    outcome's sign/permutation pre-operation and the amplitude-balancing
    block; complex-class outcomes 2 and 3 admit no correction."""
    root, comp = _balance_block(lambdas)
    balance = np.array([[root, comp], [comp, -root]])
    eye2, eye4 = np.eye(2), np.eye(4)
    low = np.block([[eye4, np.zeros((4, 4))],
                    [np.zeros((4, 4)), np.kron(eye2, balance)]])
    high = np.block([[np.kron(eye2, balance), np.zeros((4, 4))],
                     [np.zeros((4, 4)), eye4]])
    if coefficient_class is CoefficientClass.REAL:
        if alice_outcome == 0:
            mat = low
        elif alice_outcome == 1:
            perm = np.block([[_A_QUARTER, np.zeros((2, 2))],
                             [np.zeros((2, 2)), _B_QUARTER]])
            mat = low @ np.kron(perm, eye2)
        elif alice_outcome == 2:
            perm = np.diag([-1.0, -1.0, 1.0, 1.0]) @ np.kron(_X, eye2)
            mat = high @ np.kron(perm, eye2)
        elif alice_outcome == 3:
            perm = np.kron(_X, eye2) @ np.kron(eye2, _A_QUARTER)
            mat = high @ np.kron(perm, eye2)
        else:
            raise NoCorrectionExistsError(f"no correction for outcome "
                                          f"{alice_outcome}")
    else:
        if alice_outcome == 0:
            mat = low @ np.kron(np.kron(eye2, _Z), eye2)
        elif alice_outcome == 1:
            mat = low @ np.kron(np.kron(_Z, _Z), eye2)
        else:
            raise NoCorrectionExistsError(
                "complex-class outcomes beyond 1 are unrecoverable")
    return LocalOperator(mat)


def _check_controllable(channel: CanonicalThreeQubit) -> None:
    a = channel.a
    if a[0] ** 2 <= 1e-10 or (a[2] ** 2 + a[3] ** 2 + a[4] ** 2) <= 1e-10:
        raise ChannelNotControllableError(
            "controller wire carries no usable branching "
            f"(a = {tuple(round(v, 6) for v in a)})")


def _closed_form(coefficient_class: CoefficientClass, two_qubit: bool,
                 p0: float, lam00: float, p1: float, lam10: float) -> float:
    base = p0 * lam00 + p1 * lam10
    if coefficient_class is CoefficientClass.REAL:
        return 2.0 * base
    if two_qubit and coefficient_class is CoefficientClass.COMPLEX_GENERAL:
        return 0.5 * base
    return base


def _alice_terminal(k: int, p_k: float, j: int, q_j: float) -> BranchRecord:
    return BranchRecord(
        charlie_outcome=k, charlie_prob=p_k,
        alice_outcome=j, alice_prob=q_j,
        bob_aux_outcome=None, bob_aux_prob=1.0,
        joint_prob=p_k * q_j, bob_final=None,
        fidelity_to_target=None, success=False)


def _descend_aux(k: int, p_k: float, j: int, q_j: float,
                 rotated: np.ndarray, correction: LocalOperator,
                 final_wires: tuple[str, ...], target_coeffs: np.ndarray,
                 tol: Tolerances) -> list[BranchRecord]:
    fed = np.kron(rotated, [1.0, 0.0])
    out = correction.matrix @ fed
    records = []
    for aux in (0, 1):
        sub = out[aux::2]
        r_m = float(np.real(np.vdot(sub, sub)))
        if r_m < tol.probability_floor:
            records.append(BranchRecord(
                charlie_outcome=k, charlie_prob=p_k,
                alice_outcome=j, alice_prob=q_j,
                bob_aux_outcome=aux, bob_aux_prob=r_m,
                joint_prob=p_k * q_j * r_m, bob_final=None,
                fidelity_to_target=None, success=False))
            continue
        final = PureState(final_wires, sub / np.sqrt(r_m))
        fid = float(np.abs(np.vdot(target_coeffs, final.amplitudes)) ** 2)
        records.append(BranchRecord(
            charlie_outcome=k, charlie_prob=p_k,
            alice_outcome=j, alice_prob=q_j,
            bob_aux_outcome=aux, bob_aux_prob=r_m,
            joint_prob=p_k * q_j * r_m, bob_final=final,
            fidelity_to_target=fid, success=fid >= 1.0 - tol.success))
    return records


def run_crsp_single(channel: CanonicalThreeQubit, setting: ControllerSetting,
                    target: TargetQubit, *,
                    tol: Tolerances = DEFAULT_TOLERANCES) -> ProtocolReport:
    """Run the single-qubit protocol and enumerate its full outcome tree."""
    _check_controllable(channel)
    coefficient_class = classify(target, tol=tol)
    target_coeffs = _canonical_coeffs(target.coefficients)
    state = canonical_state(channel)
    charlie = measure(state, charlie_basis(setting), ("c",), tol=tol)
    branches: list[BranchRecord] = []
    lams = [(0.0, 0.0), (0.0, 0.0)]
    for k, outcome in enumerate(charlie):
        p_k = outcome.probability
        if outcome.state is None:
            branches.append(_alice_terminal(k, p_k, 0, 1.0))
            continue
        pair = bipartite_schmidt(outcome.state, "a", "b")
        lams[k] = (pair.lambda_small, pair.lambda_large)
        basis = alice_basis_single(target, pair.basis_left)
        rotate = np.conj(pair.basis_right)
        for j, alice in enumerate(measure(outcome.state, basis, ("a",), tol=tol)):
            q_j = alice.probability
            if alice.state is None:
                branches.append(_alice_terminal(k, p_k, j, q_j))
                continue
            rotated = rotate @ alice.state.amplitudes
            correction = bob_correction_single(j, lams[k])
            branches.extend(_descend_aux(k, p_k, j, q_j, rotated, correction,
                                         ("b",), target_coeffs, tol))
    p0, p1 = charlie[0].probability, charlie[1].probability
    enumerated = sum(b.joint_prob for b in branches if b.success)
    closed = _closed_form(coefficient_class, False, p0, lams[0][0], p1, lams[1][0])
    return ProtocolReport(
        protocol="crsp1", coefficient_class=coefficient_class,
        p0=p0, p1=p1,
        lambda00=lams[0][0], lambda01=lams[0][1],
        lambda10=lams[1][0], lambda11=lams[1][1],
        branches=tuple(branches),
        enumerated_success=float(enumerated), closed_form_success=float(closed),
        cbits_used=2)


def bell_pair(wires: tuple[str, str] = ("ap", "bp")) -> PureState:
    return PureState(wires, np.array([1, 0, 0, 1], dtype=np.complex128) / np.sqrt(2))


def run_crsp_two(channel: CanonicalThreeQubit, setting: ControllerSetting,
                 target: TargetTwoQubit, *,
                 tol: Tolerances = DEFAULT_TOLERANCES) -> ProtocolReport:
    """Run the two-qubit protocol (channel plus a shared maximally
    entangled pair) and enumerate its full outcome tree."""
    _check_controllable(channel)
    coefficient_class = classify(target, tol=tol)
    target_coeffs = _canonical_coeffs(target.coefficients)
    if coefficient_class is not CoefficientClass.REAL:
        top = float(np.sum(np.abs(target_coeffs[:2]) ** 2))
        bottom = float(np.sum(np.abs(target_coeffs[2:]) ** 2))
        if top <= 1e-10 or bottom <= 1e-10:
            raise DegenerateTargetError(
                "a coefficient block is empty; use the single-qubit protocol")
    state = canonical_state(channel)
    charlie = measure(state, charlie_basis(setting), ("c",), tol=tol)
    branches: list[BranchRecord] = []
    lams = [(0.0, 0.0), (0.0, 0.0)]
    correctable = ((0, 1, 2, 3) if coefficient_class is CoefficientClass.REAL
                   else (0, 1))
    for k, outcome in enumerate(charlie):
        p_k = outcome.probability
        if outcome.state is None:
            branches.append(_alice_terminal(k, p_k, 0, 1.0))
            continue
        pair = bipartite_schmidt(outcome.state, "a", "b")
        lams[k] = (pair.lambda_small, pair.lambda_large)
        if coefficient_class is CoefficientClass.REAL:
            basis = alice_basis_two_real(target, pair.basis_left, tol=tol)
        else:
            basis = alice_basis_two_complex(target, pair.basis_left)
        joint = tensor(outcome.state, bell_pair())
        rotate = np.kron(np.conj(pair.basis_right), np.eye(2))
        for j, alice in enumerate(measure(joint, basis, ("a", "ap"), tol=tol)):
            q_j = alice.probability
            if alice.state is None or j not in correctable:
                branches.append(_alice_terminal(k, p_k, j, q_j))
                continue
            rotated = rotate @ alice.state.amplitudes
            correction = bob_correction_two(j, lams[k], coefficient_class)
            branches.extend(_descend_aux(k, p_k, j, q_j, rotated, correction,
                                         ("b", "bp"), target_coeffs, tol))
    p0, p1 = charlie[0].probability, charlie[1].probability
    enumerated = sum(b.joint_prob for b in branches if b.success)
    closed = _closed_form(coefficient_class, True, p0, lams[0][0], p1, lams[1][0])
    return ProtocolReport(
        protocol="crsp2", coefficient_class=coefficient_class,
        p0=p0, p1=p1,
        lambda00=lams[0][0], lambda01=lams[0][1],
        lambda10=lams[1][0], lambda11=lams[1][1],
        branches=tuple(branches),
        enumerated_success=float(enumerated), closed_form_success=float(closed),
        cbits_used=3)


def report_violations(report: ProtocolReport, *,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> list[str]:
    """Check a report's internal invariants; returns a list of violation
    messages, empty when the report is consistent."""
    problems = []
    total = sum(b.joint_prob for b in report.branches)
    if abs(total - 1.0) > tol.reconciliation:
        problems.append(f"branch probabilities sum to {total!r}, not 1")
    for b in report.branches:
        expected = b.charlie_prob * b.alice_prob * b.bob_aux_prob
        if abs(b.joint_prob - expected) > 1e-12:
            problems.append(
                f"branch ({b.charlie_outcome},{b.alice_outcome},"
                f"{b.bob_aux_outcome}) joint {b.joint_prob!r} != product")
        if b.success and (b.fidelity_to_target is None
                          or b.fidelity_to_target < 1.0 - tol.success):
            problems.append(
                f"branch ({b.charlie_outcome},{b.alice_outcome},"
                f"{b.bob_aux_outcome}) marked success at fidelity "
                f"{b.fidelity_to_target!r}")
    enumerated = sum(b.joint_prob for b in report.branches if b.success)
    if abs(enumerated - report.enumerated_success) > 1e-12:
        problems.append("enumerated_success does not match its branches")
    gap = abs(report.enumerated_success - report.closed_form_success)
    if gap > tol.reconciliation:
        problems.append(f"closed-form gap {gap:.3e} exceeds tolerance")
    wanted = 2 if report.protocol == "crsp1" else 3
    if report.cbits_used != wanted:
        problems.append(f"{report.protocol} reports {report.cbits_used} cbits")
    return problems


def report_to_dict(report: ProtocolReport) -> dict:
    branches = []
    for b in report.branches:
        branches.append({
            "charlie_outcome": b.charlie_outcome,
            "charlie_prob": b.charlie_prob,
            "alice_outcome": b.alice_outcome,
            "alice_prob": b.alice_prob,
            "bob_aux_outcome": b.bob_aux_outcome,
            "bob_aux_prob": b.bob_aux_prob,
            "joint_prob": b.joint_prob,
            "bob_final": None if b.bob_final is None else state_to_dict(b.bob_final),
            "fidelity_to_target": b.fidelity_to_target,
            "success": b.success,
        })
    return {
        "protocol": report.protocol,
        "class": report.coefficient_class.value,
        "p": [report.p0, report.p1],
        "lambda": [[report.lambda00, report.lambda01],
                   [report.lambda10, report.lambda11]],
        "branches": branches,
        "enumerated_success": report.enumerated_success,
        "closed_form_success": report.closed_form_success,
        "cbits": report.cbits_used,
    }
