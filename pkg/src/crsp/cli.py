"""Command-line surface: decompose states, run protocols, sweep and
optimize controller settings, and drive seeded Monte Carlo campaigns.

Exit codes: 0 success, 2 input error, 3 decomposition fidelity miss,
4 unusable channel, 5 invariant failure.

Complex components on the command line use the form ``re`` or ``re+imi``
(for example ``0.6`` or ``0.5-0.5i``); a bare imaginary part like
``0.6i`` is rejected. Targets are comma-separated components, renormalized
silently when within 1e-6 of unit norm and rejected beyond that.

Monte Carlo campaigns derive trial i's randomness from numpy's
``default_rng(seed + i)``; every draw the trial makes (channel, setting,
target) comes from that one stream, so campaigns are reproducible
byte for byte.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import re
import sys
from pathlib import Path

import numpy as np

from .canonical import (canonical_to_dict, decompose, load_channel)
from .errors import ChannelNotControllableError, CrspError
from .optimizer import Optimum, landscape_to_csv, maximize, sweep
from .protocols import (
    CoefficientClass,
    ControllerSetting,
    ProtocolReport,
    TargetQubit,
    TargetTwoQubit,
    report_to_dict,
    report_violations,
    run_crsp_single,
    run_crsp_two,
)
from .qcore import _haar_from_rng, load_state
from .tolerances import DEFAULT_TOLERANCES, Tolerances


class _InputError(Exception):
    """Bad user input; maps to exit code 2."""


_UNSIGNED = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPONENT = re.compile(rf"^([+-]?{_UNSIGNED})(([+-]{_UNSIGNED})i)?$")


def parse_component(text: str) -> complex:
    """Parse one coefficient, ``re`` or ``re+imi``; the real part is
    mandatory."""
    match = _COMPONENT.match(text.strip())
    if not match:
        raise _InputError(f"cannot parse coefficient {text!r} (use re or re+imi)")
    real = float(match.group(1))
    imag = float(match.group(3)) if match.group(3) else 0.0
    return complex(real, imag)


def parse_target(text: str, length: int) -> tuple[np.ndarray, bool]:
    """Parse a comma-separated target of the given length; returns the
    normalized coefficients and whether renormalization was applied."""
    parts = [p for p in text.split(",")]
    if len(parts) != length:
        raise _InputError(f"target needs {length} components, got {len(parts)}")
    vec = np.array([parse_component(p) for p in parts], dtype=np.complex128)
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > DEFAULT_TOLERANCES.input_norm:
        raise _InputError(f"target norm {norm!r} deviates from 1 beyond 1e-6")
    renormalized = abs(norm - 1.0) > DEFAULT_TOLERANCES.norm
    return vec / norm, renormalized


def _write_or_print(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _tolerances(args: argparse.Namespace) -> Tolerances:
    overrides = {}
    for field in ("success", "reconciliation"):
        value = getattr(args, f"tolerance_{field}", None)
        if value is not None:
            overrides[field] = value
    if overrides:
        return dataclasses.replace(DEFAULT_TOLERANCES, **overrides)
    return DEFAULT_TOLERANCES


def _report_csv(report: ProtocolReport) -> str:
    header = ("charlie_outcome,charlie_prob,alice_outcome,alice_prob,"
              "bob_aux_outcome,bob_aux_prob,joint_prob,fidelity_to_target,success")
    lines = [header]
    for b in report.branches:
        cells = [
            str(b.charlie_outcome),
            format(b.charlie_prob, ".12g"),
            str(b.alice_outcome),
            format(b.alice_prob, ".12g"),
            "" if b.bob_aux_outcome is None else str(b.bob_aux_outcome),
            format(b.bob_aux_prob, ".12g"),
            format(b.joint_prob, ".12g"),
            ("" if b.fidelity_to_target is None
             else format(b.fidelity_to_target, ".12g")),
            "true" if b.success else "false",
        ]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def cmd_decompose(args: argparse.Namespace) -> int:
    state, _ = load_state(args.infile)
    if state.num_wires != 3:
        raise _InputError(f"decompose needs a 3-wire state, got {state.num_wires}")
    channel = decompose(state)
    payload = canonical_to_dict(channel)
    if args.out:
        Path(args.out).write_text(_json_text(payload), encoding="utf-8")
    else:
        sys.stdout.write(_json_text(payload))
    print(f"source_fidelity={format(channel.source_fidelity, '.12g')}")
    if channel.source_fidelity < 1.0 - 1e-9:
        return 3
    return 0


def _parse_grid(text: str) -> tuple[int, int]:
    match = re.match(r"^(\d+)x(\d+)$", text)
    if not match:
        raise _InputError(f"grid {text!r} is not of the form TxE, e.g. 181x361")
    t, e = int(match.group(1)), int(match.group(2))
    if t < 2 or e < 2:
        raise _InputError("grid needs at least 2 steps per axis")
    return t, e


def cmd_run(args: argparse.Namespace, protocol: str) -> int:
    tol = _tolerances(args)
    channel = load_channel(args.infile)
    setting = ControllerSetting(args.theta, args.eta)
    length = 2 if protocol == "crsp1" else 4
    coeffs, renormalized = parse_target(args.target, length)
    if protocol == "crsp1":
        report = run_crsp_single(channel, setting, TargetQubit(*coeffs), tol=tol)
    else:
        report = run_crsp_two(channel, setting, TargetTwoQubit(*coeffs), tol=tol)
    if args.format == "csv":
        _write_or_print(_report_csv(report), args.out)
    else:
        payload = report_to_dict(report)
        if renormalized:
            payload["target_renormalized"] = True
        _write_or_print(_json_text(payload), args.out)
    problems = report_violations(report, tol=tol)
    for problem in problems:
        print(f"invariant: {problem}", file=sys.stderr)
    return 5 if problems else 0


def cmd_sweep(args: argparse.Namespace) -> int:
    channel = load_channel(args.infile)
    steps = _parse_grid(args.grid)
    land = sweep(channel, steps[0], steps[1])
    _write_or_print(landscape_to_csv(land), args.out)
    return 0


def _optimum_dict(opt: Optimum) -> dict:
    return {
        "theta_star": opt.theta_star,
        "eta_star": opt.eta_star,
        "p_real": opt.p_real,
        "p_complex": opt.p_complex,
        "iterations": opt.iterations,
    }


def cmd_optimize(args: argparse.Namespace) -> int:
    channel = load_channel(args.infile)
    steps = _parse_grid(args.grid)
    opt = maximize(channel, theta_steps=steps[0], eta_steps=steps[1],
                   refine_tol=args.tolerance_refine)
    _write_or_print(_json_text(_optimum_dict(opt)), args.out)
    return 0


_CLASS_ORDER = (CoefficientClass.REAL, CoefficientClass.COMPLEX_ZETA_ONE,
                CoefficientClass.COMPLEX_GENERAL)


@dataclasses.dataclass(frozen=True)
class CampaignConfig:
    trials: int
    seed: int
    protocol: str
    channel_path: str | None
    class_mix: dict[CoefficientClass, float]
    tol: Tolerances = DEFAULT_TOLERANCES

    def __post_init__(self) -> None:
        if self.trials <= 0:
            raise _InputError("trials must be positive")
        if self.protocol not in ("crsp1", "crsp2"):
            raise _InputError(f"unknown protocol {self.protocol!r}")
        total = sum(self.class_mix.values())
        if abs(total - 1.0) > 1e-9:
            raise _InputError(f"class mix sums to {total!r}, not 1")


@dataclasses.dataclass(frozen=True)
class CampaignSummary:
    trials_run: int
    max_abs_closed_form_gap: float
    conservation_worst: float
    failures: tuple[tuple[int, str], ...]


def _draw_target(rng: np.random.Generator, cls: CoefficientClass,
                 length: int) -> np.ndarray:
    if cls is CoefficientClass.REAL:
        vec = rng.normal(size=length).astype(np.complex128)
    elif cls is CoefficientClass.COMPLEX_ZETA_ONE:
        vec = rng.normal(size=length) + 1j * rng.normal(size=length)
        vec[:2] /= np.linalg.norm(vec[:2]) * np.sqrt(2.0)
        vec[2:] /= np.linalg.norm(vec[2:]) * np.sqrt(2.0)
        return vec
    else:
        vec = rng.normal(size=length) + 1j * rng.normal(size=length)
    return vec / np.linalg.norm(vec)


def _pick_class(rng: np.random.Generator,
                mix: dict[CoefficientClass, float]) -> CoefficientClass:
    draw = rng.random()
    running = 0.0
    for cls in _CLASS_ORDER:
        running += mix.get(cls, 0.0)
        if draw < running:
            return cls
    return next(cls for cls in reversed(_CLASS_ORDER) if mix.get(cls, 0.0) > 0)


def run_campaign(config: CampaignConfig) -> CampaignSummary:
    """Run a seeded verification campaign and aggregate the report
    invariants across trials."""
    fixed = load_channel(config.channel_path) if config.channel_path else None
    worst_gap = 0.0
    worst_conservation = 0.0
    failures: list[tuple[int, str]] = []
    length = 2 if config.protocol == "crsp1" else 4
    for i in range(config.trials):
        rng = np.random.default_rng(config.seed + i)
        try:
            channel = fixed if fixed is not None else decompose(_haar_from_rng(3, rng))
            setting = ControllerSetting(rng.uniform(0.0, np.pi),
                                        rng.uniform(0.0, 2.0 * np.pi))
            cls = _pick_class(rng, config.class_mix)
            coeffs = _draw_target(rng, cls, length)
            if config.protocol == "crsp1":
                report = run_crsp_single(channel, setting, TargetQubit(*coeffs),
                                         tol=config.tol)
            else:
                report = run_crsp_two(channel, setting, TargetTwoQubit(*coeffs),
                                      tol=config.tol)
        except CrspError as exc:
            failures.append((i, f"{type(exc).__name__}: {exc}"))
            continue
        gap = abs(report.enumerated_success - report.closed_form_success)
        conservation = abs(sum(b.joint_prob for b in report.branches) - 1.0)
        worst_gap = max(worst_gap, gap)
        worst_conservation = max(worst_conservation, conservation)
        for problem in report_violations(report, tol=config.tol):
            failures.append((i, problem))
    failures.sort(key=lambda item: item[0])
    return CampaignSummary(
        trials_run=config.trials,
        max_abs_closed_form_gap=worst_gap,
        conservation_worst=worst_conservation,
        failures=tuple(failures))


def _default_mix(protocol: str) -> dict[CoefficientClass, float]:
    if protocol == "crsp1":
        return {CoefficientClass.REAL: 0.5, CoefficientClass.COMPLEX_GENERAL: 0.5}
    third = 1.0 / 3.0
    return {CoefficientClass.REAL: third,
            CoefficientClass.COMPLEX_ZETA_ONE: third,
            CoefficientClass.COMPLEX_GENERAL: 1.0 - 2.0 * third}


def cmd_montecarlo(args: argparse.Namespace) -> int:
    config = CampaignConfig(
        trials=args.trials, seed=args.seed, protocol=args.protocol,
        channel_path=args.infile, class_mix=_default_mix(args.protocol),
        tol=_tolerances(args))
    summary = run_campaign(config)
    payload = {
        "trials_run": summary.trials_run,
        "max_abs_closed_form_gap": summary.max_abs_closed_form_gap,
        "conservation_worst": summary.conservation_worst,
        "failures": [[i, reason] for i, reason in summary.failures],
    }
    _write_or_print(_json_text(payload), args.out)
    return 5 if summary.failures else 0


def _add_tolerance_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tolerance-success", type=float, default=None,
                        dest="tolerance_success",
                        help="fidelity slack for branch success (default 1e-9)")
    parser.add_argument("--tolerance-reconciliation", type=float, default=None,
                        dest="tolerance_reconciliation",
                        help="closed-form gap tolerance (default 1e-9)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crsp",
        description="Simulate and verify controlled remote state preparation "
                    "over pure three-qubit channels.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="reduce a 3-qubit state file to "
                                         "canonical channel coefficients")
    p.add_argument("--in", dest="infile", required=True, help="state JSON file")
    p.add_argument("--out", default=None, help="canonical JSON output path")

    for name in ("run1", "run2"):
        p = sub.add_parser(name, help=f"run the {'single' if name == 'run1' else 'two'}"
                                      "-qubit protocol and report all branches")
        p.add_argument("--in", dest="infile", required=True, help="channel JSON file")
        p.add_argument("--theta", type=float, required=True)
        p.add_argument("--eta", type=float, required=True)
        p.add_argument("--target", required=True,
                       help="comma-separated coefficients, re or re+imi each")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", default=None)
        _add_tolerance_flags(p)

    p = sub.add_parser("sweep", help="landscape CSV over a theta x eta grid")
    p.add_argument("--in", dest="infile", required=True, help="channel JSON file")
    p.add_argument("--grid", default="181x361", help="TxE grid, default 181x361")
    p.add_argument("--out", default=None)

    p = sub.add_parser("optimize", help="maximize the success probability "
                                        "over controller settings")
    p.add_argument("--in", dest="infile", required=True, help="channel JSON file")
    p.add_argument("--grid", default="181x361", help="TxE coarse grid")
    p.add_argument("--tolerance-refine", type=float, default=1e-7,
                   dest="tolerance_refine", help="refinement step floor")
    p.add_argument("--out", default=None)

    p = sub.add_parser("montecarlo", help="seeded verification campaign")
    p.add_argument("protocol", choices=("crsp1", "crsp2"))
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--in", dest="infile", default=None,
                   help="fixed channel file (default: fresh random channel "
                        "per trial)")
    p.add_argument("--out", default=None)
    _add_tolerance_flags(p)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "decompose":
            return cmd_decompose(args)
        if args.command == "run1":
            return cmd_run(args, "crsp1")
        if args.command == "run2":
            return cmd_run(args, "crsp2")
        if args.command == "sweep":
            return cmd_sweep(args)
        if args.command == "optimize":
            return cmd_optimize(args)
        return cmd_montecarlo(args)
    except ChannelNotControllableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CrspError, OSError, ValueError, KeyError,
            json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
