"""Command-line front end.

Four subcommands: frontier (Pareto endpoints plus the max-adversary
curve on a grid), policy (one policy with its analytic errors),
simulate (seeded Monte Carlo of one instance), and study (the
calibration benefit study). Every run writes a CSV and a JSON manifest
holding the fully resolved configuration; re-running with the manifest
as the config reproduces the CSV byte for byte.

Exit codes: 0 success (infeasible policy targets included), 2
configuration error, 3 numerical accuracy failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

from . import __version__
from .model import (
    ConfigurationError,
    Decision,
    Instance,
    ReviewerProfile,
    ScorePair,
    Population,
)
from .frontier import (
    Infeasible,
    SegmentKind,
    frontier,
    instance_geometry,
    max_adversary_error_curve,
)
from .mechanism import AccuracyError, Policy, alg1_policy, alg3_policy
from .adversary import per_instance_errors
from .simlab import StudyConfig, run_calibration_study, simulate_instance

_INSTANCE_DEFAULTS = {
    "instance.a1": 1.0,
    "instance.b1": 0.0,
    "instance.a2": 1.0,
    "instance.b2": 1.0,
    "instance.sigma2": 0.0,
    "instance.s1": 0.5,
    "instance.s2": 1.0,
}

_DEFAULTS = {
    "frontier": {**_INSTANCE_DEFAULTS, "grid": 101},
    "policy": {**_INSTANCE_DEFAULTS, "ec": 0.2},
    "simulate": {**_INSTANCE_DEFAULTS, "ec": 0.2, "simulate.n": 200_000, "seed": 0},
    "study": {
        "study.n_papers": 100,
        "study.n_reviewers": 100,
        "study.reviews_per_paper": 3,
        "study.slope_rate": 1.0,
        "study.bias_variance": 0.5,
        "study.noise_variances": [0.25, 0.5, 1.0],
        "study.iterations": 100,
        "study.accept_top": 25,
        "study.messy_lo": 11,
        "study.messy_hi": 40,
        "seed": 0,
    },
}


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}")
    if not isinstance(data, dict):
        raise ConfigurationError("config must be a JSON object of flat keys")
    if data.get("schema") == "privcal.manifest.v1" and "config" in data:
        return dict(data["config"])
    return data


def _resolve(command: str, args: argparse.Namespace) -> dict:
    cfg = dict(_DEFAULTS[command])
    if args.config:
        file_cfg = _load_config(args.config)
        for key, value in file_cfg.items():
            if key not in cfg:
                raise ConfigurationError(f"unknown config key for {command}: {key}")
            cfg[key] = value
    for flag in ("seed", "ec", "grid"):
        value = getattr(args, flag, None)
        if value is not None:
            if flag not in cfg:
                raise ConfigurationError(f"--{flag} is not accepted by {command}")
            cfg[flag] = value
    if getattr(args, "mode", None) is not None and "instance.sigma2" in cfg:
        noisy = cfg["instance.sigma2"] > 0.0
        if (args.mode == "noisy") != noisy:
            raise ConfigurationError(
                f"--mode {args.mode} conflicts with instance.sigma2="
                f"{cfg['instance.sigma2']}"
            )
    return cfg


def _build_instance(cfg: dict) -> Instance:
    try:
        return Instance(
            ReviewerProfile.affine(float(cfg["instance.a1"]), float(cfg["instance.b1"])),
            ReviewerProfile.affine(float(cfg["instance.a2"]), float(cfg["instance.b2"])),
            float(cfg["instance.sigma2"]),
            ScorePair(float(cfg["instance.s1"]), float(cfg["instance.s2"])),
        )
    except KeyError as exc:
        raise ConfigurationError(f"missing required config field: {exc.args[0]}")


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _write_manifest(
    out: Path, command: str, cfg: dict, started: float, csv_path: Path
) -> Path:
    digest = hashlib.sha256(csv_path.read_bytes()).hexdigest()
    manifest = {
        "schema": "privcal.manifest.v1",
        "command": command,
        "version": __version__,
        "seed": cfg.get("seed"),
        "config": cfg,
        "duration_seconds": time.monotonic() - started,
        "outputs": {csv_path.name: {"sha256": digest}},
    }
    path = out / f"{command}_manifest.json"
    path.write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return path


def _forced_name(policy) -> str:
    if isinstance(policy, Policy) and policy.forced is not None:
        return "paper1" if policy.forced is Decision.PAPER1 else "paper2"
    return ""


def cmd_frontier(cfg: dict, out: Path) -> list[list[str]]:
    inst = _build_instance(cfg)
    seg = frontier(inst)
    schema = "privcal.frontier.v1"
    rows = []
    if seg.kind is SegmentKind.POINT:
        rows.append([schema, "point", _fmt(seg.start.ec), _fmt(seg.start.ea)])
        return rows
    rows.append([schema, "start", _fmt(seg.start.ec), _fmt(seg.start.ea)])
    rows.append([schema, "end", _fmt(seg.end.ec), _fmt(seg.end.ea)])
    geom = instance_geometry(inst)
    lo = seg.min_feasible_ec
    hi = geom.ec_intercept
    count = int(cfg["grid"])
    if count < 2:
        raise ConfigurationError("grid must be at least 2")
    for i in range(count):
        ec = lo + (hi - lo) * i / (count - 1)
        ea = max_adversary_error_curve(inst, ec)
        if isinstance(ea, Infeasible):
            # Only possible through floating roundoff at the range ends.
            ea = 0.0
        rows.append([schema, "curve", _fmt(ec), _fmt(ea)])
    return rows


_FRONTIER_HEADER = ["schema", "row_type", "ec", "ea"]
_POLICY_HEADER = [
    "schema",
    "feasible",
    "q1",
    "q2",
    "forced",
    "ec",
    "ea",
    "min_feasible_ec",
]


def _policy_rows(inst: Instance, ec: float) -> list[list[str]]:
    schema = "privcal.policy.v1"
    result = alg1_policy(inst, ec) if inst.noiseless else alg3_policy(inst, ec)
    if isinstance(result, Infeasible):
        return [
            [schema, "false", "", "", "", "", "", _fmt(result.min_feasible_ec)]
        ]
    errs = per_instance_errors(inst, result)
    return [
        [
            schema,
            "true",
            _fmt(result.q1),
            _fmt(result.q2),
            _forced_name(result),
            _fmt(errs.ec),
            _fmt(errs.ea),
            "",
        ]
    ]


def cmd_policy(cfg: dict, out: Path) -> list[list[str]]:
    return _policy_rows(_build_instance(cfg), float(cfg["ec"]))


_SIMULATE_HEADER = [
    "schema",
    "feasible",
    "n",
    "seed",
    "q1",
    "q2",
    "ec_analytic",
    "ea_analytic",
    "ec_empirical",
    "ea_empirical",
    "stderr_ec",
    "stderr_ea",
]


def cmd_simulate(cfg: dict, out: Path) -> list[list[str]]:
    inst = _build_instance(cfg)
    ec = float(cfg["ec"])
    n = int(cfg["simulate.n"])
    seed = int(cfg["seed"])
    schema = "privcal.simulate.v1"
    result = alg1_policy(inst, ec) if inst.noiseless else alg3_policy(inst, ec)
    if isinstance(result, Infeasible):
        return [
            [schema, "false", str(n), str(seed)] + [""] * 8
        ]
    errs = per_instance_errors(inst, result)
    sim = simulate_instance(inst, result, n, seed)
    return [
        [
            schema,
            "true",
            str(n),
            str(seed),
            _fmt(result.q1),
            _fmt(result.q2),
            _fmt(errs.ec),
            _fmt(errs.ea),
            _fmt(sim.empirical.ec),
            _fmt(sim.empirical.ea),
            _fmt(sim.stderr_ec),
            _fmt(sim.stderr_ea),
        ]
    ]


_STUDY_HEADER = [
    "schema",
    "method",
    "noise_variance",
    "mean_kendall_tau",
    "se_kendall_tau",
    "mean_messy_middle",
    "se_messy_middle",
]


def cmd_study(cfg: dict, out: Path) -> list[list[str]]:
    variances = cfg["study.noise_variances"]
    if not isinstance(variances, (list, tuple)) or not variances:
        raise ConfigurationError("study.noise_variances must be a nonempty list")
    study_cfg = StudyConfig(
        n_papers=int(cfg["study.n_papers"]),
        n_reviewers=int(cfg["study.n_reviewers"]),
        reviews_per_paper=int(cfg["study.reviews_per_paper"]),
        slope_rate=float(cfg["study.slope_rate"]),
        bias_variance=float(cfg["study.bias_variance"]),
        noise_variances=tuple(float(v) for v in variances),
        iterations=int(cfg["study.iterations"]),
        accept_top=int(cfg["study.accept_top"]),
        messy_lo=int(cfg["study.messy_lo"]),
        messy_hi=int(cfg["study.messy_hi"]),
        seed=int(cfg["seed"]),
    )
    result = run_calibration_study(study_cfg)
    schema = "privcal.study.v1"
    rows = []
    for method, var in sorted(result.cells):
        cell = result.cells[(method, var)]
        rows.append(
            [
                schema,
                method,
                _fmt(var),
                _fmt(cell.mean_kendall_tau),
                _fmt(cell.se_kendall_tau),
                _fmt(cell.mean_messy_middle),
                _fmt(cell.se_messy_middle),
            ]
        )
    return rows


_COMMANDS = {
    "frontier": (cmd_frontier, _FRONTIER_HEADER),
    "policy": (cmd_policy, _POLICY_HEADER),
    "simulate": (cmd_simulate, _SIMULATE_HEADER),
    "study": (cmd_study, _STUDY_HEADER),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="privcal",
        description="Privacy-preserving calibration: frontiers, policies, simulations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("frontier", "Pareto endpoints and the max-adversary-error curve"),
        ("policy", "one policy with its analytic errors"),
        ("simulate", "seeded Monte Carlo of one instance"),
        ("study", "reviewer-calibration benefit study"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config (flat dotted keys) or a manifest")
        p.add_argument("--out", default=".", help="output directory (default: .)")
        p.add_argument("--seed", type=int, help="64-bit unsigned seed")
        p.add_argument("--ec", type=float, help="conference-error target")
        p.add_argument(
            "--mode",
            choices=("noiseless", "noisy"),
            help="assert the instance's noise mode",
        )
        p.add_argument("--grid", type=int, help="grid point count (frontier)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    started = time.monotonic()
    try:
        cfg = _resolve(args.command, args)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        runner, header = _COMMANDS[args.command]
        rows = runner(cfg, out)
        csv_path = out / f"{args.command}.csv"
        _write_csv(csv_path, header, rows)
        _write_manifest(out, args.command, cfg, started, csv_path)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except AccuracyError as exc:
        print(f"accuracy error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
