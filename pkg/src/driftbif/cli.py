"""Command-line front end.

Subcommands::

    driftbif analyze-kernel   --kernel K.json --a 1 [--b 1 ...]
    driftbif construct-explicit --a 1 --z 1 --modes 25 --out DIR
    driftbif trace-branch     --kernel K.json --a 1 --k0 1 --out DIR
    driftbif cross-validate   --a 1 --z-max 1 --out DIR
    driftbif verify           FILE

Exit codes: 0 when every certificate passes, 1 on numerical failure or a
failed certificate, 2 on bad input.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__
from .continuation import BranchNotFound, evaluate_F, trace_branch
from .explicit_solution import construct, full_equation_residual, recurrence_defect
from .kernel import KernelSpectrum, cosine_kernel
from .kernel_analysis import (
    detect_bifurcations,
    linear_nullspace,
    linear_uniqueness_certificate,
    transversality_check,
)
from .spectral_core import CosineSeries, SolveConfig, evaluate

log = logging.getLogger("driftbif")

KERNEL_SCHEMA = "driftbif.kernel/1"
MEMBER_SCHEMA = "driftbif.member/1"
MANIFEST_SCHEMA = "driftbif.manifest/1"
CROSS_TOL = 1e-8
PROFILE_POINTS = 1024

EXIT_OK, EXIT_NUMERIC, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Malformed input file or arguments; maps to exit code 2."""


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _json_ready(obj):
    if isinstance(obj, dict):
        return {str(k): _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _json_ready(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def dump_json(obj, path: Path | None = None) -> str:
    text = json.dumps(_json_ready(obj), indent=2, sort_keys=False) + "\n"
    if path is not None:
        path.write_text(text)
    return text


# ---------------------------------------------------------------- kernel files


def load_kernel(path: str | Path, lattice_radius: int | None = None) -> KernelSpectrum:
    """Read a kernel file.

    Two forms are accepted::

        {"schema": "driftbif.kernel/1", "dim": 1, "lattice_radius": 4,
         "coefficients": [[[1], 1.0], [[3], -0.25]]}
        {"schema": "driftbif.kernel/1", "dim": 1, "grid_size": 64, "samples": [...]}

    A bare integer is accepted in place of a one-component mode.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read kernel file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return kernel_from_dict(data, lattice_radius, source=str(path))


def kernel_from_dict(data, lattice_radius: int | None = None, source: str = "<kernel>") -> KernelSpectrum:
    if not isinstance(data, dict):
        raise InputError(f"{source}: top level must be an object")
    schema = data.get("schema", KERNEL_SCHEMA)
    if schema != KERNEL_SCHEMA:
        raise InputError(f"{source}: unsupported schema {schema!r}")
    try:
        dim = int(data["dim"])
        if "samples" in data:
            if dim != 1:
                raise InputError(f"{source}: sampled kernels must have dim 1")
            samples = [float(x) for x in data["samples"]]
            if "grid_size" in data and int(data["grid_size"]) != len(samples):
                raise InputError(f"{source}: grid_size {data['grid_size']} != {len(samples)} samples")
            return KernelSpectrum.from_samples(samples, lattice_radius or data.get("lattice_radius"))
        coeffs = []
        for i, entry in enumerate(data["coefficients"]):
            if not isinstance(entry, (list, tuple)) or len(entry) != 2:
                raise InputError(f"{source}: coefficients[{i}] must be [mode, value]")
            k, value = entry
            k = [k] if isinstance(k, int) else list(k)
            coeffs.append((tuple(int(c) for c in k), float(value)))
        radius = lattice_radius or data.get("lattice_radius")
        return KernelSpectrum.from_coefficients(coeffs, dim=dim, lattice_radius=radius, l2_norm=data.get("l2_norm"))
    except InputError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{source}: invalid kernel description: {exc}") from exc


def kernel_to_dict(kernel: KernelSpectrum) -> dict:
    return {
        "schema": KERNEL_SCHEMA,
        "dim": kernel.dim,
        "lattice_radius": kernel.lattice_radius,
        "coefficients": [[list(k), v] for k, v in kernel.entries.items()],
    }


# ---------------------------------------------------------------- helpers


class Timer:
    def __init__(self) -> None:
        self.phases: dict[str, float] = {}

    @contextmanager
    def phase(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.phases[name] = time.perf_counter() - t0


def manifest(subcommand: str, inputs: dict, outputs: list[Path], timer: Timer, **extra) -> dict:
    return {
        "schema": MANIFEST_SCHEMA,
        "subcommand": subcommand,
        "inputs": inputs,
        "outputs": [str(p) for p in outputs],
        "versions": {"driftbif": __version__, "numpy": np.__version__},
        "timing": timer.phases,
        **extra,
    }


def _out_dir(path: str | None) -> Path:
    out = Path(path or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_branch_csv(branch, path: Path) -> None:
    M = branch.points[0].solution.order if branch.points else 0
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s", "c", "residual_l2", "newton_iters", "converged"] + [f"V_{m}" for m in range(1, M + 1)])
        for p in branch.points:
            w.writerow(
                [fmt(p.amplitude), fmt(p.c), fmt(p.residual_l2), p.newton_iters, int(p.converged)]
                + [fmt(x) for x in p.solution.coeffs]
            )


def read_branch_csv(path: Path) -> list[dict]:
    rows = []
    with path.open(newline="") as fh:
        for row in csv.DictReader(fh):
            coeffs = [float(v) for k, v in row.items() if k.startswith("V_")]
            rows.append({"s": float(row["s"]), "c": float(row["c"]), "coeffs": np.array(coeffs)})
    return rows


# ---------------------------------------------------------------- subcommands


def cmd_analyze_kernel(args) -> int:
    if not args.a > 0:
        raise InputError("--a must be positive")
    kernel = load_kernel(args.kernel, args.lattice_radius)
    detection = detect_bifurcations(args.a, kernel)
    candidates = []
    for cand in detection:
        entry = cand.as_dict()
        entry["transversality"] = transversality_check(cand, args.a, kernel).as_dict()
        candidates.append(entry)
    report = {
        "a": args.a,
        "kernel": kernel_to_dict(kernel),
        "kernel_l2_norm": kernel.l2_norm,
        "evenness_defect": kernel.evenness_defect,
        "positivity": kernel.pointwise_sign_report(),
        "candidates": candidates,
        "diagnostics": list(detection.diagnostics),
        "linear": [
            {
                "b": b,
                "nullspace": [list(k) for k in linear_nullspace(args.a, b, kernel)],
                "certificate": linear_uniqueness_certificate(args.a, b, kernel).as_dict(),
            }
            for b in (args.b or [])
        ],
    }
    if args.format == "csv":
        lines = ["k0,c0,phi_hat,H_pass,kernel_dim,transversality_prefactor"]
        for c in candidates:
            k0 = " ".join(str(x) for x in c["k0"])
            lines.append(
                f"{k0},{fmt(c['c0'])},{fmt(c['phi_hat_k0'])},{int(c['hypothesis_H']['pass'])},"
                f"{c['kernel_dim']},{fmt(c['transversality']['prefactor'])}"
            )
        text = "\n".join(lines) + "\n"
    else:
        text = dump_json(report)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    for d in detection.diagnostics:
        log.warning(d)
    return EXIT_OK


def cmd_construct_explicit(args) -> int:
    if args.z is None or args.z == 0 or not math.isfinite(args.z):
        raise InputError("--z must be a nonzero real: z is a free parameter in R \\ {0}")
    if not args.a > 0:
        raise InputError("--a must be positive")
    if args.modes < 3:
        raise InputError("--modes must be at least 3")
    timer = Timer()
    with timer.phase("construct"):
        member = construct(args.a, args.z, args.modes, args.tol)
    with timer.phase("residual"):
        residual = full_equation_residual(member, args.modes + 5)
        defect = recurrence_defect(member)
    out = _out_dir(args.out)
    record = member.as_dict()
    record.update({"schema": MEMBER_SCHEMA, "residual_l2": residual.l2})
    dump_json(record, out / "member.json")
    x = np.arange(PROFILE_POINTS) / PROFILE_POINTS
    u = member.c + evaluate(member.coeffs, x)
    with (out / "profile.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "u"])
        w.writerows([fmt(xi), fmt(ui)] for xi, ui in zip(x, u))
    report = residual.as_dict()
    report["recurrence_defect_max"] = float(defect.max())
    report["tail_certificate"] = member.tail_certificate
    dump_json(report, out / "residual.json")
    files = [out / "member.json", out / "profile.csv", out / "residual.json"]
    dump_json(
        manifest("construct-explicit", {"a": args.a, "z": args.z, "M": args.modes, "tol": args.tol}, files, timer),
        out / "manifest.json",
    )
    print(f"c = {fmt(member.c)}  amplitude = {fmt(member.amplitude)}  residual_l2 = {residual.l2:.3e}")
    return EXIT_OK


def _solve_config(args) -> SolveConfig:
    try:
        return SolveConfig(truncation=args.modes, newton_tol=args.tol, newton_max_iter=args.max_iter)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _run_trace(kernel, a, k0, s_max, steps, config):
    if steps < 1:
        raise InputError("--steps must be positive")
    if not s_max > 0:
        raise InputError("--s-max must be positive")
    if kernel.dim != 1:
        raise InputError("branch tracing needs a 1-D kernel")
    if abs(kernel(k0)) <= 1e-12:
        raise InputError(f"Phihat({k0}) = 0: hypothesis (H) requires Phihat(k0) != 0; no branch to trace")
    match = [c for c in detect_bifurcations(a, kernel) if c.k0 == (k0,)]
    if not match:
        raise InputError(f"no bifurcation candidate at k0 = {k0}")
    return trace_branch(a, kernel, match[0], s_max, steps, config)


def cmd_trace_branch(args) -> int:
    if not args.a > 0:
        raise InputError("--a must be positive")
    kernel = load_kernel(args.kernel)
    config = _solve_config(args)
    timer = Timer()
    with timer.phase("trace"):
        try:
            branch = _run_trace(kernel, args.a, args.k0, args.s_max, args.steps, config)
        except BranchNotFound as exc:
            log.error("%s", exc)
            return EXIT_NUMERIC
    out = _out_dir(args.out)
    csv_path = out / "branch.csv"
    write_branch_csv(branch, csv_path)
    man = manifest(
        "trace-branch",
        {"kernel": kernel_to_dict(kernel), **branch.provenance},
        [csv_path],
        timer,
        diagnostics=branch.diagnostics,
        all_converged=branch.all_converged,
        n_points=len(branch.points),
    )
    dump_json(man, out / "manifest.json")
    n_ok = sum(p.converged for p in branch.points)
    print(f"{n_ok}/{len(branch.points)} points converged; c(s->0) = {fmt(branch.diagnostics['c_extrapolated'])}")
    return EXIT_OK if branch.all_converged else EXIT_NUMERIC


def cross_validate(a: float, z_max: float, steps: int, M: int, tol: float = 1e-11) -> dict:
    """Trace the two-cosine-kernel branch and compare it with the closed form at ``z = -s/a``."""
    kernel = cosine_kernel()
    config = SolveConfig(truncation=M, newton_tol=tol)
    branch = _run_trace(kernel, a, 1, a * z_max, steps, config)
    dc, dv, rows = 0.0, 0.0, []
    for p in branch.points:
        if not p.converged:
            continue
        member = construct(a, -p.amplitude / a, M)
        gap_c = abs(member.c - p.c)
        gap_v = (member.coeffs - p.solution).norm()
        dc, dv = max(dc, gap_c), max(dv, gap_v)
        rows.append({"s": p.amplitude, "z": member.z, "c_branch": p.c, "c_closed_form": member.c, "dc": gap_c, "dv": gap_v})
    passed = branch.all_converged and dc <= CROSS_TOL and dv <= CROSS_TOL
    return {
        "a": a,
        "z_max": z_max,
        "steps": steps,
        "M": M,
        "tolerance": CROSS_TOL,
        "max_abs_dc": dc,
        "max_coeff_l2": dv,
        "all_converged": branch.all_converged,
        "c_extrapolated": branch.diagnostics["c_extrapolated"],
        "c0": branch.c0,
        "pass": passed,
        "points": rows,
    }


def cmd_cross_validate(args) -> int:
    if not args.a > 0 or not args.z_max > 0:
        raise InputError("--a and --z-max must be positive")
    if args.steps < 1 or args.modes < 2:
        raise InputError("--steps must be positive and --modes at least 2")
    timer = Timer()
    with timer.phase("cross_validate"):
        try:
            report = cross_validate(args.a, args.z_max, args.steps, args.modes, args.tol)
        except BranchNotFound as exc:
            log.error("%s", exc)
            return EXIT_NUMERIC
    out = _out_dir(args.out)
    dump_json(report, out / "cross_validation.json")
    dump_json(
        manifest("cross-validate", {"a": args.a, "z_max": args.z_max, "steps": args.steps, "M": args.modes},
                 [out / "cross_validation.json"], timer),
        out / "manifest.json",
    )
    print(
        f"max|dc| = {report['max_abs_dc']:.3e}  max coeff l2 = {report['max_coeff_l2']:.3e}  "
        f"{'PASS' if report['pass'] else 'FAIL'}"
    )
    return EXIT_OK if report["pass"] else EXIT_NUMERIC


def verify_file(path: Path, tol: float) -> dict:
    """Recompute residuals of a saved member JSON or a trace-branch manifest."""
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    schema = data.get("schema")
    if schema == MEMBER_SCHEMA:
        v = CosineSeries(np.asarray(data["coeffs"], dtype=float))
        r = evaluate_F(float(data["c"]), v, float(data["a"]), cosine_kernel(), v.order).norm()
        tol = max(tol, 10 * float(data.get("residual_l2", 0.0)))
        return {"file": str(path), "kind": "member", "residuals": [r], "max_residual": r, "pass": r <= tol}
    if schema == MANIFEST_SCHEMA and data.get("subcommand") == "trace-branch":
        kernel = kernel_from_dict(data["inputs"]["kernel"])
        a = float(data["inputs"]["a"])
        csv_path = Path(data["outputs"][0])
        if not csv_path.is_absolute() and not csv_path.exists():
            csv_path = path.parent / csv_path.name
        rows = read_branch_csv(csv_path)
        res = [evaluate_F(r["c"], CosineSeries(r["coeffs"]), a, kernel).norm() for r in rows]
        worst = max(res, default=math.inf)
        return {"file": str(path), "kind": "branch", "residuals": res, "max_residual": worst, "pass": worst <= tol}
    raise InputError(f"{path}: not a member file or trace-branch manifest (schema {schema!r})")


def cmd_verify(args) -> int:
    result = verify_file(Path(args.file), args.tol)
    sys.stdout.write(dump_json(result))
    return EXIT_OK if result["pass"] else EXIT_NUMERIC


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="driftbif", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress at INFO level")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("analyze-kernel", help="bifurcation candidates and linear uniqueness criteria")
    q.add_argument("--kernel", required=True, help="kernel JSON file (coefficients or samples)")
    q.add_argument("--a", type=float, required=True, help="diffusion coefficient, > 0")
    q.add_argument("--b", type=float, action="append", help="linear coupling; may repeat")
    q.add_argument("--lattice-radius", type=int, help="override the declared mode cutoff")
    q.add_argument("--format", choices=["json", "csv"], default="json", help="report format (default json)")
    q.add_argument("--out", help="report file (default stdout)")
    q.set_defaults(func=cmd_analyze_kernel)

    q = sub.add_parser("construct-explicit", help="closed-form Bessel solution for Phi = 2cos(2 pi x)")
    q.add_argument("--a", type=float, default=1.0, help="diffusion coefficient, > 0 (default 1)")
    q.add_argument("--z", type=float, required=True, help="nonzero family parameter; amplitude is -a z")
    q.add_argument("--modes", type=int, default=32, help="truncation order M (default 32)")
    q.add_argument("--tol", type=float, default=1e-15, help="Bessel series tolerance")
    q.add_argument("--out", help="output directory (default .)")
    q.set_defaults(func=cmd_construct_explicit)

    q = sub.add_parser("trace-branch", help="Newton continuation from a bifurcation point")
    q.add_argument("--kernel", required=True, help="kernel JSON file (coefficients or samples)")
    q.add_argument("--a", type=float, default=1.0, help="diffusion coefficient, > 0 (default 1)")
    q.add_argument("--k0", type=int, default=1, help="bifurcating mode (default 1)")
    q.add_argument("--s-max", type=float, default=1.0, help="largest |V_k0| reached (default 1)")
    q.add_argument("--steps", type=int, default=20, help="continuation steps per sign (default 20)")
    q.add_argument("--modes", type=int, default=32, help="truncation order M (default 32)")
    q.add_argument("--tol", type=float, default=1e-11, help="residual tolerance (default 1e-11)")
    q.add_argument("--max-iter", type=int, default=25, help="Newton iterations per point (default 25)")
    q.add_argument("--out", help="output directory (default .)")
    q.set_defaults(func=cmd_trace_branch)

    q = sub.add_parser("cross-validate", help="continuation versus the closed-form family")
    q.add_argument("--a", type=float, default=1.0, help="diffusion coefficient, > 0 (default 1)")
    q.add_argument("--z-max", type=float, default=1.0, help="largest |z| compared (default 1)")
    q.add_argument("--steps", type=int, default=20, help="continuation steps per sign (default 20)")
    q.add_argument("--modes", type=int, default=32, help="truncation order M (default 32)")
    q.add_argument("--tol", type=float, default=1e-11, help="residual tolerance (default 1e-11)")
    q.add_argument("--out", help="output directory (default .)")
    q.set_defaults(func=cmd_cross_validate)

    q = sub.add_parser("verify", help="recompute residuals of a saved solution")
    q.add_argument("file", help="member.json or a trace-branch manifest.json")
    q.add_argument("--tol", type=float, default=1e-11, help="residual tolerance (default 1e-11)")
    q.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        log.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
