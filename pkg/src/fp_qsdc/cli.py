"""Command-line interface.

Subcommands
-----------
evaluate   one operating point -> JSON report + CSV row
sweep      attenuation sweep (optionally optimized) -> CSV (+ SVG plot)
validate   oracle self-checks -> machine-readable pass/fail report
bench      kernel timings, compiled extension vs pure python

Exit codes: 0 success, 1 usage/config error, 2 validation or pipeline failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, replace
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, backend
from .optimizer import SearchSpace, optimize
from .params import Config, ConfigError, load_config
from .quadrature import QuadratureError, QuadratureSpec
from .security import QUAD_DEFAULT, QUAD_FAST, evaluate_point
from .svgplot import line_plot_svg
from .validate import run_validation

_OPT_FIELDS = ("opt_intensity", "opt_delta_x", "opt_delta_z", "opt_evaluations")


def _manifest(args: argparse.Namespace, config_path: str | None,
              outputs: list[str], seed: int | None = None) -> dict:
    config_hash = None
    if config_path:
        config_hash = hashlib.sha256(Path(config_path).read_bytes()).hexdigest()
    return {
        "command": " ".join(sys.argv),
        "config": config_path,
        "config_sha256": config_hash,
        "seed": seed,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "version": __version__,
        "backend": backend.BACKEND,
        "outputs": outputs,
    }


def _write_manifest(base: Path, manifest: dict) -> Path:
    path = base.with_suffix(base.suffix + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path


def _load(args: argparse.Namespace) -> Config:
    config = load_config(args.config) if args.config else Config()
    return config


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _write_csv(path: Path, fieldnames: tuple[str, ...], rows: list[dict],
               manifest_name: str):
    buf = io.StringIO()
    buf.write(f"# manifest: {manifest_name}\n")
    writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _fmt(v) for k, v in row.items()})
    path.write_text(buf.getvalue())


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _load(args)
    config = config.with_point(args.intensity, args.delta_x, args.delta_z)
    spec = QUAD_FAST if args.fast else QUAD_DEFAULT
    report = evaluate_point(config.system, config.source, args.attenuation_db,
                            args.mode, spec)
    base = Path(args.out)
    base.parent.mkdir(parents=True, exist_ok=True)
    json_path = base.with_suffix(".json")
    csv_path = base.with_suffix(".csv")
    outputs = [str(json_path), str(csv_path)]
    manifest = _manifest(args, args.config, outputs)
    manifest_path = _write_manifest(base, manifest)
    payload = report.to_dict()
    payload["manifest"] = manifest_path.name
    json_path.write_text(json.dumps(payload, indent=2) + "\n")
    _write_csv(csv_path, report.CSV_FIELDS, [report.csv_row()],
               manifest_path.name)
    if args.dump_lp:
        _dump_lps(config, args, Path(args.dump_lp))
    if args.dump_matrices:
        _dump_matrices(config, args, Path(args.dump_matrices))
    print(f"rate {report.rate:.6e} /pulse at {args.attenuation_db} dB "
          f"(C_Z {report.bases['Z'].capacity:.3e}, "
          f"C_X {report.bases['X'].capacity:.3e}) -> {json_path}")
    return 0


def _dump_lps(config: Config, args: argparse.Namespace, path: Path):
    from .clickstats import ClickModel, interval_stats
    from .decoy_lp import build_error_lp, build_yield_lp
    from .params import derive_channel
    from .source import make_interval
    from .states import CLASS_ORDER, distance_table
    system, src = config.system, config.source
    ba, _ = derive_channel(system, args.attenuation_db)
    model = ClickModel.for_round(system, ba)
    chunks = []
    for basis in ("Z", "X"):
        stats = {c: interval_stats(make_interval(src, basis, None, c), src,
                                   model, system.n_cut) for c in CLASS_ORDER}
        d_union = distance_table(basis, "union", src,
                                 range(2, system.n_cut + 1), args.mode)
        state = {"Z": "H", "X": "D"}[basis]
        d_state = distance_table(basis, state, src,
                                 range(1, system.n_cut + 1), args.mode)
        chunks.append(build_yield_lp(stats, d_union, system.n_cut, basis).to_text())
        chunks.append(build_error_lp(stats, d_state, system.n_cut, basis).to_text())
    path.write_text("\n".join(chunks))


def _dump_matrices(config: Config, args: argparse.Namespace, path: Path):
    from .source import make_interval
    from .states import CLASS_ORDER, density_matrices
    src = config.source
    out = {}
    for basis in ("Z", "X", "Y"):
        for cls in CLASS_ORDER:
            interval = make_interval(src, basis, None, cls)
            mats = density_matrices(interval, range(1, config.system.n_cut + 1),
                                    src, args.mode)
            for rho in mats:
                key = f"{basis}/{cls}/n={rho.n}"
                out[key] = [[[float(z.real), float(z.imag)] for z in row]
                            for row in rho.entries]
    path.write_text(json.dumps(out, indent=1) + "\n")


def _sweep_fields(optimized: bool) -> tuple[str, ...]:
    from .security import SecrecyReport
    fields = SecrecyReport.CSV_FIELDS
    return fields + _OPT_FIELDS if optimized else fields


def _sweep_worker(payload) -> dict:
    config, db, mode, optimized, fast, trace_dir = payload
    spec = QUAD_FAST if fast else QUAD_DEFAULT
    if not optimized:
        return evaluate_point(config.system, config.source, db, mode,
                              spec).csv_row()
    res = optimize(config.system, db, SearchSpace(), mode, QUAD_FAST)
    src = config.source
    if not res.beyond_cutoff:
        src = replace(src, intensity_max=res.best_intensity,
                      delta_x=res.best_delta_x, delta_z=res.best_delta_z,
                      i_vac=None, i_d=None, vt_product=None)
    # the row reports a fresh evaluation at the chosen point; the raw
    # objective trace is available separately
    report = evaluate_point(config.system, src, db, mode, spec)
    row = report.csv_row()
    row.update({
        "opt_intensity": res.best_intensity,
        "opt_delta_x": res.best_delta_x,
        "opt_delta_z": res.best_delta_z,
        "opt_evaluations": res.evaluations,
    })
    if trace_dir is not None:
        path = Path(trace_dir) / f"trace_{db:g}db.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["intensity", "delta_x", "delta_z", "rate"])
            for point in res.trace:
                writer.writerow([_fmt(v) for v in point])
    return row


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _load(args)
    sweep = config.sweep
    if args.from_db is not None or args.to_db is not None or args.step_db is not None:
        sweep = replace(sweep,
                        from_db=args.from_db if args.from_db is not None else sweep.from_db,
                        to_db=args.to_db if args.to_db is not None else sweep.to_db,
                        step_db=args.step_db if args.step_db is not None else sweep.step_db)
    optimized = args.optimize or sweep.optimize
    points = sweep.points()
    if not points:
        print("error: empty sweep", file=sys.stderr)
        return 1
    jobs = args.jobs
    env_jobs = os.environ.get("FP_QSDC_JOBS")
    if env_jobs is not None:
        jobs = int(env_jobs)
    if jobs is None:
        jobs = os.cpu_count() or 1
    if args.trace_dir:
        Path(args.trace_dir).mkdir(parents=True, exist_ok=True)
    payloads = [(config, db, args.mode, optimized, args.fast, args.trace_dir)
                for db in points]
    if jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_worker, payloads))
    else:
        rows = [_sweep_worker(p) for p in payloads]
    if sweep.pulse_rate_hz:
        for row in rows:
            row["rate"] = row["rate"] * sweep.pulse_rate_hz
    base = Path(args.out)
    base.parent.mkdir(parents=True, exist_ok=True)
    csv_path = base.with_suffix(".csv")
    outputs = [str(csv_path)]
    svg_path = None
    if args.plot:
        svg_path = base.with_suffix(".svg")
        outputs.append(str(svg_path))
    manifest = _manifest(args, args.config, outputs)
    manifest_path = _write_manifest(base, manifest)
    _write_csv(csv_path, _sweep_fields(optimized), rows, manifest_path.name)
    if svg_path is not None:
        unit = "bit/s" if sweep.pulse_rate_hz else "bit/pulse"
        series = {
            "rate": [(r["attenuation_db"], r["rate"]) for r in rows],
            "C_Z": [(r["attenuation_db"], r["capacity_z"]) for r in rows],
            "C_X": [(r["attenuation_db"], r["capacity_x"]) for r in rows],
        }
        svg_path.write_text(line_plot_svg(
            series, "secrecy message transmission rate vs channel attenuation",
            "channel attenuation (dB)", f"rate ({unit})",
            comment=f"manifest: {manifest_path.name}"))
    print(f"{len(rows)} sweep points -> {csv_path}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    config = _load(args)
    report = run_validation(config, seed=args.seed, samples=args.samples,
                            quick=args.quick)
    payload = report.to_dict()
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    if not report.all_passed:
        failed = [c.name for c in report.checks if not c.passed]
        print(f"FAILED checks: {', '.join(failed)}", file=sys.stderr)
        return 2
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    from . import _core_py
    try:
        from . import _core
    except ImportError:
        _core = None
    import numpy as np
    results = []
    iv = np.linspace(0.001, 0.089, args.nodes)  # inside the 2vt support
    tv = np.linspace(0.0, math.pi, args.nodes)
    pv = np.linspace(0.0, 2 * math.pi, max(8, args.nodes // 2))
    rng = np.random.default_rng(7)
    x = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    herm = 0.5 * (x + x.conj().T)

    def time_it(fn, repeats):
        best = math.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t0)
        return best

    impls = [("python", _core_py)] + ([("compiled", _core)] if _core else [])
    for name, impl in impls:
        results.append((name, "density_grid", time_it(
            lambda: impl.density_grid(iv, tv, 0.04475), args.repeats)))
        results.append((name, "click_grid", time_it(
            lambda: impl.click_grid(iv, tv, pv, 1, 1.0, 0.167, 0.7, 8e-8, 0.0131),
            args.repeats)))
        results.append((name, "herm_eig", time_it(
            lambda: impl.herm_eig(herm), args.repeats)))
    print(f"{'backend':10s} {'kernel':14s} best_seconds")
    for name, kernel, secs in results:
        print(f"{name:10s} {kernel:14s} {secs:.6f}")
    if _core is None:
        print("compiled extension not available; built fallback only")
    else:
        for kernel in ("density_grid", "click_grid", "herm_eig"):
            py = next(s for n, k, s in results if n == "python" and k == kernel)
            cy = next(s for n, k, s in results if n == "compiled" and k == kernel)
            print(f"speedup {kernel}: {py / cy:.2f}x")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fp-qsdc",
        description="Secrecy-rate simulator for passively sourced QSDC")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evaluate", help="evaluate one operating point")
    ev.add_argument("--config", default=None)
    ev.add_argument("--attenuation-db", type=float, default=2.0)
    ev.add_argument("--intensity", type=float, default=None)
    ev.add_argument("--delta-x", type=float, default=None)
    ev.add_argument("--delta-z", type=float, default=None)
    ev.add_argument("--mode", choices=("full", "paper_diagonal"), default="full")
    ev.add_argument("--out", default="report")
    ev.add_argument("--fast", action="store_true",
                    help="fixed quadrature rule (optimizer profile)")
    ev.add_argument("--dump-lp", default=None, metavar="PATH",
                    help="write the decoy LPs as a plain-text tableau")
    ev.add_argument("--dump-matrices", default=None, metavar="PATH",
                    help="write photon-number density matrices as JSON [re, im] pairs")
    ev.set_defaults(fn=cmd_evaluate)

    sw = sub.add_parser("sweep", help="rate vs attenuation sweep")
    sw.add_argument("--config", default=None)
    sw.add_argument("--from-db", type=float, default=None)
    sw.add_argument("--to-db", type=float, default=None)
    sw.add_argument("--step-db", type=float, default=None)
    sw.add_argument("--optimize", action="store_true",
                    help="optimize (intensity, delta_x, delta_z) per point")
    sw.add_argument("--plot", action="store_true", help="emit an SVG plot")
    sw.add_argument("--mode", choices=("full", "paper_diagonal"), default="full")
    sw.add_argument("--out", default="sweep")
    sw.add_argument("--fast", action="store_true")
    sw.add_argument("--jobs", type=int, default=None,
                    help="worker processes (FP_QSDC_JOBS overrides)")
    sw.add_argument("--trace-dir", default=None, metavar="DIR",
                    help="with --optimize: write per-point optimizer traces")
    sw.set_defaults(fn=cmd_sweep)

    va = sub.add_parser("validate", help="run the oracle self-checks")
    va.add_argument("--config", default=None)
    va.add_argument("--seed", type=int, default=20240901)
    va.add_argument("--samples", type=int, default=10 ** 6,
                    help="phase-space sample budget")
    va.add_argument("--quick", action="store_true",
                    help="reduced stochastic budgets")
    va.add_argument("--out", default=None)
    va.set_defaults(fn=cmd_validate)

    be = sub.add_parser("bench", help="kernel benchmark, compiled vs python")
    be.add_argument("--nodes", type=int, default=64)
    be.add_argument("--repeats", type=int, default=20)
    be.set_defaults(fn=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except QuadratureError as exc:
        print(f"pipeline failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
