"""Command-line front door.

Subcommands: verify-exact, inequalities, commutators, evolve, decay, energy,
dump.  Every subcommand runs from a JSON config file alone; flags override
config keys.  Outputs are NDJSON streams and CSV tables (byte-deterministic
for a fixed config and seed) plus one summary JSON per run; the manifest with
wall-clock data is written separately so determinism checks can compare the
data files.  Exit codes: 0 all checks passed, 1 a check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .accel import BACKEND
from .evolve import BackgroundSpec, BumpSpec, RunResult, SimConfig, run
from .grid import Grid2D, dump_csv
from .inequalities import (
    ConeBump,
    ConeBumpFamily,
    derivative_decay_ratio,
    family_report,
    hardy_cone_ratio,
    hardy_pointwise_max,
    hardy_ratio,
    nullform_decay_ratio,
    sobolev_cone_ratio,
)
from .vector_fields import GAMMA_IDS, TriPoly, commutator_box
from .waves import (
    affine_subluminal_solution,
    lightspeed_solution,
    lightspeed_sum_solution,
    profile,
    residual_convergence,
    superluminal_solution,
)

_EXPECTED_LAMBDA = {"G1": 0.0, "G2": 0.0, "G3": 0.0, "G4": 2.0, "G5": 2.0, "G6": 0.0}


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _outdir(args) -> Path:
    out = args.outdir or os.environ.get("MEMBRANE_LAB_OUTDIR") or "out"
    p = Path(out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _write_ndjson(path: Path, records: list[dict]) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _manifest(args, outdir: Path, extra: dict) -> None:
    man = {
        "subcommand": args.command,
        "config": getattr(args, "config", None),
        "seed": getattr(args, "seed", None),
        "output_dir": str(outdir),
        "tool_version": __version__,
        "backend": BACKEND,
        "wall_clock_s": extra.pop("wall_clock_s", None),
    }
    man.update(extra)
    _write_json(outdir / "manifest.json", man)


def _load_config(args) -> dict:
    cfg = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            cfg = json.load(fh)
    return cfg


def _sim_config(args) -> SimConfig:
    cfg = _load_config(args)

    def pick(flag, key, default):
        v = getattr(args, flag, None)
        if v is not None:
            return v
        return cfg.get(key, default)

    gspec = cfg.get("grid", {})
    half = pick("half_width", "_", None) or gspec.get("half_width", 22.0)
    n = int(pick("grid_n", "_", None) or gspec.get("n", 257))
    grid = Grid2D(-half, half, -half, half, n, n)
    bg_cfg = cfg.get("background", "default")
    if getattr(args, "no_background", False):
        bg = None
    elif bg_cfg is None:
        bg = None
    elif bg_cfg == "default":
        bg = BackgroundSpec(
            profile_name=getattr(args, "profile", None) or "sech",
            amplitude=getattr(args, "amplitude", None) or 0.5,
        )
    else:
        bg = BackgroundSpec(
            profile_name=getattr(args, "profile", None) or bg_cfg.get("profile", "sech"),
            amplitude=getattr(args, "amplitude", None) or bg_cfg.get("amplitude", 0.5),
            a=bg_cfg.get("a", 0.0),
            b=bg_cfg.get("b", 1.0),
            sign=bg_cfg.get("sign", 1),
            width=bg_cfg.get("width", 1.0),
        )

    def bump(key, default):
        spec = cfg.get(key)
        if spec is None:
            return default
        return BumpSpec(
            center=tuple(spec.get("center", (0.0, 0.0))),
            radius=spec.get("radius", 0.8),
            smoothness=spec.get("smoothness", 1),
            weight=spec.get("weight", 1.0),
        )

    return SimConfig(
        grid=grid,
        t_end=float(pick("t_end", "t_end", 10.0)),
        epsilon=float(pick("epsilon", "epsilon", 1e-3)),
        cfl=float(pick("cfl", "cfl", 0.4)),
        scheme_order=int(pick("scheme", "scheme_order", 4)),
        background=bg,
        f_bump=bump("f_bump", BumpSpec()),
        g_bump=bump("g_bump", BumpSpec(radius=0.7, weight=0.5)),
        cadence=float(pick("cadence", "cadence", 0.5)),
        xi_stations=cfg.get("xi_stations"),
    )


def _result_records(result: RunResult) -> list[dict]:
    out = []
    for r in result.records:
        out.append(
            {
                "kind": "time",
                "t": r.t,
                "sup_u": r.sup_u,
                "support_radius": r.support_radius,
                "min_delta": r.min_delta,
                "Es_proxy": r.Es_proxy,
                "hamiltonian": r.hamiltonian,
                "dt": r.dt,
            }
        )
    return out


def _station_records(result: RunResult) -> list[dict]:
    out = []
    for rep in result.station_reports:
        d = asdict(rep)
        d["kind"] = "station"
        out.append(d)
    return out


# -- subcommands ----------------------------------------------------------------


def cmd_verify_exact(args) -> int:
    outdir = _outdir(args)
    t0 = time.monotonic()
    grids = [int(g) for g in args.grids.split(",")]
    base, refinements = grids[0], len(grids)
    prof = profile(args.profile, args.amplitude)
    families = {}
    if args.family in ("affine", "all"):
        sol = affine_subluminal_solution((0.2, 0.3), 1.0, 0.6)
        families["affine"] = (sol.value, [(0.0, 2.0), (-1.5, 1.5), (-1.5, 1.5)])
    if args.family in ("lightspeed", "all"):
        sol = lightspeed_solution(0.0, 1.0, prof)
        families["lightspeed"] = (sol.value, [(0.0, 2.0), (-1.5, 1.5), (-1.5, 1.5)])
        sol2 = lightspeed_solution(0.5, 1.0, prof)
        families["lightspeed_transverse"] = (sol2.value, [(0.0, 2.0), (-1.5, 1.5), (-1.5, 1.5)])
    if args.family in ("lightspeed-sum", "all"):
        sol = lightspeed_sum_solution((0.4, 0.8), (profile("cos"), profile("sin")), n=2)
        families["lightspeed_sum"] = (sol.value, [(0.0, 2.0), (-1.5, 1.5), (-1.5, 1.5)])
    if args.family in ("superluminal", "all"):
        sol = superluminal_solution(prof, c=2.0)
        families["superluminal"] = (sol.value, [(0.0, 2.0), (-1.5, 1.5), (-1.5, 1.5)])
    rows, ok = [], True
    for name, (value, spans) in families.items():
        rep = residual_convergence(value, spans, base_n=base, refinements=refinements,
                                   scheme_order=args.scheme)
        threshold = args.scheme - 0.3
        passed = rep["exact"] or rep["order"] >= threshold
        ok &= passed
        for n, res in zip(rep["ns"], rep["max_residual"]):
            rows.append([name, n, res, rep["order"], "pass" if passed else "FAIL"])
    _write_csv(outdir / "verify_exact.csv", ["family", "n", "max_residual", "order", "status"], rows)
    _write_json(outdir / "summary.json", {"all_pass": ok, "families": sorted(families)})
    _manifest(args, outdir, {"wall_clock_s": time.monotonic() - t0})
    print(f"verify-exact: {'all pass' if ok else 'FAILURES'} -> {outdir}")
    return 0 if ok else 1


def cmd_inequalities(args) -> int:
    outdir = _outdir(args)
    t0 = time.monotonic()
    family = ConeBumpFamily(count=args.count, seed=args.seed)
    n = args.refine
    rows, ok = [], True
    which = args.which

    def emit(name, report, bound=None, translated=None):
        nonlocal ok
        passed = report.accepted
        if bound is not None:
            passed &= report.max_ratio <= bound
        growth = ""
        if translated is not None:
            growth = translated / report.max_ratio - 1.0 if report.max_ratio > 0 else 0.0
            passed &= growth <= 0.20
        ok &= passed
        rows.append(
            [name, report.max_ratio, report.refinement_drift, growth,
             "pass" if passed else "FAIL"]
        )

    if which in ("hardy", "all"):
        rng = np.random.default_rng(args.seed)
        x = np.linspace(-1.0, 1.0, 2001)
        worst = 0.0
        for _ in range(args.count):
            c = rng.uniform(-0.3, 0.3)
            wdt = rng.uniform(0.2, 0.6)
            from .waves import bump1d_derivs

            vals = bump1d_derivs((x - c) / wdt, 1)
            worst = max(worst, hardy_ratio(x, vals[0], 1.0, vals[1] / wdt))
        passed = worst <= 2.1
        ok &= passed
        rows.append(["hardy_2.9", worst, 0.0, "", "pass" if passed else "FAIL"])
        rep = family_report("hardy_cone_2.7", family,
                            lambda b, nn: hardy_cone_ratio(b, n=nn), n_base=n)
        emit("hardy_cone_2.7", rep)
        worst28 = max(hardy_pointwise_max(b) for b in family.members())
        passed = worst28 <= 1.05
        ok &= passed
        rows.append(["hardy_pointwise_2.8", worst28, 0.0, "", "pass" if passed else "FAIL"])
    if which in ("nullform", "all"):
        for variant in ("xi_decay", "eta_decay"):
            rep = family_report(
                f"nullform_{variant}", family,
                lambda p, q, nn, v=variant: nullform_decay_ratio(p, q, v, nn),
                n_base=n, pairs=True)
            emit(f"nullform_{variant}", rep)
    if which in ("sobolev", "all"):
        rep = family_report("sobolev_2.11", family,
                            lambda b, nn: sobolev_cone_ratio(b, nn), n_base=n)
        translated = max(
            sobolev_cone_ratio(b.translated(dxi=b.center[0] + 2.0), n) for b in family.members()
        )
        emit("sobolev_2.11", rep, translated=translated)
    if which in ("derivative", "all"):
        for variant in ("eta", "xi", "corollary"):
            rep = family_report(
                f"derivative_{variant}", family,
                lambda b, nn, v=variant: derivative_decay_ratio(b, v, nn), n_base=max(17, n // 2 * 2 + 1))
            emit(f"derivative_{variant}", rep)
    _write_csv(outdir / "inequalities.csv",
               ["name", "max_ratio", "refinement_drift", "translation_growth", "status"], rows)
    _write_json(outdir / "summary.json", {"all_pass": ok, "count": args.count, "seed": args.seed})
    _manifest(args, outdir, {"wall_clock_s": time.monotonic() - t0})
    print(f"inequalities[{which}]: {'all pass' if ok else 'FAILURES'} -> {outdir}")
    return 0 if ok else 1


def cmd_commutators(args) -> int:
    outdir = _outdir(args)
    t0 = time.monotonic()
    rng = np.random.default_rng(args.seed)
    rows, ok = [], True
    for vf in GAMMA_IDS:
        worst_lam, worst_res = 0.0, 0.0
        lam = _EXPECTED_LAMBDA[vf]
        for _ in range(args.count):
            f = TriPoly.random(rng, degree=4)
            rep = commutator_box(vf, f)
            worst_lam = max(worst_lam, abs(rep.fitted_coefficient - lam))
            worst_res = max(worst_res, rep.max_residual / rep.defect_scale)
        passed = worst_lam <= 1e-8 and worst_res <= 1e-8
        ok &= passed
        rows.append([vf, lam, worst_lam, worst_res, "pass" if passed else "FAIL"])
    _write_csv(outdir / "commutators.csv",
               ["operator", "expected_lambda", "max_lambda_error", "max_residual", "status"], rows)
    _write_json(outdir / "summary.json", {"all_pass": ok, "seed": args.seed})
    _manifest(args, outdir, {"wall_clock_s": time.monotonic() - t0})
    print(f"commutators: {'all pass' if ok else 'FAILURES'} -> {outdir}")
    return 0 if ok else 1


def cmd_evolve(args) -> int:
    outdir = _outdir(args)
    t0 = time.monotonic()
    config = _sim_config(args)
    result = run(config)
    _write_ndjson(outdir / "records.ndjson", _result_records(result))
    _write_ndjson(outdir / "stations.ndjson", _station_records(result))
    summary = result.summary
    h = max(config.grid.h1, config.grid.h2)
    support_ok = all(
        r.support_radius <= r.t + 1.0 + 2.0 * h + 1e-9 for r in result.records
    )
    summary["support_ok"] = support_ok
    summary["stable"] = bool(
        summary["min_delta"] > 0.5 and math.isfinite(summary["max_sup_u"])
    )
    _write_json(outdir / "summary.json", summary)
    _manifest(args, outdir, {"wall_clock_s": time.monotonic() - t0,
                             "steps": result.final.step_count})
    print(f"evolve: steps={result.final.step_count} max|u|={summary['max_sup_u']:.3e} "
          f"minDelta={summary['min_delta']:.3f} -> {outdir}")
    return 0 if support_ok else 1


def cmd_decay(args) -> int:
    outdir = _outdir(args)
    t0 = time.monotonic()
    config = _sim_config(args)
    result = run(config)
    _write_ndjson(outdir / "stations.ndjson", _station_records(result))
    decay = result.decay or {}
    _write_json(outdir / "decay.json", decay)
    _manifest(args, outdir, {"wall_clock_s": time.monotonic() - t0})
    slope = decay.get("slope")
    print(f"decay: slope={slope} -> {outdir}")
    return 0 if slope is not None else 1


def cmd_energy(args) -> int:
    outdir = _outdir(args)
    t0 = time.monotonic()
    config = _sim_config(args)
    result = run(config)
    _write_ndjson(outdir / "records.ndjson", _result_records(result))
    _write_ndjson(outdir / "stations.ndjson", _station_records(result))
    bounded = (
        result.records[0].Es_proxy <= 0
        or max(r.Es_proxy for r in result.records) <= 2.0 * result.records[0].Es_proxy
    )
    _write_json(outdir / "summary.json", {"Es_bounded": bounded, **result.summary})
    _manifest(args, outdir, {"wall_clock_s": time.monotonic() - t0})
    print(f"energy: Es bounded={bounded} -> {outdir}")
    return 0 if bounded else 1


def cmd_dump(args) -> int:
    outdir = _outdir(args)
    t0 = time.monotonic()
    times = [float(t) for t in args.times.split(",")]
    if args.t_end is None:
        args.t_end = max(times)
    config = _sim_config(args)
    config.store_fields = True
    result = run(config)
    for want in times:
        best = min(result.fields, key=lambda f: abs(f[0] - want))
        t, u, _ = best
        dump_csv(u, str(outdir / f"field_t{want:g}.csv"))
    _manifest(args, outdir, {"wall_clock_s": time.monotonic() - t0})
    print(f"dump: {len(times)} fields -> {outdir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="membrane-lab",
        description="Numerical laboratory for light-speed membrane traveling waves",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        p.add_argument("--outdir", default=None, help="output directory")
        if config:
            p.add_argument("--config", default=None, help="JSON config file")

    p = sub.add_parser("verify-exact", help="residual convergence of exact families")
    p.add_argument("--family", default="all",
                   choices=["affine", "lightspeed", "lightspeed-sum", "superluminal", "all"])
    p.add_argument("--profile", default="sech")
    p.add_argument("--amplitude", type=float, default=0.5)
    p.add_argument("--grids", default="65,129,257")
    p.add_argument("--scheme", type=int, default=4, choices=[2, 4])
    common(p, config=False)
    p.set_defaults(func=cmd_verify_exact)

    p = sub.add_parser("inequalities", help="weighted estimate ratio statistics")
    p.add_argument("--which", default="all",
                   choices=["hardy", "nullform", "sobolev", "derivative", "all"])
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--refine", type=int, default=33, help="base lattice points per axis")
    common(p, config=False)
    p.set_defaults(func=cmd_inequalities)

    p = sub.add_parser("commutators", help="[Box, Gamma] coefficients on polynomials")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--count", type=int, default=25)
    common(p, config=False)
    p.set_defaults(func=cmd_commutators)

    for name, fn in (("evolve", cmd_evolve), ("decay", cmd_decay), ("energy", cmd_energy)):
        p = sub.add_parser(name)
        common(p)
        p.add_argument("--epsilon", type=float, default=None)
        p.add_argument("--t-end", dest="t_end", type=float, default=None)
        p.add_argument("--grid-n", dest="grid_n", type=int, default=None)
        p.add_argument("--half-width", dest="half_width", type=float, default=None)
        p.add_argument("--cfl", type=float, default=None)
        p.add_argument("--scheme", type=int, default=None, choices=[2, 4])
        p.add_argument("--profile", default=None)
        p.add_argument("--amplitude", type=float, default=None)
        p.add_argument("--no-background", action="store_true")
        p.set_defaults(func=fn)

    p = sub.add_parser("dump", help="CSV field dumps at requested times")
    common(p)
    p.add_argument("--times", default="0")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--t-end", dest="t_end", type=float, default=None)
    p.add_argument("--grid-n", dest="grid_n", type=int, default=None)
    p.add_argument("--half-width", dest="half_width", type=float, default=None)
    p.add_argument("--cfl", type=float, default=None)
    p.add_argument("--scheme", type=int, default=None, choices=[2, 4])
    p.add_argument("--profile", default=None)
    p.add_argument("--amplitude", type=float, default=None)
    p.add_argument("--no-background", action="store_true")
    p.set_defaults(func=cmd_dump)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
