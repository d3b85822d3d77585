"""Command-line surface: spectrum, verify, refute, wavefunction, sweep.

Exit codes: 0 success, 1 usage/config error, 2 empty result,
3 verification mismatch.  All file writes are whole-file atomic
(write-temp-then-rename) and every output carries a schema_version
field.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import config as cfgmod
from . import shooting, spectrum, wavefunction
from .config import RunConfig, SCHEMA_VERSION, dump_config, parse_config
from .errors import ConfigError, SolverError
from .model import (PhysicalParams, SymmetryKind, bound_window, map_coeffs,
                    pekeris_coeffs)
from .shooting import ShootConfig

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_EMPTY = 2
EXIT_MISMATCH = 3

VERIFY_REL_TOL = 1e-6

_SPECTRUM_COLUMNS = ("symmetry", "kappa", "n_r", "E", "eps", "delta_plus",
                     "q_residual", "bracket_lo", "bracket_hi")


def atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _rows_to_csv(columns, rows) -> str:
    lines = [f"# schema_version={SCHEMA_VERSION}"]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_cell(row.get(col)) for col in columns))
    return "\n".join(lines) + "\n"


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _report_json(payload: dict) -> str:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def read_spectrum_csv(path: str) -> list[dict]:
    """Parse a spectrum/sweep CSV, rejecting unknown schema versions."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or not lines[0].startswith("# schema_version="):
        raise ConfigError(f"{path}: missing schema_version header")
    version = int(lines[0].split("=", 1)[1])
    if version != SCHEMA_VERSION:
        raise ConfigError(f"{path}: unknown schema_version {version}")
    body = [ln for ln in lines[1:] if ln and not ln.startswith("#")]
    header = body[0].split(",")
    return [dict(zip(header, ln.split(","))) for ln in body[1:]]


def read_report_json(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"{path}: unknown schema_version "
                          f"{payload.get('schema_version')}")
    return payload


# ---------------------------------------------------------------------------
# command implementations
# ---------------------------------------------------------------------------

def _level_rows(levels) -> list[dict]:
    rows = []
    for lv in levels:
        rows.append({
            "symmetry": lv.symmetry.value,
            "kappa": lv.kappa,
            "n_r": lv.n_r,
            "E": lv.E,
            "eps": math.sqrt(lv.coeffs.eps_sq),
            "delta_plus": lv.coeffs.delta_plus,
            "q_residual": lv.q_residual,
            "bracket_lo": lv.bracket[0],
            "bracket_hi": lv.bracket[1],
        })
    return rows


def _compute_levels(cfg: RunConfig, coeff_tweak=None):
    d = pekeris_coeffs(cfg.params.alpha, cfg.params.r_e)
    levels = spectrum.enumerate_levels(
        cfg.params, cfg.symmetry, d,
        n_grid=cfg.tolerances.n_grid,
        margin_frac=cfg.tolerances.margin_frac,
        tol_q=cfg.tolerances.tol_q,
        wf_points=cfg.tolerances.wf_points,
        coeff_tweak=coeff_tweak,
    )
    return d, levels


def cmd_spectrum(cfg: RunConfig, out_path: str | None = None) -> int:
    window = bound_window(cfg.params, cfg.symmetry,
                          pekeris_coeffs(cfg.params.alpha, cfg.params.r_e))
    if out_path is None:
        ext = cfg.output.format
        out_path = os.path.join(cfg.output.directory, f"spectrum.{ext}")
    if window is None:
        _write_spectrum(out_path, cfg.output.format, [])
        print("empty bound window: no energies with eps2 > 0", file=sys.stderr)
        return EXIT_EMPTY
    _, levels = _compute_levels(cfg)
    rows = _level_rows(levels)
    _write_spectrum(out_path, cfg.output.format, rows)
    print(f"wrote {len(rows)} level(s) to {out_path}")
    if not rows:
        print("bound window is nonempty but holds no quantization roots",
              file=sys.stderr)
        return EXIT_EMPTY
    return EXIT_OK


def _write_spectrum(path: str, fmt: str, rows: list[dict]) -> None:
    if fmt == "json":
        atomic_write(path, _report_json({"rows": rows}))
    else:
        atomic_write(path, _rows_to_csv(_SPECTRUM_COLUMNS, rows))


def _rel_diff(a: float, b: float, scale_floor: float) -> float:
    return abs(a - b) / max(abs(b), scale_floor)


def cmd_verify(cfg: RunConfig, out_path: str | None = None,
               corrupt_beta2: float = 0.0,
               centrifugal_shift: bool = False) -> int:
    """Cross-check closed-form roots against the shooting oracle."""
    if out_path is None:
        out_path = os.path.join(cfg.output.directory, "verify.json")
    d = pekeris_coeffs(cfg.params.alpha, cfg.params.r_e)
    window = bound_window(cfg.params, cfg.symmetry, d)
    tweak = _beta2_corruptor(corrupt_beta2) if corrupt_beta2 else None
    if window is None:
        payload = {"pairs": [], "orphans_closed": [], "orphans_oracle": [],
                   "window": None, "verdict": "empty"}
        atomic_write(out_path, _report_json(payload))
        print("empty bound window; nothing to verify")
        return EXIT_OK

    _, levels = _compute_levels(cfg, coeff_tweak=tweak)
    closed = [lv.E for lv in levels]

    shoot_cfg = ShootConfig(steps=cfg.tolerances.oracle_steps)
    oracle = shooting.oracle_eigenvalues(cfg.params, cfg.symmetry, d, window,
                                         shoot_cfg,
                                         margin_frac=cfg.tolerances.margin_frac)
    fine_cfg = ShootConfig(steps=2 * cfg.tolerances.oracle_steps)
    oracle_fine = shooting.oracle_eigenvalues(cfg.params, cfg.symmetry, d, window,
                                              fine_cfg,
                                              margin_frac=cfg.tolerances.margin_frac)

    scale_floor = 1e-3 * window.width
    pairs, orphans_closed, orphans_oracle = _match(closed, oracle, scale_floor)

    grid_shift = None
    if len(oracle) == len(oracle_fine) and oracle:
        grid_shift = max(_rel_diff(a, b, scale_floor)
                         for a, b in zip(oracle, oracle_fine))

    payload = {
        "window": {"lo": window.lo, "hi": window.hi},
        "pairs": pairs,
        "orphans_closed": orphans_closed,
        "orphans_oracle": orphans_oracle,
        "oracle_grid_shift_2x_steps": grid_shift,
        "rel_tol": VERIFY_REL_TOL,
        "corrupt_beta2": corrupt_beta2,
    }
    if centrifugal_shift:
        exact_cfg = dataclasses.replace(shoot_cfg, exact_centrifugal=True)
        exact = shooting.oracle_eigenvalues(cfg.params, cfg.symmetry, d, window,
                                            exact_cfg,
                                            margin_frac=cfg.tolerances.margin_frac)
        payload["exact_centrifugal"] = {
            "eigenvalues": exact,
            "n_pekeris": len(oracle),
            "max_shift": (max(abs(a - b) for a, b in zip(oracle, exact))
                          if len(exact) == len(oracle) and oracle else None),
        }

    ok = not orphans_closed and not orphans_oracle and \
        all(pr["rel_diff"] <= VERIFY_REL_TOL for pr in pairs)
    payload["verdict"] = "match" if ok else "mismatch"
    atomic_write(out_path, _report_json(payload))
    if ok:
        n = len(pairs)
        worst = max((pr["rel_diff"] for pr in pairs), default=0.0)
        print(f"verified {n} level(s); worst relative difference {worst:.3e}")
        return EXIT_OK
    print(f"verification mismatch: {len(orphans_closed)} unmatched closed-form, "
          f"{len(orphans_oracle)} unmatched oracle level(s); see {out_path}",
          file=sys.stderr)
    return EXIT_MISMATCH


def _match(closed: list[float], oracle: list[float], scale_floor: float):
    """Greedy nearest-neighbour pairing of two ascending eigenvalue lists."""
    pairs = []
    used = set()
    orphans_closed = []
    for e_c in closed:
        best, best_d = None, math.inf
        for j, e_o in enumerate(oracle):
            if j in used:
                continue
            dist = abs(e_c - e_o)
            if dist < best_d:
                best, best_d = j, dist
        if best is not None and _rel_diff(e_c, oracle[best], scale_floor) <= VERIFY_REL_TOL:
            used.add(best)
            pairs.append({"E_closed": e_c, "E_oracle": oracle[best],
                          "rel_diff": _rel_diff(e_c, oracle[best], scale_floor)})
        else:
            orphans_closed.append(e_c)
    orphans_oracle = [e for j, e in enumerate(oracle) if j not in used]
    return pairs, orphans_closed, orphans_oracle


def _beta2_corruptor(frac: float):
    """Fault-injection hook: scales beta2 to exercise the mismatch path."""
    def tweak(rc):
        beta2 = rc.beta2 * (1.0 + frac)
        radicand = 0.25 + rc.beta1 - beta2 + rc.eps_sq
        if radicand < 0:
            from .errors import NumericalError
            raise NumericalError("corrupted beta2 made the exponent complex")
        return dataclasses.replace(rc, beta2=beta2,
                                   delta_plus=0.5 + math.sqrt(radicand))
    return tweak


def cmd_refute(cfg: RunConfig, n_r_max: int = 3,
               out_path: str | None = None) -> int:
    """Evaluate polynomial-truncation candidates against the r=0 boundary."""
    if out_path is None:
        out_path = os.path.join(cfg.output.directory, "refute.json")
    d = pekeris_coeffs(cfg.params.alpha, cfg.params.r_e)
    seeds = spectrum.termination_spectrum(cfg.params, cfg.symmetry, d, n_r_max)
    _, levels = _compute_levels(cfg)
    true_energies = [lv.E for lv in levels]
    window = bound_window(cfg.params, cfg.symmetry, d)
    scale_floor = 1e-3 * window.width if window else 1.0

    candidates = []
    for seed in seeds:
        rec = wavefunction.assess_boundary(cfg.params, seed, cfg.symmetry, d,
                                           n_points=cfg.tolerances.wf_points)
        residual = shooting.nu_ode_residual(cfg.params, rec.E_nu, rec.n_r,
                                            cfg.symmetry, d)
        rec = dataclasses.replace(rec, ode_ok=residual <= 1e-6)
        nearest = min(true_energies, key=lambda e: abs(e - rec.E_nu), default=None)
        candidates.append({
            "n_r": rec.n_r,
            "E_nu": rec.E_nu,
            "boundary_value": rec.boundary_value,
            "ode_residual": residual,
            "ode_ok": rec.ode_ok,
            "verdict": "violates boundary" if rec.verdict else "satisfies boundary",
            "nearest_true_E": nearest,
            "nearest_rel_distance": (_rel_diff(rec.E_nu, nearest, scale_floor)
                                     if nearest is not None else None),
        })

    all_violate = bool(candidates) and all(
        c["verdict"] == "violates boundary" for c in candidates)
    payload = {
        "n_r_max": n_r_max,
        "candidates": candidates,
        "true_levels": true_energies,
        "summary": {
            "n_candidates": len(candidates),
            "all_violate_boundary": all_violate,
            "violation_threshold": wavefunction.VIOLATION_THRESHOLD,
        },
    }
    atomic_write(out_path, _report_json(payload))
    if not candidates:
        print("no truncation candidates inside the bound window "
              f"(n_r <= {n_r_max}); report written to {out_path}", file=sys.stderr)
        return EXIT_EMPTY
    print(f"{len(candidates)} candidate(s); all violate r=0 boundary: {all_violate}")
    return EXIT_OK


def cmd_wavefunction(cfg: RunConfig, kappa: int | None, n_r: int,
                     out_path: str | None = None) -> int:
    params = cfg.params
    if kappa is not None and kappa != params.kappa:
        params = dataclasses.replace(params, kappa=kappa)
        cfg = dataclasses.replace(cfg, params=params)
    _, levels = _compute_levels(cfg)
    matches = [lv for lv in levels if lv.n_r == n_r]
    if not matches:
        available = ", ".join(f"(kappa={lv.kappa}, n_r={lv.n_r})" for lv in levels) \
            or "none"
        print(f"no level with kappa={params.kappa}, n_r={n_r}; "
              f"available: {available}", file=sys.stderr)
        return EXIT_USAGE
    level = matches[0]
    table = wavefunction.build_table(params, level,
                                     n_points=cfg.tolerances.wf_points)
    if out_path is None:
        out_path = os.path.join(cfg.output.directory,
                                f"wavefunction_k{params.kappa}_n{n_r}.csv")
    meta = {
        "symmetry": level.symmetry.value,
        "kappa": level.kappa,
        "n_r": level.n_r,
        "E": repr(level.E),
        "eps": repr(math.sqrt(level.coeffs.eps_sq)),
        "delta_plus": repr(level.coeffs.delta_plus),
    }
    atomic_write(out_path, wavefunction.table_to_csv(table, meta))
    print(f"wrote wavefunction table to {out_path}")
    return EXIT_OK


_SWEEP_COLUMNS = ("sweep_field", "sweep_value", "status") + _SPECTRUM_COLUMNS


def cmd_sweep(cfg: RunConfig, field: str, lo: float, hi: float, n: int,
              out_path: str | None = None) -> int:
    numeric_fields = {"M", "hbar_c", "alpha", "V1", "V2", "r_e", "C_s", "C_ps"}
    if field not in numeric_fields:
        print(f"sweep field must be one of {sorted(numeric_fields)}, got {field!r}",
              file=sys.stderr)
        return EXIT_USAGE
    if n < 1:
        print("sweep needs n >= 1 points", file=sys.stderr)
        return EXIT_USAGE
    values = [lo] if n == 1 else list(np.linspace(lo, hi, n))

    def run_point(value: float):
        point_cfg = dataclasses.replace(
            cfg, params=dataclasses.replace(cfg.params, **{field: float(value)}))
        try:
            _, levels = _compute_levels(point_cfg)
            rows = _level_rows(levels)
            if not rows:
                return [{"sweep_field": field, "sweep_value": float(value),
                         "status": "empty"}]
            for row in rows:
                row.update(sweep_field=field, sweep_value=float(value), status="ok")
            return rows
        except SolverError as exc:
            return [{"sweep_field": field, "sweep_value": float(value),
                     "status": f"error: {type(exc).__name__}: {exc}"}]

    max_workers = min(len(values), os.cpu_count() or 1)
    env_cap = os.environ.get("RMDIRAC_THREADS")
    if env_cap:
        try:
            max_workers = max(1, min(max_workers, int(env_cap)))
        except ValueError:
            print(f"ignoring invalid RMDIRAC_THREADS={env_cap!r}", file=sys.stderr)
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(run_point, values))
    else:
        results = [run_point(v) for v in values]

    rows = [row for batch in results for row in batch]
    if out_path is None:
        ext = cfg.output.format
        out_path = os.path.join(cfg.output.directory, f"sweep_{field}.{ext}")
    if cfg.output.format == "json":
        atomic_write(out_path, _report_json({"rows": rows}))
    else:
        atomic_write(out_path, _rows_to_csv(_SWEEP_COLUMNS, rows))
    n_ok = sum(1 for r in rows if r.get("status") == "ok")
    print(f"swept {field} over [{lo}, {hi}] with {n} point(s); "
          f"{n_ok} level rows written to {out_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="rmdirac",
                     description="Bound states of a relativistic Rosen-Morse well")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="path to INI config (defaults embedded)")
        sp.add_argument("--symmetry", choices=[s.value for s in SymmetryKind])
        sp.add_argument("--out", help="output directory override")
        sp.add_argument("--format", choices=["csv", "json"])
        sp.add_argument("--out-file", help="explicit output file path")
        sp.add_argument("--dump-config", metavar="PATH",
                        help="write the effective config to PATH and exit")

    sp = sub.add_parser("spectrum", help="bound energies from the quantization roots")
    common(sp)

    sp = sub.add_parser("verify", help="cross-check against the shooting oracle")
    common(sp)
    sp.add_argument("--debug-corrupt-beta2", type=float, default=0.0,
                    metavar="FRAC", help="fault injection: scale beta2 by 1+FRAC")
    sp.add_argument("--centrifugal-shift", action="store_true",
                    help="also report eigenvalue shifts with the exact 1/r^2 term")

    sp = sub.add_parser("refute", help="boundary test of polynomial-truncation candidates")
    common(sp)
    sp.add_argument("--n-r-max", type=int, default=3)

    sp = sub.add_parser("wavefunction", help="write one normalized component table")
    common(sp)
    sp.add_argument("--kappa", type=int, default=None)
    sp.add_argument("--n-r", type=int, required=True)

    sp = sub.add_parser("sweep", help="run the spectrum over a parameter range")
    common(sp)
    sp.add_argument("--field", required=True)
    sp.add_argument("--lo", type=float, required=True)
    sp.add_argument("--hi", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)

    return parser


def _load_config(args) -> RunConfig:
    cfg = parse_config(args.config) if args.config else cfgmod.default_config()
    if args.symmetry:
        cfg = dataclasses.replace(cfg, symmetry=SymmetryKind(args.symmetry))
    if args.out:
        cfg = dataclasses.replace(
            cfg, output=dataclasses.replace(cfg.output, directory=args.out))
    if args.format:
        cfg = dataclasses.replace(
            cfg, output=dataclasses.replace(cfg.output, format=args.format))
    return cfg


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _load_config(args)
        if args.dump_config:
            atomic_write(args.dump_config, dump_config(cfg))
            print(f"wrote effective config to {args.dump_config}")
            return EXIT_OK
        if args.command == "spectrum":
            return cmd_spectrum(cfg, out_path=args.out_file)
        if args.command == "verify":
            return cmd_verify(cfg, out_path=args.out_file,
                              corrupt_beta2=args.debug_corrupt_beta2,
                              centrifugal_shift=args.centrifugal_shift)
        if args.command == "refute":
            return cmd_refute(cfg, n_r_max=args.n_r_max, out_path=args.out_file)
        if args.command == "wavefunction":
            return cmd_wavefunction(cfg, kappa=args.kappa, n_r=args.n_r,
                                    out_path=args.out_file)
        if args.command == "sweep":
            return cmd_sweep(cfg, field=args.field, lo=args.lo, hi=args.hi,
                             n=args.n, out_path=args.out_file)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
