"""Batch entry point: ``liouville-disk --config run.json --out DIR``.

Exit codes: 0 all checks passed, 1 a check failed, 2 invalid config,
3 numerical nonconvergence, 4 output path not writable.
"""

import argparse
import csv
import json
import logging
import os
import sys
import time

import jsonschema
import numpy as np

from . import analytic, blowup, greens, pohozaev, solver
from .exceptions import LiouvilleError, NoSolutionError, NonConvergenceError
from .fields import CurvatureFn, Field
from .geometry import UNIT_DISK, build_grid

log = logging.getLogger("liouville_disk")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_NONCONV, EXIT_IO = 0, 1, 2, 3, 4

SCENARIOS = ("selftest-green", "gelfand", "bubble", "extract", "pohozaev", "sweep")

SCHEMAS = {
    "gelfand": ["b", "lambda", "sup_u", "total_mass", "mass_ratio_8pi", "newton_iters", "residual"],
    "extract": ["k", "x1", "x2", "delta", "sup_u", "diag_2log", "local_mass_eps", "quant_m", "quant_dev"],
    "pohozaev": ["pivot_x1", "pivot_x2", "interior", "boundary_A", "boundary_B", "volume", "residual"],
    "sweep": ["b", "lambda", "u0", "local_mass", "total_mass", "quant_m", "quant_dev"],
    "bubble": ["lam", "probe", "probe_minus_log2", "local_mass", "mass_over_8pi"],
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "scenario": {"enum": list(SCENARIOS)},
        "grid": {"type": "array", "items": {"type": "integer", "minimum": 4}, "minItems": 2, "maxItems": 2},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "seed": {"type": "integer"},
        "params": {"type": "object"},
    },
    "additionalProperties": False,
}

DEFAULT_GRID = {"selftest-green": [96, 192], "gelfand": [48, 16], "bubble": [32, 64],
                "extract": [48, 96], "pohozaev": [32, 64], "sweep": [16, 16]}


class ConfigInvalid(Exception):
    pass


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(f"{float(x):.9g}"))


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return float(f"{x:.9g}") if np.isfinite(x) else str(x)
    return x


def emit_csv(rows, schema, path):
    """Write ``rows`` (sequences matching ``SCHEMAS[schema]``) as RFC-4180 CSV."""
    header = SCHEMAS[schema]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for r in rows:
            if len(r) != len(header):
                raise ValueError(f"row has {len(r)} fields, schema {schema} has {len(header)}")
            w.writerow([_fmt(v) for v in r])


def load_config(path, scenario=None):
    cfg = {}
    if path is not None:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigInvalid(f"cannot read config: {exc}") from exc
        if not text.strip():
            raise ConfigInvalid("config file is empty")
        try:
            cfg = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"config is not valid JSON: {exc}") from exc
    if scenario is not None:
        if not isinstance(cfg, dict):
            raise ConfigInvalid("config must be a JSON object")
        cfg = dict(cfg, scenario=scenario)
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigInvalid(f"invalid config: {exc.message}") from exc
    if "scenario" not in cfg:
        raise ConfigInvalid("no scenario given")
    cfg.setdefault("grid", DEFAULT_GRID[cfg["scenario"]])
    cfg.setdefault("tol", 1e-10)
    cfg.setdefault("seed", 0)
    cfg.setdefault("params", {})
    if cfg["grid"][1] % 2:
        raise ConfigInvalid("n_theta must be even")
    return cfg


class _Checks:
    def __init__(self):
        self.items = []

    def add(self, name, value, ok, target=None):
        self.items.append({"name": name, "value": value, "target": target, "passed": bool(ok)})
        return ok

    @property
    def passed(self):
        return all(c["passed"] for c in self.items)


def _param(p, key, default, kind=float):
    v = p.get(key, default)
    try:
        return [kind(x) for x in v] if isinstance(v, list) else kind(v)
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"parameter {key!r} has invalid value {v!r}") from exc


# ---------------------------------------------------------------------------
# scenarios; each returns (csv schema or None, rows, summary dict)


def _selftest_green(cfg, checks):
    rng = np.random.default_rng(cfg["seed"])
    n = 1000

    def disk_points(k):
        r = np.sqrt(rng.uniform(0.0, 0.98, k))
        t = rng.uniform(0.0, 2 * np.pi, k)
        return np.stack([r * np.cos(t), r * np.sin(t)], axis=1)

    x, y = disk_points(n), disk_points(n)
    sym = float(np.max(np.abs(greens.green(x, y) - greens.green(y, x))))
    checks.add("green_symmetry", sym, sym < 1e-12, 1e-12)
    t = rng.uniform(0.0, 2 * np.pi, n)
    on = np.stack([np.cos(t), np.sin(t)], axis=1)
    bd = float(np.max(np.abs(greens.green(on, y))))
    checks.add("green_boundary_vanishing", bd, bd < 1e-12, 1e-12)
    half = greens.green_ball_integral((0.0, 0.0), 0.5)
    checks.add("ball_integral_half", half, abs(half - 0.1491434) < 1e-6, 0.1491434)
    full = greens.green_ball_integral((0.0, 0.0), 1.0)
    checks.add("ball_integral_unit", full, abs(full - 0.25) < 1e-6, 0.25)
    xs, ys = disk_points(100), disk_points(100)
    h = 1e-6
    fd = np.stack([(greens.green(xs + [h, 0], ys) - greens.green(xs - [h, 0], ys)) / (2 * h),
                   (greens.green(xs + [0, h], ys) - greens.green(xs - [0, h], ys)) / (2 * h)], axis=1)
    g = greens.green_grad_x(xs, ys)
    rel = float(np.max(np.linalg.norm(g - fd, axis=1) / np.linalg.norm(g, axis=1)))
    checks.add("gradient_vs_central_differences", rel, rel < 1e-6, 1e-6)
    grid = build_grid(UNIT_DISK, *cfg["grid"])
    k = greens.assemble_kernel(grid)
    u = solver.apply_green(k, np.ones(grid.size))
    r2 = (grid.nodes**2).sum(axis=1)
    err = float(np.max(np.abs(u.values - (1.0 - r2) / 4.0)))
    checks.add("poisson_oracle", err, err < 1e-6, 1e-6)
    return None, [], {"poisson_sup_error": err}


def _gelfand(cfg, checks):
    p = cfg["params"]
    b_max = _param(p, "b_max", 100.0)
    default_b = [b for b in (0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0) if b < b_max] + [b_max]
    bs = _param(p, "b_values", default_b)
    grid = build_grid(UNIT_DISK, *cfg["grid"])
    k = greens.assemble_kernel(grid)
    rows = []
    ncfg = solver.NewtonConfig(tol=cfg["tol"])
    for b in bs:
        lam = analytic.gelfand_lambda(b)
        V = CurvatureFn.constant(grid, lam)
        if b < 1.0:
            sol = solver.newton_solve(k, V, None, ncfg)
        else:
            # upper branch: warm start from the closed-form family
            sol = solver.newton_solve(k, V, analytic.gelfand_u(b, grid.nodes), ncfg)
        ratio = sol.total_mass / analytic.EIGHT_PI
        rows.append([b, lam, sol.sup_u, sol.total_mass, ratio, sol.newton_iters, sol.residual_inf])
        exact = b / (1.0 + b)
        checks.add(f"mass_law_b={b:g}", ratio, abs(ratio / exact - 1.0) < 2e-3, exact)
    # explicit lambda values: minimal solution from the zero guess (fails beyond the fold)
    for lam in _param(p, "lambdas", []):
        sol = solver.newton_solve(k, CurvatureFn.constant(grid, lam), None, ncfg)
        b = analytic.b_from_sup(sol.sup_u)
        rows.append([b, lam, sol.sup_u, sol.total_mass, sol.total_mass / analytic.EIGHT_PI,
                     sol.newton_iters, sol.residual_inf])
    return "gelfand", rows, {"final_mass_ratio": rows[-1][4] if rows else None}


def _field_from_params(p, grid):
    kind = p.get("field", "two_bubble")
    if kind == "zero":
        return Field.constant(grid, 0.0), CurvatureFn.constant(grid, 1.0)
    if kind == "gelfand":
        b = _param(p, "b", 1.0)
        f = Field.from_function(grid, lambda q: analytic.gelfand_u(b, q), lambda q: analytic.gelfand_grad(b, q))
        return f, CurvatureFn.constant(grid, analytic.gelfand_lambda(b))
    if kind == "two_bubble":
        tb = analytic.two_bubble(_param(p, "lam", 50.0), _param(p, "sep", 0.5))
        return Field.from_function(grid, tb.u, tb.grad), CurvatureFn.from_function(grid, tb.V)
    raise ConfigInvalid(f"unknown field {kind!r}")


def _extract(cfg, checks):
    p = cfg["params"]
    grid = build_grid(UNIT_DISK, *cfg["grid"])
    u, V = _field_from_params(p, grid)
    eps = _param(p, "epsilon", 0.2)
    rep = blowup.extract_blowups(u, V, eps, _param(p, "threshold", 10.0))
    rows = []
    for i, (pt, q) in enumerate(zip(rep.points, rep.quantization)):
        rows.append([i, pt.x[0], pt.x[1], pt.delta, pt.sup_u, pt.diag_2log, pt.local_mass[float(eps)], q.m, q.deviation])
    if "expect_points" in p:
        n = int(p["expect_points"])
        checks.add("point_count", len(rep), len(rep) == n, n)
    if "mass_rel_tol" in p:
        tol = float(p["mass_rel_tol"])
        for i, pt in enumerate(rep.points):
            m = pt.local_mass[float(eps)]
            checks.add(f"local_mass_{i}", m, abs(m / analytic.EIGHT_PI - 1.0) < tol, analytic.EIGHT_PI)
    checks.add("residual_bounded", rep.residual_sup, rep.bounded, rep.threshold)
    return "extract", rows, {"residual_sup": rep.residual_sup, "sensitivity": rep.sensitivity}


def _pohozaev(cfg, checks):
    p = dict(cfg["params"])
    p.setdefault("field", "gelfand")
    grid = build_grid(UNIT_DISK, *cfg["grid"])
    u, V = _field_from_params(p, grid)
    pivots = p.get("pivots", [[0.0, 0.0]])
    analytic_grad = bool(p.get("analytic", True))
    tol = _param(p, "residual_tol", 1e-6 if analytic_grad else 5e-3)
    rows = []
    for piv in pivots:
        r = pohozaev.pohozaev_terms(u, V, piv, analytic=analytic_grad)
        rows.append([r.pivot[0], r.pivot[1], r.interior, r.boundary_A, r.boundary_B, r.volume_term, r.residual])
        checks.add(f"identity_pivot={piv}", r.residual, abs(r.residual) < tol, tol)
    return "pohozaev", rows, {}


def _bubble(cfg, checks):
    p = cfg["params"]
    grid = build_grid(UNIT_DISK, *cfg["grid"])
    rows = []
    for lam in _param(p, "lams", [1.0, 10.0, 100.0]):
        pb = analytic.PlanarBubble(lam)
        probe = blowup.li_shafrir_probe(Field.from_function(grid, pb.u, pb.grad), (0.0, 0.0))
        db = analytic.DiskBubble(lam, (0.0, 0.0))
        f = Field.from_function(grid, db.u, db.grad)
        m = blowup.local_mass(f, lambda q, d=db: d.source(q) * np.exp(-d.u(q)), (0.0, 0.0), 1.0)
        rows.append([lam, probe, probe - np.log(2.0), m, m / analytic.EIGHT_PI])
        checks.add(f"li_shafrir_lam={lam:g}", probe, abs(probe - np.log(2.0)) < 1e-4, np.log(2.0))
    return "bubble", rows, {}


def _sweep(cfg, checks):
    p = cfg["params"]
    rho = _param(p, "rho", 0.1)
    rows, devs = [], []
    for b in _param(p, "b_values", [1e2, 1e3, 1e4]):
        lam = analytic.gelfand_lambda(b)
        profiles = solver.radial_shoot(lam)
        prof = max(profiles, key=lambda q: q.u0)
        lm = prof.mass(rho)
        tm = prof.mass(1.0)
        q = blowup.quantization_check(lm)
        rows.append([b, lam, prof.u0, lm, tm, q.m, q.deviation])
        devs.append(q.deviation)
        exact = analytic.EIGHT_PI * b / (1.0 + b)
        checks.add(f"total_mass_b={b:g}", tm, abs(tm / exact - 1.0) < 1e-3, exact)
        checks.add(f"quant_m_b={b:g}", q.m, q.m == 1, 1)
    mono = all(d1 > d2 for d1, d2 in zip(devs[:-1], devs[1:]))
    checks.add("deviation_monotone", devs, mono)
    return "sweep", rows, {}


RUNNERS = {"selftest-green": _selftest_green, "gelfand": _gelfand, "bubble": _bubble,
           "extract": _extract, "pohozaev": _pohozaev, "sweep": _sweep}


def run(cfg, out_dir):
    """Execute one scenario, writing ``report.json`` and its CSV into ``out_dir``; return the exit code."""
    checks = _Checks()
    report = {"scenario": cfg.get("scenario"), "config": cfg, "checks": checks.items}
    code = EXIT_OK
    t0 = time.perf_counter()
    try:
        schema, rows, summary = RUNNERS[cfg["scenario"]](cfg, checks)
        report["summary"] = summary
        if schema is not None:
            path = os.path.join(out_dir, f"{cfg['scenario']}.csv")
            emit_csv(rows, schema, path)
            report["csv"] = os.path.basename(path)
        code = EXIT_OK if checks.passed else EXIT_FAILED
    except ConfigInvalid as exc:
        report["error"] = str(exc)
        code = EXIT_CONFIG
    except (NonConvergenceError, NoSolutionError) as exc:
        report["error"] = str(exc)
        report["failed_stage"] = f"{cfg['scenario']}:{getattr(exc, 'stage', 'shoot')}"
        code = EXIT_NONCONV
    except LiouvilleError as exc:
        report["error"] = str(exc)
        code = EXIT_CONFIG
    report["elapsed_s"] = time.perf_counter() - t0
    report["exit_code"] = code
    report["passed"] = code == EXIT_OK
    _write_report(report, out_dir)
    return code


def _write_report(report, out_dir):
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        json.dump(_jsonable(report), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _prepare_out(out_dir):
    try:
        os.makedirs(out_dir, exist_ok=True)
        probe = os.path.join(out_dir, ".write-test")
        with open(probe, "w"):
            pass
        os.remove(probe)
    except OSError:
        return False
    return True


def main(argv=None):
    ap = argparse.ArgumentParser(prog="liouville-disk", description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="JSON run configuration")
    ap.add_argument("--out", default="out", help="output directory (default: ./out)")
    ap.add_argument("--scenario", choices=SCENARIOS, help="override the configured scenario")
    ap.add_argument("--quiet", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")

    if not _prepare_out(args.out):
        print(f"error: output directory {args.out!r} is not writable", file=sys.stderr)
        return EXIT_IO
    try:
        cfg = load_config(args.config, args.scenario)
    except ConfigInvalid as exc:
        print(f"error: {exc}", file=sys.stderr)
        _write_report({"error": str(exc), "exit_code": EXIT_CONFIG, "passed": False, "checks": []}, args.out)
        return EXIT_CONFIG
    try:
        code = run(cfg, args.out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    if not args.quiet:
        with open(os.path.join(args.out, "report.json")) as fh:
            rep = json.load(fh)
        for c in rep["checks"]:
            log.info("%s %s = %s", "PASS" if c["passed"] else "FAIL", c["name"], c["value"])
        if "error" in rep:
            log.info("error: %s", rep["error"])
        log.info("exit %d", code)
    return code


if __name__ == "__main__":
    sys.exit(main())
