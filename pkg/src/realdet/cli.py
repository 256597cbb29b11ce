"""Batch entry point: ``realdet gamma | check | sweep``.

Exit codes: 0 pass, 1 invariant failure, 2 usage error, 3 numeric failure.
Settings come from built-in defaults, then ``--config FILE`` (flat
``key = value`` lines), then explicit flags.  Every report starts with a
``# config:`` line echoing the effective settings.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import deformation_cocycle as dc
from . import suites
from . import zeta_pa as zp
from .deformations import VectorField, flow
from .errors import NumericalError, PreconditionError
from .uniformize import DeformedCylinder, uniformize

EXIT_OK, EXIT_INVARIANT, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
GAMMA_REL_TOL = 2e-2
GAMMA_ZERO_FLOOR = 1e-3  # times max(|c|, 1)
ORACLE_ZERO = 1e-12  # quadrature noise in the oracle for real pairs

SWEEP_HEADERS = {
    "tau-vs-t": ("t", "tau", "residual"),
    "gamma-vs-h": ("h", "gamma", "oracle", "abs_err", "err_ratio"),
    "logdet-vs-tau": ("tau", "logdet_direct", "logdet_jacobi", "scheme_gap"),
}
CHECK_HEADER = ("suite", "invariant", "defect", "tolerance", "status")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    n_theta: int = 256
    n_x: int = 129
    N: int = 128
    M: int = 48
    h: float = 0.02
    c: float = 1.0
    seed: int = 0
    out: str = ""

    def validate(self) -> "RunConfig":
        if self.n_theta < 64 or self.n_theta > 4096 or self.n_theta % 2:
            raise UsageError("grid: theta count must be even, 64..4096")
        if self.n_x < 65 or self.n_x > 4097 or self.n_x % 2 == 0:
            raise UsageError("grid: x count must be odd, 65..4097")
        if not 8 <= self.N <= 1024:
            raise UsageError("modes must lie in 8..1024")
        if not 4 <= self.M <= 256:
            raise UsageError("unif-modes must lie in 4..256")
        if not 1e-3 <= self.h <= 5e-2:
            raise UsageError("h must lie in [1e-3, 5e-2]")
        if not math.isfinite(self.c):
            raise UsageError("c must be finite")
        if self.seed < 0:
            raise UsageError("seed must be non-negative")
        return self

    def header(self) -> str:
        return (f"# config: grid={self.n_theta}x{self.n_x} modes={self.N} unif-modes={self.M} "
                f"h={self.h!r} c={self.c!r} seed={self.seed}")

    def suite_config(self) -> suites.SuiteConfig:
        return suites.SuiteConfig(self.n_theta, self.n_x, self.N, self.M, self.h, self.c, self.seed)


def _parse_grid(text: str) -> tuple:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise UsageError(f"grid must look like 256x129, got {text!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise UsageError(f"grid must look like 256x129, got {text!r}") from None


_CONFIG_KEYS = {
    "grid": lambda cfg, v: replace(cfg, n_theta=_parse_grid(v)[0], n_x=_parse_grid(v)[1]),
    "modes": lambda cfg, v: replace(cfg, N=int(v)),
    "unif-modes": lambda cfg, v: replace(cfg, M=int(v)),
    "h": lambda cfg, v: replace(cfg, h=float(v)),
    "c": lambda cfg, v: replace(cfg, c=float(v)),
    "seed": lambda cfg, v: replace(cfg, seed=int(v)),
    "out": lambda cfg, v: replace(cfg, out=v),
}


def read_config(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("_", "-")
        if key not in _CONFIG_KEYS:
            raise UsageError(f"config line {lineno}: unknown key {key!r}")
        out[key] = value
    return out


def build_config(args) -> RunConfig:
    settings = {}
    if args.config:
        try:
            with open(args.config) as fh:
                settings.update(read_config(fh.read()))
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
    flags = {"grid": args.grid, "modes": args.modes, "unif-modes": args.unif_modes,
             "h": args.h, "c": args.c, "seed": args.seed, "out": args.out}
    settings.update({k: str(v) for k, v in flags.items() if v is not None})
    cfg = RunConfig()
    for key, value in settings.items():
        try:
            cfg = _CONFIG_KEYS[key](cfg, value)
        except ValueError:
            raise UsageError(f"bad value for {key}: {value!r}") from None
    return cfg.validate()


def parse_range(text: str) -> list:
    """``a:b:n`` for n evenly spaced points, or a comma list."""
    text = (text or "").strip()
    try:
        if ":" in text:
            a, b, n = text.split(":")
            values = list(np.linspace(float(a), float(b), int(n)))
        else:
            values = [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"bad range {text!r}") from None
    if not values:
        raise UsageError("empty range")
    return [float(v) for v in values]


def _emit(cfg: RunConfig, body: str, stdout) -> None:
    text = cfg.header() + "\n" + body
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    stdout.write(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    wr.writerows(rows)
    return buf.getvalue()


def _field(spec: str) -> VectorField:
    try:
        return VectorField.parse(spec)
    except (PreconditionError, ValueError) as exc:
        raise UsageError(f"cannot parse field {spec!r}: {exc}") from None


# ---------------------------------------------------------------- commands

def cmd_gamma(args, cfg: RunConfig, stdout) -> int:
    v, w = _field(args.v), _field(args.w)
    res = dc.gamma_lie(v, w, cfg.c, cfg.h, n_theta=cfg.n_theta, n_x=cfg.n_x, M=cfg.M,
                       order=cfg.N, workers=args.workers)
    _emit(cfg, dc.results_csv([res], timing=not args.no_timing), stdout)
    if abs(res.gf_imag) > ORACLE_ZERO * max(abs(cfg.c), 1.0):
        ok = res.rel_err <= GAMMA_REL_TOL
    else:
        ok = abs(res.gamma) <= GAMMA_ZERO_FLOOR * max(abs(cfg.c), 1.0)
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_check(args, cfg: RunConfig, stdout, stderr) -> int:
    checks = suites.run(args.suite, cfg.suite_config())
    rows = [c.line() for c in checks]
    _emit(cfg, ",".join(CHECK_HEADER) + "\n" + "".join(r + "\n" for r in rows), stdout)
    failed = [c for c in checks if not c.passed]
    for c in failed:
        stderr.write(f"invariant failed: {c.suite}.{c.name} defect {c.defect:.3e} > {c.tol:.1e}\n")
    return EXIT_INVARIANT if failed else EXIT_OK


def _sweep_rows(kind: str, values, args, cfg: RunConfig):
    if kind == "tau-vs-t":
        v = _field(args.v)

        def one(t):
            u = uniformize(DeformedCylinder(flow(v, t, N=cfg.N)), cfg.M)
            return [repr(t), repr(u.tau), repr(u.residual)]
    elif kind == "gamma-vs-h":
        v, w = _field(args.v), _field(args.w)
        bad = [h for h in values if not 1e-3 <= h <= 5e-2]
        if bad:
            raise UsageError(f"h values outside [1e-3, 5e-2]: {bad}")

        def one(h):
            res = dc.gamma_lie(v, w, cfg.c, h, richardson=False, n_theta=cfg.n_theta, n_x=cfg.n_x,
                               M=cfg.M, order=cfg.N)
            return [h, res.gamma, res.gf_imag]
    else:
        bad = [t for t in values if not 0.1 <= t <= 10]
        if bad:
            raise UsageError(f"tau values outside [0.1, 10]: {bad}")

        def one(tau):
            r = zp.detz_report(tau)
            return [repr(tau), repr(r["direct"]), repr(r["jacobi"]), repr(r["scheme_gap"])]

    with ThreadPoolExecutor(max(1, args.workers)) as ex:
        rows = list(ex.map(one, values))
    if kind == "gamma-vs-h":
        out, prev = [], None
        for h, g, oracle in rows:
            err = abs(g - oracle)
            ratio = prev / err if prev is not None and err > 0 else float("nan")
            out.append([repr(h), repr(g), repr(oracle), repr(err), repr(ratio)])
            prev = err
        rows = out
    return rows


def cmd_sweep(args, cfg: RunConfig, stdout) -> int:
    values = parse_range(args.range if args.range is not None else _DEFAULT_RANGES[args.kind])
    rows = _sweep_rows(args.kind, values, args, cfg)
    _emit(cfg, _csv(SWEEP_HEADERS[args.kind], rows), stdout)
    return EXIT_OK


_DEFAULT_RANGES = {"tau-vs-t": "0:0.05:6", "gamma-vs-h": "0.04,0.02,0.01", "logdet-vs-tau": "0.5,1,2,4"}


# ------------------------------------------------------------------ parser

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", help="theta x x nodes, e.g. 256x129")
    p.add_argument("--modes", type=int, help="Fourier order of boundary maps")
    p.add_argument("--unif-modes", type=int, dest="unif_modes", help="uniformizer modes per family")
    p.add_argument("--h", type=float, help="stencil step")
    p.add_argument("--c", type=float, help="central charge")
    p.add_argument("--seed", type=int, help="seed for randomized suites")
    p.add_argument("--out", help="also write the report to this file")
    p.add_argument("--config", help="key = value settings file; flags win")
    p.add_argument("--workers", type=int, default=1, help="threads for independent legs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="realdet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gamma", help="Lie cocycle of two fields vs the Gel'fand-Fuks value")
    g.add_argument("--v", required=True, help='field DSL, e.g. "cos(1)" or "i*sin(2)"')
    g.add_argument("--w", required=True)
    g.add_argument("--no-timing", action="store_true", help="write wall_ms as 0 for reproducible rows")
    _common(g)

    c = sub.add_parser("check", help="run a seeded invariant suite")
    c.add_argument("suite", choices=[*suites.SUITES, "all"])
    _common(c)

    s = sub.add_parser("sweep", help="convergence-study CSV")
    s.add_argument("kind", choices=list(SWEEP_HEADERS))
    s.add_argument("--range", help="a:b:n or comma list")
    s.add_argument("--v", default="cos(1)")
    s.add_argument("--w", default="i*sin(1)")
    _common(s)
    return parser


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = build_config(args)
        if args.command == "gamma":
            return cmd_gamma(args, cfg, stdout)
        if args.command == "check":
            return cmd_check(args, cfg, stdout, stderr)
        return cmd_sweep(args, cfg, stdout)
    except UsageError as exc:
        stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except NumericalError as exc:
        stderr.write(f"numeric failure: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC
    except PreconditionError as exc:
        stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
