"""Real determinant lines of straight cylinders.

An element lam[g] is a scalar times an admissible metric; lam1[g1] and
lam2[g2] are identified when lam1 = exp(c <g1|g2>) lam2.  All vectors live
on the uniformized straight grid, so comparisons are one pairing.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .anomaly_field import ConformalFactor, CylinderGrid, cutoff_eval, CutoffProfile, pairing
from .errors import ChargeMismatchError, GridMismatchError, PreconditionError, SeamError
from .uniformize import DEFAULT_MODES, DeformedCylinder, uniformize

BUMP_EPS = 0.1
BUMP_MARGIN = 0.1
SEAM_TOL = 1e-12


@dataclass(frozen=True)
class Charge:
    c: float

    def __post_init__(self):
        if not math.isfinite(self.c):
            raise PreconditionError("central charge must be finite")


@dataclass(frozen=True, eq=False)
class DetVector:
    lam: float
    factor: ConformalFactor
    charge: Charge

    def scaled(self, s: float) -> "DetVector":
        return DetVector(s * self.lam, self.factor, self.charge)

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "factor": self.factor.to_csv(), "charge": self.charge.c}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "DetVector":
        d = json.loads(s)
        return cls(float(d["lambda"]), ConformalFactor.from_csv(d["factor"]), Charge(float(d["charge"])))


def _compatible(a: DetVector, b: DetVector):
    if a.charge != b.charge:
        raise ChargeMismatchError(f"charges {a.charge.c} and {b.charge.c} differ")
    if a.factor.grid != b.factor.grid:
        raise GridMismatchError("determinant vectors live on different cylinders")


def transfer(a: DetVector, b: DetVector) -> float:
    """Scalar mu with lam_b[g_b] = mu [g_a]."""
    return math.exp(a.charge.c * pairing(a.factor, b.factor)) * b.lam


def normalize(a: DetVector, reference: ConformalFactor) -> DetVector:
    """Re-express a on the reference metric."""
    ref = DetVector(1.0, reference, a.charge)
    _compatible(ref, a)
    return DetVector(transfer(ref, a), reference, a.charge)


def equal(a: DetVector, b: DetVector, rtol: float = 1e-8) -> bool:
    return equality_defect(a, b) <= rtol


def equality_defect(a: DetVector, b: DetVector) -> float:
    """Relative mismatch of lam_a against exp(c<g_a|g_b>) lam_b."""
    _compatible(a, b)
    mu = transfer(a, b)
    scale = max(abs(a.lam), abs(mu))
    if scale == 0:
        return 0.0
    return abs(a.lam - mu) / scale


def det_add(a: DetVector, b: DetVector) -> DetVector:
    _compatible(a, b)
    return DetVector(a.lam + transfer(a, b), a.factor, a.charge)


def bump_metric(grid: CylinderGrid, eps: float = BUMP_EPS, margin: float = BUMP_MARGIN, modulation: float = 0.0) -> ConformalFactor:
    """exp(2 eps s) with s a quintic bump, flat on margins of the given fraction.

    ``modulation`` adds a cos(theta) ripple to produce a second, distinct
    admissible metric.
    """
    L = grid.x_hi - grid.x_lo
    lo, hi = grid.x_lo + margin * L, grid.x_hi - margin * L
    mid = 0.5 * (lo + hi)
    up = CutoffProfile(lo, mid)
    down = CutoffProfile(mid, hi)
    th, x = grid.mesh()
    s = np.where(x <= mid, 1.0 - cutoff_eval(up, x), cutoff_eval(down, x))
    f = 2 * eps * s * (1 + modulation * np.cos(th))
    flat_width = margin * L * 0.999
    return ConformalFactor(grid, f, (flat_width, flat_width))


def straight_grid(tau: float, n_theta: int = 256, n_x: int = 129) -> CylinderGrid:
    return CylinderGrid(n_theta, n_x, 0.0, float(tau))


def mu_c(A: DeformedCylinder, charge: Charge, n_theta: int = 256, n_x: int = 129,
         M: int = DEFAULT_MODES, metric: ConformalFactor | None = None) -> DetVector:
    """Global section exp(-c <flat|g>) [g] on the uniformized cylinder."""
    u = uniformize(A, M)
    grid = straight_grid(u.tau, n_theta, n_x)
    g = bump_metric(grid) if metric is None else metric
    if g.grid != grid:
        raise GridMismatchError("metric is not on the uniformized grid")
    lam = math.exp(-charge.c * pairing(ConformalFactor.flat(grid), g))
    return DetVector(lam, g, charge)


def _stack(fa: ConformalFactor, fb: ConformalFactor) -> ConformalFactor:
    ga, gb = fa.grid, fb.grid
    if ga.n_theta != gb.n_theta or not math.isclose(ga.dx, gb.dx, rel_tol=1e-12):
        raise SeamError("cylinders have different theta resolution or x spacing")
    seam = max(np.max(np.abs(fa.f[:, -3:])), np.max(np.abs(fb.f[:, :3])))
    if seam > SEAM_TOL:
        raise SeamError(f"factor does not vanish at the seam ({seam:.2e})")
    height = ga.x_hi + (gb.x_hi - gb.x_lo)
    grid = CylinderGrid(ga.n_theta, ga.n_x + gb.n_x - 1, ga.x_lo, height)
    f = np.concatenate([fa.f, fb.f[:, 1:]], axis=1)
    return ConformalFactor(grid, f, (fa.admissible_margins[0], fb.admissible_margins[1]))


def sew(a: DetVector, b: DetVector) -> DetVector:
    """lam_a lam_b [g_a u g_b] on the stacked cylinder."""
    if a.charge != b.charge:
        raise ChargeMismatchError("cannot sew across different charges")
    return DetVector(a.lam * b.lam, _stack(a.factor, b.factor), a.charge)


def log_gamma_cyl(ga: ConformalFactor, gb: ConformalFactor, charge: Charge) -> float:
    flat = lambda g: ConformalFactor.flat(g.grid)  # noqa: E731
    gab = _stack(ga, gb)
    return charge.c * (pairing(flat(ga), ga) + pairing(flat(gb), gb) - pairing(flat(gab), gab))


def gamma_cyl(ga: ConformalFactor, gb: ConformalFactor, charge: Charge) -> float:
    """Sewing cocycle of two straight cylinders carrying admissible metrics."""
    return math.exp(log_gamma_cyl(ga, gb, charge))
