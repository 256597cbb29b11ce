"""The central-extension cocycle on complex deformations and its Lie-algebra limit.

log Gamma(phi, psi) = c [ <Fhat_{phi psi} | g_{phi psi}> - <Fhat_phi | g_phi>
                          - <Fhat_psi | g_psi> ]

where Fhat_* are uniformizer factors and g_* the admissible metrics built
from the cut-offs chi1, chi2 and rho_t(w) = chi1(Im phi_t(w)).

Every log F is harmonic, so Delta_0 of the pairing's sum vanishes outside the
cut-off transition bands.  The default route integrates each term only over
those bands, in the holomorphic coordinate in which the band is straight
(z itself for chi1/chi2, u = phi(z) for rho), with FFT in theta and Chebyshev
collocation across the band.  The pairing density is invariant under the
change of coordinates.  ``route="uniformized"`` instead pushes every term to
the straight uniformized cylinder and uses the finite-difference pairing.
"""
from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .anomaly_field import ConformalFactor, CutoffProfile, CylinderGrid, SpectralBand, pairing
from .deformations import CircleMap, VectorField, compose, dersq, flow
from .detline_cylinder import Charge
from .errors import PreconditionError, StripExceededError
from .fourier_analytic import DEFAULT_ORDER
from .uniformize import DEFAULT_MODES, DeformedCylinder, UniformizationResult, invert_map, uniformize

DEFAULT_H = 0.02
COLLAR_CAP = 0.3
CHI2_BAND = (0.75, 0.9)
CSV_HEADER = ("v_spec", "w_spec", "c", "h", "gamma", "gf_imag", "rel_err", "wall_ms")


def _c(charge) -> float:
    return charge.c if isinstance(charge, Charge) else float(charge)


@dataclass(frozen=True)
class CutoffSet:
    chi1: CutoffProfile
    chi2: CutoffProfile

    @classmethod
    def default(cls, r: float, kind: str = "smoothstep-quintic") -> "CutoffSet":
        return cls(CutoffProfile(r + 0.05 * (1 - r), r + 0.45 * (1 - r), kind),
                   CutoffProfile(*CHI2_BAND, kind))

    def swapped(self) -> "CutoffSet":
        return CutoffSet(self.chi1.swapped(), self.chi2.swapped())


def collar(*maps: CircleMap) -> float:
    radii = [m.strip_radius() for m in maps if not m.is_identity]
    return 0.5 * min(radii + [COLLAR_CAP])


def _check_layout(cut: CutoffSet, r: float, *maps: CircleMap):
    if not r < cut.chi1.lo < cut.chi1.hi <= cut.chi2.lo < cut.chi2.hi < 1:
        raise PreconditionError("cut-off support violation: need r < chi1 band <= chi2 band < 1")
    top = max((m.strip_bound for m in maps), default=0.0)
    if not top < r:
        raise PreconditionError(f"cut-off support violation: a boundary curve reaches Im = {top:.3g} >= r = {r:.3g}")


# ---------------------------------------------------------- metric system

@dataclass(frozen=True, eq=False)
class MetricSystem:
    grid: CylinderGrid
    g_A: ConformalFactor
    g_Aphi: ConformalFactor
    g_Apsi: ConformalFactor
    g_Aphipsi: ConformalFactor
    cutoffs: CutoffSet
    rho: np.ndarray
    r: float
    pullback_defect: float = 0.0


def build_metrics(phi: CircleMap, psi: CircleMap, r: float | None = None,
                  cutoffs: CutoffSet | None = None, n_theta: int = 256, n_x: int = 129) -> MetricSystem:
    """Sample the four admissible log-factors on S^1 x [r, 1]."""
    r = collar(phi, psi) if r is None else r
    cut = CutoffSet.default(r) if cutoffs is None else cutoffs
    if not r < min(phi.strip_radius(), psi.strip_radius()):
        raise PreconditionError("collar must be below the strip radii")
    pp = compose(phi, psi)
    _check_layout(cut, r, phi, psi, pp)
    grid = CylinderGrid(n_theta, n_x, r, 1.0)
    Z = grid.points()
    X = Z.imag
    c1, c2 = cut.chi1(X), cut.chi2(X)
    F_phi = dersq(phi, Z)
    F_psi = dersq(psi, Z)
    F_pp = dersq(pp, Z)
    rho = cut.chi1(phi(Z).imag)
    f_phi = np.log(F_phi * c2 + 1 - c2)
    f_psi = np.log(F_psi * rho + 1 - rho)
    f_pp = np.log(F_pp * c1 + F_phi * (c2 - c1) + 1 - c2)
    # pullback identity on V (where chi2 = 1): both sides written in z
    zin, _ = phi.backward(Z)
    lhs = (dersq(psi, zin) * c1 + 1 - c1) * F_phi
    rhs = F_pp * c1 + F_phi * (1 - c1)
    V = X <= cut.chi2.lo
    defect = float(np.max(np.abs(lhs - rhs)[V]))
    top = 1.0 - cut.chi2.hi
    flat = ConformalFactor.flat(grid)
    return MetricSystem(
        grid=grid,
        g_A=flat,
        g_Aphi=ConformalFactor(grid, f_phi, (0.0, top * 0.999)),
        g_Apsi=ConformalFactor(grid, f_psi, (0.0, top * 0.999)),
        g_Aphipsi=ConformalFactor(grid, f_pp, (0.0, top * 0.999)),
        cutoffs=cut, rho=rho, r=r, pullback_defect=defect,
    )


def log_derivative_defect(v: VectorField, w: VectorField, r: float = 0.15, step: float = 1e-4,
                          n_theta: int = 64, n_x: int = 65) -> float:
    """Central differences of the log factor of g(A<phi_t psi_s) at t = s = 0.

    d/dt should equal -2 Re v'(z) and d/ds should equal -2 Re w'(z) chi1(x)
    on the region below the chi2 band; returns the larger max defect.
    """
    cut = CutoffSet.default(r)
    grid = CylinderGrid(n_theta, n_x, r, cut.chi2.lo)
    Z = grid.points()
    c1 = cut.chi1(Z.imag)

    def log_factor(t, s):
        phi, psi = flow(v, t), flow(w, s)
        return np.log(dersq(compose(phi, psi), Z) * c1 + dersq(phi, Z) * (1 - c1))

    dt = (log_factor(step, 0) - log_factor(-step, 0)) / (2 * step)
    ds = (log_factor(0, step) - log_factor(0, -step)) / (2 * step)
    inner = (slice(None), slice(2, -2))
    e_t = np.max(np.abs(dt + 2 * np.real(v.d1(Z)))[inner])
    e_s = np.max(np.abs(ds + 2 * np.real(w.d1(Z)) * c1)[inner])
    return float(max(e_t, e_s))


# ------------------------------------------------------------- log Gamma

class UniformizerCache:
    """Uniformizations and band pullbacks keyed by map identity.

    Maps are stored alongside their results so ids stay valid.
    """

    def __init__(self, M: int = DEFAULT_MODES):
        self.M = M
        self._store: dict[int, tuple] = {}
        self._pulled: dict[tuple, tuple] = {}

    def __call__(self, m: CircleMap) -> UniformizationResult:
        hit = self._store.get(id(m))
        if hit is None:
            hit = (m, uniformize(DeformedCylinder(m), self.M))
            self._store[id(m)] = hit
        return hit[1]

    def backward(self, m: CircleMap, band: SpectralBand):
        """(m^{-1}(Z), |(m^{-1})'(Z)|^2) on the band nodes Z."""
        key = (id(m), band.lo, band.hi, band.n_theta, band.n_cheb)
        hit = self._pulled.get(key)
        if hit is None:
            z, dz = m.backward(band.points())
            hit = (m, z, _checked_sq(dz))
            self._pulled[key] = hit
        return hit[1], hit[2]


def _checked_sq(d):
    out = np.abs(d) ** 2
    if not np.all(np.isfinite(out)) or np.any(out <= 0):
        raise StripExceededError("inverse derivative degenerate")
    return out


def _log_unif(u: UniformizationResult, z):
    return np.log(np.abs(u.derivative(z)) ** 2)


def _bracket_bands(phi, psi, pp, U, cut, n_theta, n_cheb):
    b1 = SpectralBand(cut.chi1.lo, cut.chi1.hi, n_theta, n_cheb)
    b2 = SpectralBand(cut.chi2.lo, cut.chi2.hi, n_theta, n_cheb)
    u_pp, u_phi, u_psi = U(pp), U(phi), U(psi)
    c1 = cut.chi1(b1.x)[None, :]
    c2 = cut.chi2(b2.x)[None, :]

    Z1, Z2 = b1.points(), b2.points()
    z, F_phi1 = U.backward(phi, b1)
    F_psi = dersq(psi, z)
    # (phi psi)^{-1} = psi^{-1} phi^{-1}, so F_pp = F_psi(phi^{-1} Z) F_phi
    g = F_psi * F_phi1 * c1 + F_phi1 * (1 - c1)
    p1 = b1.pairing(_log_unif(u_pp, Z1), np.log(g))

    f_phi2 = np.log(U.backward(phi, b2)[1] * c2 + 1 - c2)
    p1 += b2.pairing(_log_unif(u_pp, Z2), f_phi2)
    p2 = b2.pairing(_log_unif(u_phi, Z2), f_phi2)

    # rho band, written in u = phi(z) where rho(z) = chi1(Im u)
    jac = np.log(F_phi1)
    f_psi = np.log(F_psi * c1 + 1 - c1)
    p3 = b1.pairing(_log_unif(u_psi, z) + jac, f_psi + jac)
    return p1 - p2 - p3


def _bracket_uniformized(phi, psi, pp, U, cut, n_theta, n_x):
    def term(m, logg):
        u = U(m)
        grid = CylinderGrid(n_theta, n_x, 0.0, u.tau)
        z = invert_map(u, grid.points())
        pushed = logg(z) - _log_unif(u, z)
        return pairing(ConformalFactor.flat(grid), ConformalFactor(grid, pushed))

    def g_pp(z):
        y = z.imag
        c1, c2 = cut.chi1(y), cut.chi2(y)
        return np.log(dersq(pp, z) * c1 + dersq(phi, z) * (c2 - c1) + 1 - c2)

    def g_phi(z):
        c2 = cut.chi2(z.imag)
        return np.log(dersq(phi, z) * c2 + 1 - c2)

    def g_psi(z):
        rho = cut.chi1(phi(z).imag)
        return np.log(dersq(psi, z) * rho + 1 - rho)

    return term(pp, g_pp) - term(phi, g_phi) - term(psi, g_psi)


def log_gamma(phi: CircleMap, psi: CircleMap, charge=1.0, *, r: float | None = None,
              cutoffs: CutoffSet | None = None, n_theta: int = 256, n_x: int = 129,
              M: int = DEFAULT_MODES, route: str = "bands", cache: UniformizerCache | None = None) -> float:
    """log Gamma_c(phi, psi).

    On the band route ``n_x`` sets the Chebyshev count per band to
    (n_x + 1) // 2.
    """
    r = collar(phi, psi) if r is None else r
    cut = CutoffSet.default(r) if cutoffs is None else cutoffs
    pp = compose(phi, psi)
    _check_layout(cut, r, phi, psi, pp)
    U = UniformizerCache(M) if cache is None else cache
    if route == "bands":
        bracket = _bracket_bands(phi, psi, pp, U, cut, n_theta, (n_x + 1) // 2)
    elif route == "uniformized":
        bracket = _bracket_uniformized(phi, psi, pp, U, cut, n_theta, n_x)
    else:
        raise PreconditionError(f"unknown route {route!r}")
    return _c(charge) * bracket


# ------------------------------------------------------------- Lie level

def gelfand_fuks(v: VectorField, w: VectorField, charge=1.0) -> complex:
    """(c / 24 pi) int v' w'' dtheta by trapezoid quadrature (exact here)."""
    n = 2 * (v.series.N + w.series.N) + 3
    th = 2 * np.pi * np.arange(n) / n
    integrand = v.d1(th) * w.d2(th)
    return complex(_c(charge) / (24 * np.pi) * (2 * np.pi) * np.mean(integrand))


@dataclass(frozen=True)
class CocycleResult:
    gamma: float
    gf_imag: float
    stencil_h: float
    richardson_order: int
    rel_err: float
    gamma_coarse: float = float("nan")
    wall_ms: float = 0.0
    charge: float = 1.0
    v_spec: str = ""
    w_spec: str = ""

    def row(self, timing: bool = True) -> list:
        return [self.v_spec, self.w_spec, repr(self.charge), repr(self.stencil_h), repr(self.gamma),
                repr(self.gf_imag), repr(self.rel_err), repr(round(self.wall_ms, 3) if timing else 0.0)]


def rel_error(gamma: float, oracle: float) -> float:
    return abs(gamma - oracle) / max(abs(oracle), 1e-12)


def gamma_lie(v: VectorField, w: VectorField, charge=1.0, h: float = DEFAULT_H, *,
              richardson: bool = True, cutoffs: CutoffSet | None = None, n_theta: int = 256,
              n_x: int = 129, M: int = DEFAULT_MODES, route: str = "bands", workers: int = 1,
              kind: str = "smoothstep-quintic", order: int = DEFAULT_ORDER) -> CocycleResult:
    """gamma_c(v, w) from the antisymmetrized mixed difference of log Gamma."""
    if not 1e-3 <= h <= 5e-2:
        raise PreconditionError("stencil h must lie in [1e-3, 5e-2]")
    start = time.perf_counter()
    steps = [h, h / 2] if richardson else [h]
    flows_v = {t: flow(v, t, N=order) for hh in steps for t in (hh, -hh)}
    flows_w = {s: flow(w, s, N=order) for hh in steps for s in (hh, -hh)}
    r = collar(flows_v[h], flows_v[-h], flows_w[h], flows_w[-h])
    cut = CutoffSet.default(r, kind) if cutoffs is None else cutoffs
    U = UniformizerCache(M)
    for m in list(flows_v.values()) + list(flows_w.values()):
        U(m)
    opts = dict(r=r, cutoffs=cut, n_theta=n_theta, n_x=n_x, M=M, route=route, cache=U)

    jobs = []
    for hh in steps:
        for t in (hh, -hh):
            for s in (hh, -hh):
                jobs.append((flows_v[t], flows_w[s]))
                jobs.append((flows_w[s], flows_v[t]))

    def run(pair):
        return log_gamma(pair[0], pair[1], charge, **opts)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            vals = list(ex.map(run, jobs))
    else:
        vals = [run(j) for j in jobs]

    estimates = []
    for i, hh in enumerate(steps):
        chunk = vals[8 * i:8 * i + 8]
        L = [chunk[2 * k] - chunk[2 * k + 1] for k in range(4)]  # (h,h) (h,-h) (-h,h) (-h,-h)
        estimates.append(0.5 * (L[0] - L[1] - L[2] + L[3]) / (4 * hh * hh))
    gamma = (4 * estimates[1] - estimates[0]) / 3 if richardson else estimates[0]
    gf = gelfand_fuks(v, w, charge).imag
    wall = 1000 * (time.perf_counter() - start)
    return CocycleResult(gamma, gf, h, 1 if richardson else 0, rel_error(gamma, gf), estimates[0], wall,
                         _c(charge), v.spec, w.spec)


def results_csv(results, timing: bool = True, header: bool = True) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    if header:
        wr.writerow(CSV_HEADER)
    for res in results:
        wr.writerow(res.row(timing))
    return buf.getvalue()
