"""Seeded invariant suites behind ``realdet check``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import deformation_cocycle as dc
from . import detline_cylinder as dl
from . import zeta_pa as zp
from .anomaly_field import ConformalFactor, CylinderGrid, liouville_action, pairing
from .deformations import VectorField, flow, identity, translation
from .uniformize import DeformedCylinder, uniformize


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    defect: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.defect) and self.defect <= self.tol)

    def line(self) -> str:
        return f"{self.suite},{self.name},{self.defect:.6e},{self.tol:.1e},{'PASS' if self.passed else 'FAIL'}"


@dataclass(frozen=True)
class SuiteConfig:
    n_theta: int = 256
    n_x: int = 129
    N: int = 128
    M: int = 48
    h: float = 0.02
    c: float = 1.0
    seed: int = 0


# ----------------------------------------------------------- generators

GAUSS_SPAN = 7.5  # exp(-7.5^2 / 2) < 1e-12


def smooth_bump(u):
    """Gaussian in u, below 1e-12 for |u| >= 1 and clipped to zero there."""
    u = np.asarray(u, dtype=float)
    out = np.exp(-0.5 * (GAUSS_SPAN * u) ** 2)
    out[np.abs(u) >= 1] = 0.0
    return out


def random_admissible(rng, grid: CylinderGrid, margin: float = 0.15, amp: float = 0.3) -> ConformalFactor:
    """Gaussian bump in x times a low theta ripple, flat on both margins."""
    L = grid.x_hi - grid.x_lo
    lo, hi = grid.x_lo + margin * L, grid.x_hi - margin * L
    half = 0.5 * (hi - lo) * rng.uniform(0.6, 1.0)
    centre = rng.uniform(lo + half, hi - half)
    a = rng.uniform(-amp, amp)
    b = rng.uniform(-0.5, 0.5)
    k = int(rng.integers(0, 4))
    ph = rng.uniform(0, 2 * np.pi)
    th, x = grid.mesh()
    f = a * smooth_bump((x - centre) / half) * (1 + b * np.cos(k * th + ph))
    return ConformalFactor(grid, f, (margin * L * 0.999, margin * L * 0.999))


def random_field(rng, kmax: int = 2) -> VectorField:
    modes = {}
    for k in range(-kmax, kmax + 1):
        modes[k] = complex(rng.normal(), rng.normal()) / (1 + abs(k)) / 2
    return VectorField.from_modes(modes)


def random_flow(rng, N: int = 128):
    return flow(random_field(rng), float(rng.uniform(0.01, 0.04)), N=N)


# --------------------------------------------------------------- suites

def pairing_suite(cfg: SuiteConfig) -> list:
    rng = np.random.default_rng(cfg.seed)
    grid = CylinderGrid(cfg.n_theta, cfg.n_x, 0.0, 1.0)
    out = []
    f1, f2 = random_admissible(rng, grid), random_admissible(rng, grid)
    out.append(Check("pairing", "antisymmetry", abs(pairing(f1, f2) + pairing(f2, f1)), 0.0))
    flat = ConformalFactor.flat(grid)
    worst = 0.0
    for _ in range(20):
        g2, g3 = random_admissible(rng, grid), random_admissible(rng, grid)
        worst = max(worst, abs(pairing(flat, g2) + pairing(g2, g3) - pairing(flat, g3)))
    out.append(Check("pairing", "cocycle_20_triples", worst, 1e-8))
    worst = 0.0
    for _ in range(10):
        s = random_admissible(rng, grid)
        worst = max(worst, abs(pairing(flat, s.scaled(2.0)) + liouville_action(s, flat)))
    out.append(Check("pairing", "flat_vs_liouville", worst, 1e-8))
    worst = 0.0
    for _ in range(5):
        worst = max(worst, diffeo_defect(rng, cfg))
    out.append(Check("pairing", "diffeo_invariance_5_maps", worst, 1e-6))
    return out


def diffeo_defect(rng, cfg: SuiteConfig) -> float:
    """Pairing on the uniformized cylinder vs its pullback to the deformed strip."""
    phi = random_flow(rng, cfg.N)
    u = uniformize(DeformedCylinder(phi), cfg.M)
    wgrid = CylinderGrid(cfg.n_theta, cfg.n_x, 0.0, u.tau)
    lo, hi = 0.25 * u.tau, 0.75 * u.tau

    def pair_on_w(rng_state):
        r = np.random.default_rng(rng_state)
        a, b, k = r.uniform(-0.3, 0.3), r.uniform(-0.5, 0.5), int(r.integers(0, 3))
        c0 = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        return lambda w: a * smooth_bump((w.imag - c0) / half) * (1 + b * np.cos(k * w.real))

    s1, s2 = rng.integers(0, 2**31, size=2)
    h1, h2 = pair_on_w(s1), pair_on_w(s2)
    W = wgrid.points()
    on_w = pairing(ConformalFactor(wgrid, h1(W)), ConformalFactor(wgrid, h2(W)))
    # log|F'|^2 is not compact in x, so the z side takes the FD path; refine it
    z_lo = float(np.max(phi.values().imag)) + 0.05
    zgrid = CylinderGrid(cfg.n_theta, 4 * (cfg.n_x - 1) + 1, z_lo, 0.98)
    Z = zgrid.points()
    Fz = u(Z)
    jac = np.log(np.abs(u.derivative(Z)) ** 2)
    on_z = pairing(ConformalFactor(zgrid, h1(Fz) + jac), ConformalFactor(zgrid, h2(Fz) + jac))
    return abs(on_w - on_z)


def detline_suite(cfg: SuiteConfig) -> list:
    rng = np.random.default_rng(cfg.seed + 1)
    charge = dl.Charge(cfg.c)
    out = []
    A = DeformedCylinder(random_flow(rng, cfg.N))
    m1 = dl.mu_c(A, charge, cfg.n_theta, cfg.n_x, cfg.M)
    grid = m1.factor.grid
    m2 = dl.mu_c(A, charge, cfg.n_theta, cfg.n_x, cfg.M, metric=dl.bump_metric(grid, eps=0.2, modulation=0.5))
    out.append(Check("detline", "mu_c_metric_independence", dl.equality_defect(m1, m2), 1e-8))
    a = dl.DetVector(rng.uniform(0.5, 2), random_admissible(rng, grid), charge)
    b = dl.DetVector(rng.uniform(0.5, 2), random_admissible(rng, grid), charge)
    out.append(Check("detline", "det_add_commutative", dl.equality_defect(dl.det_add(a, b), dl.det_add(b, a)), 1e-8))
    out.append(Check("detline", "equivalence_symmetric", abs(dl.equality_defect(a, b) - dl.equality_defect(b, a)), 1e-8))
    worst, positive = 0.0, True
    dx = 1.0 / 64
    for _ in range(10):
        taus = [dx * 2 * int(rng.integers(32, 80)) for _ in range(3)]
        gs = [random_admissible(rng, CylinderGrid(cfg.n_theta, int(round(t / dx)) + 1, 0.0, t)) for t in taus]
        lg = lambda x, y: dl.log_gamma_cyl(x, y, charge)  # noqa: E731
        ab = dl._stack(gs[0], gs[1])
        bc = dl._stack(gs[1], gs[2])
        lhs = lg(ab, gs[2]) + lg(gs[0], gs[1])
        rhs = lg(gs[0], bc) + lg(gs[1], gs[2])
        worst = max(worst, abs(lhs - rhs))
        positive &= dl.gamma_cyl(gs[0], gs[1], charge) > 0
    out.append(Check("detline", "sewing_cocycle_10_triples", worst, 1e-8))
    out.append(Check("detline", "gamma_positive", 0.0 if positive else 1.0, 0.0))
    return out


def uniformize_suite(cfg: SuiteConfig) -> list:
    rng = np.random.default_rng(cfg.seed + 2)
    out = []
    cases = {"identity": (identity(cfg.N), 1.0), "vertical_translation": (translation(0.2j, cfg.N), 0.8),
             "rotation": (translation(0.7, cfg.N), 1.0)}
    for name, (m, tau) in cases.items():
        u = uniformize(DeformedCylinder(m), cfg.M)
        out.append(Check("uniformize", f"{name}_tau", abs(u.tau - tau), 1e-10))
        out.append(Check("uniformize", f"{name}_residual", u.residual, 1e-8))
    worst = 0.0
    for _ in range(5):
        cyl = DeformedCylinder(random_flow(rng, cfg.N))
        worst = max(worst, abs(uniformize(cyl, cfg.M).tau - uniformize(cyl, 2 * cfg.M).tau))
    out.append(Check("uniformize", "tau_M_doubling_5_flows", worst, 1e-9))
    return out


def cocycle_suite(cfg: SuiteConfig) -> list:
    rng = np.random.default_rng(cfg.seed + 3)
    out = []
    opts = dict(n_theta=cfg.n_theta, n_x=cfg.n_x, M=cfg.M)
    v, w = VectorField.parse("cos(1)"), VectorField.parse("i*sin(1)")
    res = dc.gamma_lie(v, w, cfg.c, cfg.h, **opts)
    out.append(Check("cocycle", "battery_cos_isin_rel_err", res.rel_err, 2e-2))
    real = dc.gamma_lie(v, VectorField.parse("sin(1)"), cfg.c, cfg.h, **opts)
    out.append(Check("cocycle", "real_fields_vanish", abs(real.gamma), 1e-3 * abs(cfg.c)))
    worst = 0.0
    for _ in range(5):
        phi, psi = random_flow(rng, cfg.N), random_flow(rng, cfg.N)
        worst = max(worst, abs(dc.log_gamma(identity(cfg.N), psi, cfg.c, **opts)),
                    abs(dc.log_gamma(phi, identity(cfg.N), cfg.c, **opts)))
    out.append(Check("cocycle", "identity_normalization", worst, 1e-8))
    phi, psi = random_flow(rng, cfg.N), random_flow(rng, cfg.N)
    r = dc.collar(phi, psi)
    cut = dc.CutoffSet.default(r)
    a = dc.log_gamma(phi, psi, cfg.c, r=r, cutoffs=cut, **opts)
    b = dc.log_gamma(phi, psi, cfg.c, r=r, cutoffs=cut.swapped(), **opts)
    out.append(Check("cocycle", "cutoff_swap", abs(a - b), 1e-6))
    twice = dc.log_gamma(phi, psi, 2 * cfg.c, r=r, cutoffs=cut, **opts)
    out.append(Check("cocycle", "linearity_in_c", abs(twice - 2 * a) / max(abs(2 * a), 1e-300), 1e-10))
    ms = dc.build_metrics(phi, psi, n_theta=min(cfg.n_theta, 128), n_x=min(cfg.n_x, 129))
    out.append(Check("cocycle", "pullback_identity", ms.pullback_defect, 1e-8))
    out.append(Check("cocycle", "log_derivative", dc.log_derivative_defect(random_field(rng), random_field(rng)), 1e-6))
    return out


def zeta_suite(cfg: SuiteConfig) -> list:
    rng = np.random.default_rng(cfg.seed + 4)
    out = []
    for tau in (0.5, 1.0, 2.0):
        out.append(Check("zeta", f"scheme_gap_tau_{tau:g}", zp.detz_report(tau)["scheme_gap"], 1e-6))
    out.append(Check("zeta", "zeta0", max(abs(zp.zeta0(t)) for t in (0.5, 1.0, 2.0)), 1e-6))
    worst = 0.0
    for _ in range(10):
        tau = float(rng.uniform(0.5, 2.0))
        s = random_admissible(rng, CylinderGrid(cfg.n_theta, cfg.n_x, 0.0, tau))
        worst = max(worst, zp.mu_zeta_vs_mu(tau, s))
    out.append(Check("zeta", "pa_vs_liouville_10_sigma", worst, 1e-8))
    return out


SUITES = {
    "pairing": pairing_suite,
    "detline": detline_suite,
    "uniformize": uniformize_suite,
    "cocycle": cocycle_suite,
    "zeta": zeta_suite,
}


def run(name: str, cfg: SuiteConfig) -> list:
    if name == "all":
        return [c for key in SUITES for c in SUITES[key](cfg)]
    return SUITES[name](cfg)
