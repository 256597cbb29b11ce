"""Polyakov-Alvarez anomaly and zeta-regularized determinants on flat cylinders."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .anomaly_field import ConformalFactor, d_theta, d_x, laplacian0, liouville_action, pairing, _same_grid
from .errors import AdmissibilityError, PreconditionError, TruncationDisagreementError

SCHEME_TOL = 1e-6
_E1_CUTOFF = 45.0  # E1(45) ~ 6e-22


@dataclass(frozen=True)
class PAResult:
    bulk: float
    boundary_k: float
    boundary_normal: float

    @property
    def log_ratio(self) -> float:
        return -self.bulk / (6 * math.pi) - self.boundary_k / (6 * math.pi) - self.boundary_normal / (4 * math.pi)


def _edge_normals(f: np.ndarray, dx: float):
    """Outward normal derivatives at x_lo and x_hi, one-sided fourth order."""
    dfx = d_x(f, dx)
    return -dfx[:, 0], dfx[:, -1]


def pa_anomaly(sigma: ConformalFactor, base: ConformalFactor) -> PAResult:
    """Log det ratio for the Weyl change base -> exp(2 sigma) base.

    With a flat base both curvature terms vanish.  A curved base enters via
    R_g vol_g = (1/2) Delta_0 f dA and k_g dl = (1/2) d_n f dtheta.
    """
    _same_grid(sigma, base)
    g = sigma.grid
    s, f = sigma.f, base.f
    grad2 = d_theta(s) ** 2 + d_x(s, g.dx) ** 2
    bulk = g.integrate(0.5 * grad2 + 0.5 * laplacian0(base) * s)
    n_lo, n_hi = _edge_normals(s, g.dx)
    fn_lo, fn_hi = _edge_normals(f, g.dx)
    dth = 2 * math.pi / g.n_theta
    boundary_k = dth * float(np.sum(0.5 * fn_lo * s[:, 0]) + np.sum(0.5 * fn_hi * s[:, -1]))
    boundary_normal = dth * float(np.sum(n_lo) + np.sum(n_hi))
    return PAResult(bulk, boundary_k, boundary_normal)


# ---------------------------------------------------------------- det_zeta

def _heat_coefficients(tau: float):
    return tau / 2, -math.sqrt(math.pi) / 2


def _trace_direct(t: float, tau: float) -> float:
    nmax = int(math.ceil(math.sqrt(40.0 / t))) + 1
    n = np.arange(1, nmax + 1)
    s_n = 1 + 2 * np.sum(np.exp(-n * n * t))
    kmax = int(math.ceil(tau / math.pi * math.sqrt(40.0 / t))) + 1
    k = np.arange(1, kmax + 1)
    s_k = np.sum(np.exp(-(math.pi * k / tau) ** 2 * t))
    return float(s_n * s_k)


def _remainder_direct(t: float, tau: float) -> float:
    a0, ah = _heat_coefficients(tau)
    return _trace_direct(t, tau) - a0 / t - ah / math.sqrt(t)


def _remainder_jacobi(t: float, tau: float) -> float:
    """Theta - a0/t - a_half/sqrt(t) via modular transforms; no cancellation."""
    m = np.arange(1, int(math.sqrt(45.0 * t) / min(tau, math.pi)) + 2)
    A = float(np.sum(np.exp(-(math.pi * m) ** 2 / t)))
    B = float(np.sum(np.exp(-(tau * m) ** 2 / t)))
    return (tau / t) * (A + B + 2 * A * B) - math.sqrt(math.pi / t) * A


def _eigen_tail(tau: float, T: float) -> float:
    """sum over eigenvalues of E1(lambda T) = int_T^inf Theta(t)/t dt."""
    nmax = int(math.sqrt(_E1_CUTOFF / T)) + 1
    kmax = int(tau / math.pi * math.sqrt(_E1_CUTOFF / T)) + 1
    n = np.arange(-nmax, nmax + 1)[:, None]
    k = np.arange(1, kmax + 1)[None, :]
    lam = (n * n + (math.pi * k / tau) ** 2).ravel()
    lam = lam[lam * T <= _E1_CUTOFF]
    return float(np.sum(special.exp1(lam * T)))


def _zeta_prime0(tau: float, scheme: str) -> float:
    a0, ah = _heat_coefficients(tau)
    if scheme == "direct":
        T, rem = 1.0, _remainder_direct
        t0 = min(tau * tau, math.pi ** 2) / 45.0
    elif scheme == "jacobi":
        T, rem = 0.5, _remainder_jacobi
        t0 = 0.0
    else:
        raise PreconditionError(f"unknown scheme {scheme!r}")
    small, _ = integrate.quad(lambda t: rem(t, tau) / t, t0, T, epsabs=1e-15, epsrel=1e-13, limit=400)
    return small - a0 / T - 2 * ah / math.sqrt(T) + _eigen_tail(tau, T)


def detz_flat_cylinder(tau: float, scheme: str = "direct", tol: float = SCHEME_TOL) -> float:
    """log det_zeta of the Dirichlet Laplacian on S^1 x [0, tau].

    Both truncation schemes are always evaluated; disagreement above ``tol``
    (relative) raises.
    """
    out = detz_report(tau)
    if out["scheme_gap"] > tol:
        raise TruncationDisagreementError(f"schemes differ by {out['scheme_gap']:.2e} at tau={tau}")
    return out[scheme]


def detz_report(tau: float) -> dict:
    if not 0.1 <= tau <= 10:
        raise PreconditionError("tau must lie in [0.1, 10]")
    a = -_zeta_prime0(tau, "direct")
    b = -_zeta_prime0(tau, "jacobi")
    gap = abs(a - b) / max(abs(a), abs(b), 1e-300)
    return {"tau": tau, "direct": a, "jacobi": b, "scheme_gap": gap}


def zeta0(tau: float) -> float:
    """Constant heat coefficient, measured from the truncated trace at small t."""
    t = min(tau * tau, math.pi ** 2) / 45.0
    return _remainder_direct(t, tau)


# ------------------------------------------------------ section comparison

def _require_admissible(sigma: ConformalFactor):
    if not sigma.is_admissible:
        raise AdmissibilityError("sigma must be flat on both boundary margins")


def boundary_exponent(sigma: ConformalFactor) -> float:
    """int over the boundary of (sigma + 3) d_n sigma."""
    g = sigma.grid
    n_lo, n_hi = _edge_normals(sigma.f, g.dx)
    dth = 2 * math.pi / g.n_theta
    return dth * float(np.sum((sigma.f[:, 0] + 3) * n_lo) + np.sum((sigma.f[:, -1] + 3) * n_hi))


def log_mu_zeta_over_mu(tau: float, sigma: ConformalFactor, c: float) -> float:
    """log of mu_zeta / mu_c: (c/8 pi) boundary term - (c/2) log det_zeta(Delta_0)."""
    return c / (8 * math.pi) * boundary_exponent(sigma) - 0.5 * c * detz_flat_cylinder(tau)


def mu_zeta_vs_mu(tau: float, sigma: ConformalFactor, charge=None) -> float:
    """Max defect among the routes to log det ratio for an admissible sigma.

    Routes: Polyakov-Alvarez, 2 <flat | exp(2 sigma) flat>, -2 S_L.  The
    boundary exponent must vanish as well.
    """
    _require_admissible(sigma)
    if not math.isclose(sigma.grid.x_hi - sigma.grid.x_lo, tau, rel_tol=1e-12):
        raise PreconditionError("sigma grid height does not match tau")
    flat = ConformalFactor.flat(sigma.grid)
    pa = pa_anomaly(sigma, flat).log_ratio
    via_pairing = 2 * pairing(flat, sigma.scaled(2.0))
    via_action = -2 * liouville_action(sigma, flat)
    return max(abs(pa - via_pairing), abs(pa - via_action), abs(boundary_exponent(sigma)))
