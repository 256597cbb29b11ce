"""Conformal factors on straight cylinders and the anomaly functionals.

A metric g = exp(f) dz dzbar on S^1 x [x_lo, x_hi] is sampled on a tensor
grid.  Theta derivatives are spectral.  Arrays that vanish near both
edges in x extend periodically, so their x derivatives are spectral too
and integrals use the trapezoid rule; the discrete Laplacian is then
exactly self-adjoint.  Everything else falls back to fourth-order finite
differences with one-sided closures and composite Simpson in x.

``SpectralBand`` is the high-accuracy variant used by the cocycle: FFT in
theta and Chebyshev collocation in x on a single band where the
integrand is smooth.
"""
from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import AdmissibilityError, GridMismatchError, PreconditionError

ADMISSIBLE_TOL = 1e-12
EDGE_COLUMNS = 3
TWO_PI = 2 * np.pi

# fourth-order stencils in units of dx^-2 / dx^-1
_D2_CENTER = np.array([-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12])
_D2_EDGE0 = np.array([15 / 4, -77 / 6, 107 / 6, -13, 61 / 12, -5 / 6])
_D2_EDGE1 = np.array([5 / 6, -5 / 4, -1 / 3, 7 / 6, -1 / 2, 1 / 12])
_D1_CENTER = np.array([1 / 12, -2 / 3, 0.0, 2 / 3, -1 / 12])
_D1_EDGE0 = np.array([-25 / 12, 4, -3, 4 / 3, -1 / 4])
_D1_EDGE1 = np.array([-1 / 4, -5 / 6, 3 / 2, -1 / 2, 1 / 12])


@dataclass(frozen=True)
class CylinderGrid:
    n_theta: int = 256
    n_x: int = 129
    x_lo: float = 0.0
    x_hi: float = 1.0

    def __post_init__(self):
        if self.n_theta < 64 or self.n_theta % 2:
            raise PreconditionError("n_theta must be even and >= 64")
        if self.n_x < 65 or self.n_x % 2 == 0:
            raise PreconditionError("n_x must be odd and >= 65 (composite Simpson)")
        if not self.x_lo < self.x_hi:
            raise PreconditionError("need x_lo < x_hi")

    @property
    def theta(self) -> np.ndarray:
        return TWO_PI * np.arange(self.n_theta) / self.n_theta

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_lo, self.x_hi, self.n_x)

    @property
    def dx(self) -> float:
        return (self.x_hi - self.x_lo) / (self.n_x - 1)

    @property
    def shape(self) -> tuple:
        return (self.n_theta, self.n_x)

    def points(self) -> np.ndarray:
        """Complex coordinates theta + i x, shape (n_theta, n_x)."""
        return self.theta[:, None] + 1j * self.x[None, :]

    def mesh(self):
        return np.meshgrid(self.theta, self.x, indexing="ij")

    def simpson_weights(self) -> np.ndarray:
        w = np.ones(self.n_x)
        w[1:-1:2] = 4
        w[2:-1:2] = 2
        return w * self.dx / 3

    def integrate(self, values) -> float:
        values = np.asarray(values)
        if compact_in_x(values):
            w = np.full(self.n_x, self.dx)
            w[[0, -1]] *= 0.5
        else:
            w = self.simpson_weights()
        return float((TWO_PI / self.n_theta) * np.sum(values @ w))

    def wavenumbers(self) -> np.ndarray:
        return np.fft.fftfreq(self.n_theta, 1.0 / self.n_theta)

    def to_dict(self) -> dict:
        return {"n_theta": self.n_theta, "n_x": self.n_x, "x_lo": self.x_lo, "x_hi": self.x_hi}


@dataclass(frozen=True, eq=False)
class ConformalFactor:
    grid: CylinderGrid
    f: np.ndarray
    admissible_margins: tuple = (0.0, 0.0)

    def __post_init__(self):
        f = np.asarray(self.f, dtype=float)
        if f.shape != self.grid.shape:
            raise GridMismatchError(f"factor shape {f.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(f)):
            raise PreconditionError("conformal factor must be finite")
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "admissible_margins", tuple(float(m) for m in self.admissible_margins))
        lo, hi = self.margin_masks()
        bad = max(np.max(np.abs(f[:, lo]), initial=0.0), np.max(np.abs(f[:, hi]), initial=0.0))
        if bad > ADMISSIBLE_TOL:
            raise AdmissibilityError(f"factor is {bad:.2e} on a declared flat margin")

    def margin_masks(self):
        x = self.grid.x
        m_lo, m_hi = self.admissible_margins
        lo = (x <= self.grid.x_lo + m_lo) if m_lo > 0 else np.zeros(x.size, bool)
        hi = (x >= self.grid.x_hi - m_hi) if m_hi > 0 else np.zeros(x.size, bool)
        return lo, hi

    @property
    def is_admissible(self) -> bool:
        return min(self.admissible_margins) > 0

    @classmethod
    def flat(cls, grid: CylinderGrid) -> "ConformalFactor":
        w = 0.5 * (grid.x_hi - grid.x_lo)
        return cls(grid, np.zeros(grid.shape), (w, w))

    @classmethod
    def from_function(cls, grid: CylinderGrid, func, margins=(0.0, 0.0)) -> "ConformalFactor":
        th, x = grid.mesh()
        return cls(grid, func(th, x), margins)

    def __add__(self, other: "ConformalFactor") -> "ConformalFactor":
        _same_grid(self, other)
        m = tuple(min(a, b) for a, b in zip(self.admissible_margins, other.admissible_margins))
        return ConformalFactor(self.grid, self.f + other.f, m)

    def scaled(self, a: float) -> "ConformalFactor":
        return ConformalFactor(self.grid, a * self.f, self.admissible_margins)

    # -- CSV: one JSON header line, then one row per theta node

    def to_csv(self) -> str:
        buf = io.StringIO()
        head = dict(self.grid.to_dict(), admissible_margins=list(self.admissible_margins))
        buf.write(json.dumps(head) + "\n")
        for row in self.f:
            buf.write(",".join(repr(float(v)) for v in row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ConformalFactor":
        lines = text.strip().splitlines()
        head = json.loads(lines[0])
        grid = CylinderGrid(head["n_theta"], head["n_x"], head["x_lo"], head["x_hi"])
        f = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
        return cls(grid, f, tuple(head.get("admissible_margins", (0.0, 0.0))))


def _same_grid(a: ConformalFactor, b: ConformalFactor):
    if a.grid != b.grid:
        raise GridMismatchError("conformal factors live on different grids")


def _apply_x(f: np.ndarray, dx: float, center, edge0, edge1, odd: bool) -> np.ndarray:
    """Apply a 5-point centered x-stencil with one-sided closures."""
    out = np.empty_like(f)
    out[:, 2:-2] = sum(c * f[:, i:f.shape[1] - 4 + i] for i, c in enumerate(center))
    sgn = -1.0 if odd else 1.0
    n0, n1 = len(edge0), len(edge1)
    out[:, 0] = f[:, :n0] @ edge0
    out[:, 1] = f[:, :n1] @ edge1
    out[:, -1] = sgn * (f[:, :-n0 - 1:-1] @ edge0)
    out[:, -2] = sgn * (f[:, :-n1 - 1:-1] @ edge1)
    return out


def compact_in_x(f: np.ndarray) -> bool:
    """True when f vanishes on the outer columns at both x edges."""
    k = EDGE_COLUMNS
    return bool(max(np.max(np.abs(f[:, :k])), np.max(np.abs(f[:, -k:]))) <= ADMISSIBLE_TOL)


def _spectral_x(f: np.ndarray, dx: float, order: int) -> np.ndarray:
    m = f.shape[1] - 1
    k = 2 * np.pi * np.fft.rfftfreq(m, dx)
    k[-1] = 0.0  # drop Nyquist so d_xx = d_x d_x exactly
    out = np.empty_like(f)
    out[:, :-1] = np.fft.irfft((1j * k) ** order * np.fft.rfft(f[:, :-1], axis=1), m, axis=1)
    out[:, -1] = out[:, 0]
    return out


def d_theta(f: np.ndarray, order: int = 1) -> np.ndarray:
    n = f.shape[0]
    k = np.fft.fftfreq(n, 1.0 / n)
    k[n // 2] = 0.0  # Nyquist dropped for every order
    return np.real(np.fft.ifft((1j * k[:, None]) ** order * np.fft.fft(f, axis=0), axis=0))


def d_x(f: np.ndarray, dx: float) -> np.ndarray:
    if compact_in_x(f):
        return _spectral_x(f, dx, 1)
    return _apply_x(f, dx, _D1_CENTER, _D1_EDGE0, _D1_EDGE1, odd=True) / dx


def d_xx(f: np.ndarray, dx: float) -> np.ndarray:
    if compact_in_x(f):
        return _spectral_x(f, dx, 2)
    return _apply_x(f, dx, _D2_CENTER, _D2_EDGE0, _D2_EDGE1, odd=False) / dx ** 2


def laplacian0(f) -> np.ndarray:
    """Positive flat Laplacian -(d_theta^2 + d_x^2) f."""
    if isinstance(f, ConformalFactor):
        grid, arr = f.grid, f.f
    else:
        raise PreconditionError("laplacian0 expects a ConformalFactor")
    return -(d_theta(arr, 2) + d_xx(arr, grid.dx))


def pairing(f1: ConformalFactor, f2: ConformalFactor) -> float:
    """(1/96 pi) int (f1 - f2) Delta_0 (f1 + f2); antisymmetric exactly."""
    _same_grid(f1, f2)
    diff = f1.f - f2.f
    total = ConformalFactor(f1.grid, f1.f + f2.f)
    return f1.grid.integrate(diff * laplacian0(total)) / (96 * np.pi)


def liouville_action(sigma: ConformalFactor, base: ConformalFactor) -> float:
    """(1/12 pi) int (|grad sigma|^2 / 2 + R sigma) vol in the base metric.

    Both terms are conformally covariant: |grad_g s|^2 vol_g is the flat
    Dirichlet density and R_g vol_g = (1/2) Delta_0 f_base dA.
    """
    _same_grid(sigma, base)
    g = sigma.grid
    s = sigma.f
    grad2 = d_theta(s) ** 2 + d_x(s, g.dx) ** 2
    density = 0.5 * grad2 + 0.5 * laplacian0(base) * s
    return g.integrate(density) / (12 * np.pi)


# --------------------------------------------------------------- cut-offs

_KINDS = ("smoothstep-quintic", "exp-bump")


@dataclass(frozen=True)
class CutoffProfile:
    """Decreasing transition from 1 (x <= lo) to 0 (x >= hi)."""

    lo: float
    hi: float
    kind: str = "smoothstep-quintic"

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise PreconditionError(f"unknown cut-off kind {self.kind!r}; choose from {_KINDS}")
        if not self.lo < self.hi:
            raise PreconditionError("cut-off needs lo < hi")

    def __call__(self, x):
        return cutoff_eval(self, x)

    def swapped(self) -> "CutoffProfile":
        other = _KINDS[1] if self.kind == _KINDS[0] else _KINDS[0]
        return CutoffProfile(self.lo, self.hi, other)


def _rise(u, kind):
    if kind == "smoothstep-quintic":
        return u ** 3 * (10 - 15 * u + 6 * u * u)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(u > 0, np.exp(-1 / np.where(u > 0, u, 1)), 0.0)
        b = np.where(u < 1, np.exp(-1 / np.where(u < 1, 1 - u, 1)), 0.0)
    return a / (a + b)


def cutoff_eval(c: CutoffProfile, x):
    u = np.clip((np.asarray(x, dtype=float) - c.lo) / (c.hi - c.lo), 0.0, 1.0)
    out = 1.0 - _rise(u, c.kind)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------- spectral band

def chebyshev(n: int):
    """Lobatto nodes on [-1, 1] (descending), differentiation matrix and
    Clenshaw-Curtis weights for n+1 points."""
    k = np.arange(n + 1)
    x = np.cos(np.pi * k / n)
    c = np.ones(n + 1)
    c[0] = c[-1] = 2
    c *= (-1.0) ** k
    dX = x[:, None] - x[None, :]
    D = np.outer(c, 1 / c) / (dX + np.eye(n + 1))
    D -= np.diag(D.sum(axis=1))
    th = np.pi * k / n
    w = np.zeros(n + 1)
    v = np.ones(n - 1)
    if n % 2 == 0:
        w[0] = w[n] = 1 / (n * n - 1)
        for j in range(1, n // 2):
            v -= 2 * np.cos(2 * j * th[1:-1]) / (4 * j * j - 1)
        v -= np.cos(n * th[1:-1]) / (n * n - 1)
    else:
        w[0] = w[n] = 1 / (n * n)
        for j in range(1, (n - 1) // 2 + 1):
            v -= 2 * np.cos(2 * j * th[1:-1]) / (4 * j * j - 1)
    w[1:-1] = 2 * v / n
    return x, D, w


@dataclass(frozen=True, eq=False)
class SpectralBand:
    """S^1 x [lo, hi] with FFT in theta and Chebyshev-Lobatto nodes in x."""

    lo: float
    hi: float
    n_theta: int = 256
    n_cheb: int = 65
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.n_cheb < 3:
            raise PreconditionError("need at least 3 Chebyshev nodes")
        x, D, w = chebyshev(self.n_cheb - 1)
        half = 0.5 * (self.hi - self.lo)
        self._cache["x"] = self.lo + half * (x[::-1] + 1)
        D = D[::-1, ::-1] / half
        self._cache["D2"] = D @ D
        self._cache["w"] = w[::-1] * half
        self._cache["k2"] = np.fft.fftfreq(self.n_theta, 1.0 / self.n_theta) ** 2

    @property
    def x(self) -> np.ndarray:
        return self._cache["x"]

    @property
    def theta(self) -> np.ndarray:
        return TWO_PI * np.arange(self.n_theta) / self.n_theta

    def points(self) -> np.ndarray:
        return self.theta[:, None] + 1j * self.x[None, :]

    def laplacian(self, f: np.ndarray) -> np.ndarray:
        dtt = np.real(np.fft.ifft(-self._cache["k2"][:, None] * np.fft.fft(f, axis=0), axis=0))
        return -(dtt + f @ self._cache["D2"].T)

    def integrate(self, values) -> float:
        return float((TWO_PI / self.n_theta) * np.sum(np.asarray(values) @ self._cache["w"]))

    def pairing(self, f1: np.ndarray, f2: np.ndarray) -> float:
        """Pairing density integrated over this band only."""
        return self.integrate((f1 - f2) * self.laplacian(f1 + f2)) / (96 * np.pi)
