"""Truncated Fourier series of 2*pi-periodic analytic functions.

A series stores coefficients c_n for n = -N..N and represents
f(z) = sum_n c_n exp(i n z), which makes sense for complex z inside the
strip of analyticity.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import PreconditionError, StripExceededError, UnderResolvedError

DEFAULT_ORDER = 128
TAIL_TOL = 1e-10
SAFETY = 0.8
_SIGNIFICANT = 1e-13
_ABRUPT = 1e-8


def grid_angles(N: int) -> np.ndarray:
    """The 2N+1 equispaced fitting angles."""
    return 2 * np.pi * np.arange(2 * N + 1) / (2 * N + 1)


@dataclass(frozen=True, eq=False)
class AnalyticPeriodic:
    coeffs: np.ndarray
    tail_tol: float = TAIL_TOL
    _radius: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.ndim != 1 or c.size % 2 == 0:
            raise PreconditionError("coefficient array must have odd length 2N+1")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def N(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    def coeff(self, n: int) -> complex:
        if abs(n) > self.N:
            return 0j
        return complex(self.coeffs[n + self.N])

    @property
    def tail_ratio(self) -> float:
        peak = np.max(np.abs(self.coeffs))
        if peak == 0:
            return 0.0
        return float(max(abs(self.coeffs[0]), abs(self.coeffs[-1])) / peak)

    @property
    def under_resolved(self) -> bool:
        return self.tail_ratio > self.tail_tol

    @property
    def is_real(self) -> bool:
        return bool(np.allclose(self.coeffs, np.conj(self.coeffs[::-1]), rtol=0, atol=1e-12 * max(1.0, np.max(np.abs(self.coeffs)))))

    # -- construction

    @classmethod
    def from_modes(cls, modes: dict, N: int | None = None) -> "AnalyticPeriodic":
        top = max((abs(int(k)) for k in modes), default=0)
        N = top if N is None else N
        if top > N:
            raise PreconditionError(f"mode {top} exceeds order {N}")
        c = np.zeros(2 * N + 1, dtype=np.complex128)
        for k, v in modes.items():
            c[int(k) + N] += v
        return cls(c)

    @classmethod
    def constant(cls, value: complex, N: int = 0) -> "AnalyticPeriodic":
        return cls.from_modes({0: value}, N)

    def with_order(self, N: int) -> "AnalyticPeriodic":
        """Zero-pad (or truncate) to order N."""
        c = np.zeros(2 * N + 1, dtype=np.complex128)
        m = min(N, self.N)
        c[N - m:N + m + 1] = self.coeffs[self.N - m:self.N + m + 1]
        return AnalyticPeriodic(c, self.tail_tol)

    # -- evaluation

    def _check_strip(self, z):
        im = np.max(np.abs(np.imag(z))) if np.size(z) else 0.0
        if im >= self.strip_radius():
            raise StripExceededError(f"|Im z| = {im:.3g} reaches the strip radius {self.strip_radius():.3g}")

    def __call__(self, z, check: bool = True):
        return evaluate(self, z, check=check)

    def samples(self, N: int | None = None) -> np.ndarray:
        """Values on the 2N+1 fitting grid (default: own order)."""
        N = self.N if N is None else N
        return self(grid_angles(N), check=False)

    def derivative(self, order: int = 1) -> "AnalyticPeriodic":
        return derivative(self, order)

    def antiderivative(self) -> "AnalyticPeriodic":
        """Zero-mean antiderivative; the constant mode must vanish."""
        n = self.modes
        if abs(self.coeffs[self.N]) > 1e-14 * max(1.0, np.max(np.abs(self.coeffs))):
            raise PreconditionError("antiderivative needs a zero-mean series")
        c = np.zeros_like(self.coeffs)
        nz = n != 0
        c[nz] = self.coeffs[nz] / (1j * n[nz])
        return AnalyticPeriodic(c, self.tail_tol)

    def strip_radius(self) -> float:
        if not self._radius:
            self._radius.append(strip_radius(self))
        return self._radius[0]

    def __add__(self, other: "AnalyticPeriodic") -> "AnalyticPeriodic":
        N = max(self.N, other.N)
        return AnalyticPeriodic(self.with_order(N).coeffs + other.with_order(N).coeffs, self.tail_tol)

    def __mul__(self, other):
        if isinstance(other, AnalyticPeriodic):
            N = max(self.N, other.N)
            vals = self.samples(2 * N) * other.samples(2 * N)
            return fit(vals, self.tail_tol, check=False)
        return AnalyticPeriodic(self.coeffs * other, self.tail_tol)

    __rmul__ = __mul__

    # -- serialization

    def to_dict(self) -> dict:
        return {"N": self.N, "re": self.coeffs.real.tolist(), "im": self.coeffs.imag.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "AnalyticPeriodic":
        c = np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float)
        if c.size != 2 * int(d["N"]) + 1:
            raise PreconditionError("coefficient count does not match N")
        return cls(c)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "AnalyticPeriodic":
        return cls.from_dict(json.loads(s))


def fit(samples, tail_tol: float = TAIL_TOL, check: bool = False) -> AnalyticPeriodic:
    """Trigonometric interpolation of 2N+1 equispaced samples.

    With ``check=True`` an under-resolved fit raises instead of only being
    flagged on the result.
    """
    s = np.asarray(samples, dtype=np.complex128)
    if s.ndim != 1 or s.size < 3 or s.size % 2 == 0:
        raise PreconditionError("need an odd number (>= 3) of samples")
    N = (s.size - 1) // 2
    c = np.fft.fft(s) / s.size
    coeffs = np.concatenate([c[N + 1:], c[:N + 1]])
    out = AnalyticPeriodic(coeffs, tail_tol)
    if check and out.under_resolved:
        raise UnderResolvedError(f"tail ratio {out.tail_ratio:.2e} above {tail_tol:.0e}")
    return out


def evaluate(f: AnalyticPeriodic, z, check: bool = True):
    scalar = np.isscalar(z)
    z = np.asarray(z, dtype=np.complex128)
    if check:
        f._check_strip(z)
    nz = np.flatnonzero(f.coeffs)
    out = _kernels.series(f.modes[nz].astype(float), f.coeffs[nz], z)
    return complex(out) if scalar else out


def derivative(f: AnalyticPeriodic, order: int = 1) -> AnalyticPeriodic:
    if order not in (1, 2, 3):
        raise PreconditionError("derivative order must be 1, 2 or 3")
    return AnalyticPeriodic(f.coeffs * (1j * f.modes) ** order, f.tail_tol)


def strip_radius(f: AnalyticPeriodic, safety: float = SAFETY) -> float:
    """Conservative half-width of the strip of analyticity.

    Band-limited series are entire and get ``math.inf``.
    """
    mags = np.abs(f.coeffs)
    peak = mags.max()
    if peak == 0:
        return math.inf
    folded = np.maximum(mags[f.N:], mags[f.N::-1])  # index = |n|
    significant = np.flatnonzero(folded > _SIGNIFICANT * peak)
    last = int(significant[-1])
    if last == 0 or folded[last] > _ABRUPT * peak:
        return math.inf
    ns = significant[significant >= last / 2]
    if ns.size < 2:
        return math.inf
    slope = np.polyfit(ns, np.log(folded[ns]), 1)[0]
    if slope >= 0:
        raise UnderResolvedError("coefficients do not decay")
    return safety * float(-slope)


def compose(outer: AnalyticPeriodic, inner_values, tail_tol: float = TAIL_TOL) -> AnalyticPeriodic:
    """Evaluate ``outer`` at inner grid values and refit.

    The inner values must be periodic samples on the fitting grid; the
    caller is responsible for removing any non-periodic part first.
    """
    vals = evaluate(outer, np.asarray(inner_values, dtype=np.complex128), check=True)
    return fit(vals, tail_tol)


def parseval_defect(f: AnalyticPeriodic) -> float:
    energy = float(np.sum(np.abs(f.coeffs) ** 2))
    mean = float(np.mean(np.abs(f.samples()) ** 2))
    return abs(energy - mean) / max(energy, 1e-300)
