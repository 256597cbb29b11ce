"""Vector fields on the circle, their flows, and complex deformations.

A ``CircleMap`` is phi(theta) = theta + p(theta) with p a periodic analytic
series.  Maps produced by flows remember the flow legs, so evaluation at
complex points away from the circle re-integrates the ODE instead of
trusting the analytic continuation of a truncated series.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (
    FieldSpecError,
    InjectivityError,
    NewtonError,
    NonComposableError,
    PreconditionError,
    StripExceededError,
)
from .fourier_analytic import DEFAULT_ORDER, AnalyticPeriodic, fit, grid_angles

STRIP_LIMIT = 1.0
NEWTON_MAXIT = 50
NEWTON_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class VectorField:
    series: AnalyticPeriodic
    spec: str = ""

    def __post_init__(self):
        c = self.series.coeffs
        nz = np.flatnonzero(c)
        modes = self.series.modes[nz].astype(float)
        object.__setattr__(self, "_modes", modes)
        object.__setattr__(self, "_c", c[nz].copy())
        object.__setattr__(self, "_dc", (c[nz] * 1j * modes).copy())

    @classmethod
    def from_modes(cls, modes: dict, spec: str = "") -> "VectorField":
        return cls(AnalyticPeriodic.from_modes(modes), spec)

    @classmethod
    def parse(cls, spec: str) -> "VectorField":
        return cls(AnalyticPeriodic.from_modes(parse_field(spec)), spec.strip())

    @property
    def is_real(self) -> bool:
        return self.series.is_real

    @property
    def is_zero(self) -> bool:
        return self._c.size == 0

    def __call__(self, z):
        return _kernels.series(self._modes, self._c, np.asarray(z, dtype=np.complex128))

    def d1(self, z):
        return _kernels.series(self._modes, self._dc, np.asarray(z, dtype=np.complex128))

    def d2(self, z):
        return _kernels.series(self._modes, self._dc * 1j * self._modes, np.asarray(z, dtype=np.complex128))

    def sup_norm(self) -> float:
        return float(np.sum(np.abs(self._c)))

    def scaled(self, a: complex) -> "VectorField":
        return VectorField(self.series * a)

    def integrate(self, t: float, z, steps: int | None = None):
        """Flow points z for time t; returns (z_t, dz_t/dz, max |Im| on the path)."""
        z = np.asarray(z, dtype=np.complex128)
        if t == 0 or self.is_zero:
            return z.copy(), np.ones_like(z), float(np.max(np.abs(z.imag))) if z.size else 0.0
        steps = default_steps(t) if steps is None else int(steps)
        return _kernels.flow(self._modes, self._c, self._dc, float(t), steps, z)


def default_steps(t: float) -> int:
    return max(64, math.ceil(abs(t) / 1e-3))


# ------------------------------------------------------------------ DSL

_NUM = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_TRIG = re.compile(rf"^(i\*)?(?:({_NUM})\*)?(cos|sin)\((\d+)\)$")
_CONST = re.compile(rf"^(i\*)?({_NUM})$")


def parse_field(spec: str) -> dict:
    """Parse ``a*cos(k), i*a*sin(k), a, i*a`` into Fourier modes."""
    if not spec or not spec.strip():
        raise FieldSpecError("empty field spec")
    modes: dict[int, complex] = {}

    def add(k, v):
        modes[k] = modes.get(k, 0) + v

    for raw in spec.split(","):
        term = raw.replace(" ", "")
        if term in ("i", "+i"):
            add(0, 1j)
            continue
        if term == "-i":
            add(0, -1j)
            continue
        m = _TRIG.match(term)
        if m:
            unit = 1j if m.group(1) else 1.0
            a = float(m.group(2)) if m.group(2) is not None else 1.0
            k = int(m.group(4))
            if m.group(3) == "cos":
                if k == 0:
                    add(0, unit * a)
                else:
                    add(k, unit * a / 2)
                    add(-k, unit * a / 2)
            elif k != 0:
                add(k, unit * a / 2j)
                add(-k, -unit * a / 2j)
            continue
        m = _CONST.match(term)
        if m:
            add(0, (1j if m.group(1) else 1.0) * float(m.group(2)))
            continue
        raise FieldSpecError(f"cannot parse field term {raw.strip()!r}")
    return modes


# ------------------------------------------------------------ CircleMap

@dataclass(frozen=True, eq=False)
class CircleMap:
    """phi(theta) = theta + displacement(theta).

    ``legs`` lists (field, time) pairs with phi = flow_0 o flow_1 o ...,
    applied right to left; ``None`` means the map is known only through
    its displacement series.
    """

    displacement: AnalyticPeriodic
    strip_bound: float
    legs: tuple | None = None

    def __post_init__(self):
        if not self.strip_bound < STRIP_LIMIT:
            raise StripExceededError(f"strip bound {self.strip_bound:.3g} is not below {STRIP_LIMIT}")

    @property
    def N(self) -> int:
        return self.displacement.N

    @property
    def is_identity(self) -> bool:
        return self.legs == () or (self.legs is None and not np.any(self.displacement.coeffs))

    @property
    def is_real(self) -> bool:
        return self.displacement.is_real

    def values(self) -> np.ndarray:
        """phi on the fitting grid."""
        th = grid_angles(self.N)
        return th + self.displacement(th, check=False)

    def __call__(self, z):
        return self.forward(z)[0]

    def forward(self, z):
        """(phi(z), phi'(z)) at complex points."""
        z = np.asarray(z, dtype=np.complex128)
        if self.legs is not None:
            d = np.ones_like(z)
            for v, t in reversed(self.legs):
                z, p, _ = v.integrate(t, z)
                d = d * p
            return z, d
        p = self.displacement
        return z + p(z), 1 + p.derivative(1)(z)

    def backward(self, z):
        """(phi^{-1}(z), (phi^{-1})'(z)) at complex points."""
        z = np.asarray(z, dtype=np.complex128)
        if self.legs is not None:
            d = np.ones_like(z)
            for v, t in self.legs:
                z, p, _ = v.integrate(-t, z)
                d = d * p
            return z, d
        x = _newton_invert(self.displacement, z)
        return x, 1.0 / (1 + self.displacement.derivative(1)(x))

    def strip_radius(self) -> float:
        return self.displacement.strip_radius()

    def to_dict(self) -> dict:
        d = {"displacement": self.displacement.to_dict(), "strip_bound": self.strip_bound}
        if self.legs:
            d["legs"] = [{"field": v.series.to_dict(), "t": t} for v, t in self.legs]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CircleMap":
        legs = None
        if "legs" in d:
            legs = tuple((VectorField(AnalyticPeriodic.from_dict(l["field"])), float(l["t"])) for l in d["legs"])
        return cls(AnalyticPeriodic.from_dict(d["displacement"]), float(d["strip_bound"]), legs)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "CircleMap":
        return cls.from_dict(json.loads(s))


def identity(N: int = DEFAULT_ORDER) -> CircleMap:
    return CircleMap(AnalyticPeriodic(np.zeros(2 * N + 1)), 0.0, ())


def _from_values(values, legs, N) -> CircleMap:
    th = grid_angles(N)
    disp = fit(np.asarray(values) - th)
    bound = float(np.max(np.abs(np.imag(values))))
    return CircleMap(disp, bound, legs)


def translation(a: complex, N: int = DEFAULT_ORDER) -> CircleMap:
    """theta -> theta + a; real a rotates, imaginary a shifts vertically."""
    if a == 0:
        return identity(N)
    return flow(VectorField.from_modes({0: complex(a)}), 1.0, N=N)


def flow(v: VectorField, t: float, steps: int | None = None, N: int = DEFAULT_ORDER) -> CircleMap:
    """Time-t map of the flow of v, integrated on the fitting grid."""
    if t == 0 or v.is_zero:
        return identity(N)
    th = grid_angles(N).astype(np.complex128)
    z, p, top = v.integrate(t, th, steps)
    if not np.all(np.isfinite(z)) or top >= min(STRIP_LIMIT, v.series.strip_radius()):
        raise StripExceededError(f"trajectory reached |Im| = {top:.3g}")
    if v.is_real and np.min(p.real) <= 0:
        raise InjectivityError("flow of a real field folded the circle")
    return _from_values(z, ((v, float(t)),), N)


def compose(phi: CircleMap, psi: CircleMap) -> CircleMap:
    """phi o psi."""
    if phi.is_identity:
        return psi
    if psi.is_identity:
        return phi
    N = max(phi.N, psi.N)
    inner = psi.values() if psi.N == N else grid_angles(N) + psi.displacement(grid_angles(N), check=False)
    if phi.legs is None:
        top = float(np.max(np.abs(inner.imag)))
        if top >= phi.strip_radius():
            raise NonComposableError(f"psi(S^1) reaches |Im| = {top:.3g}, outside the strip of phi ({phi.strip_radius():.3g})")
    values, _ = phi.forward(inner)
    legs = phi.legs + psi.legs if phi.legs is not None and psi.legs is not None else None
    bound = float(np.max(np.abs(values.imag)))
    if not bound < STRIP_LIMIT:
        raise NonComposableError(f"composite strip bound {bound:.3g} is not below {STRIP_LIMIT}")
    return _from_values(values, legs, N)


def _newton_invert(p: AnalyticPeriodic, target):
    """Solve x + p(x) = target pointwise."""
    target = np.asarray(target, dtype=np.complex128)
    dp = p.derivative(1)
    x = target - p(target, check=False)
    for _ in range(NEWTON_MAXIT):
        r = x + p(x, check=False) - target
        step = r / (1 + dp(x, check=False))
        x = x - step
        if np.all(np.abs(step) <= NEWTON_TOL * (1 + np.abs(x))):
            return x
    raise NewtonError(f"inverse did not converge in {NEWTON_MAXIT} iterations")


def check_injective(phi: CircleMap) -> None:
    """phi' must not vanish on the circle and must have winding number 0."""
    dvals = 1 + phi.displacement.derivative(1).samples(2 * phi.N)
    if np.min(np.abs(dvals)) < 1e-10:
        raise InjectivityError("phi' vanishes on the circle")
    arg = np.unwrap(np.angle(np.append(dvals, dvals[0])))
    if abs(arg[-1] - arg[0]) > np.pi:
        raise InjectivityError("phi' winds around 0")
    if phi.is_real and np.min(dvals.real) <= 0:
        raise InjectivityError("real map is not orientation preserving")


def inverse(phi: CircleMap) -> CircleMap:
    """Newton inversion on the fitting grid."""
    if phi.is_identity:
        return phi
    check_injective(phi)
    th = grid_angles(phi.N)
    x = _newton_invert(phi.displacement, th.astype(np.complex128))
    legs = tuple((v, -t) for v, t in reversed(phi.legs)) if phi.legs is not None else None
    disp = fit(x - th)
    bound = float(np.max(np.abs(x.imag)))
    return CircleMap(disp, bound, legs)


def dersq(phi: CircleMap, z):
    """F_phi(z) = |(phi^{-1})'(z)|^2."""
    z = np.asarray(z, dtype=np.complex128)
    if phi.legs is None:
        r = phi.strip_radius()
        if np.size(z) and np.max(np.abs(z.imag)) >= r + phi.strip_bound:
            raise StripExceededError("point outside the analytic strip of phi^{-1}")
    _, d = phi.backward(z)
    out = np.abs(d) ** 2
    if not np.all(np.isfinite(out)) or np.any(out <= 0):
        raise StripExceededError("inverse derivative degenerate")
    return out
