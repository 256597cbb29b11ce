"""Conformal map of a deformed cylinder onto a straight one.

The region between the curve phi(S^1) and the line Im z = h is mapped by

    F(z) = z + alpha + sum_{n=1}^M a_n e^{inz} + sum_{n=1}^M b_n e^{-inz}

onto S^1 x [0, tau].  Both boundary conditions are linear in the
unknowns, so alpha, a, b and tau come from one least-squares solve.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .deformations import CircleMap, identity
from .errors import (
    ConformalityError,
    IllConditionedError,
    NewtonError,
    OutsideDomainError,
    PreconditionError,
    ResidualError,
)

DEFAULT_MODES = 48
OVERSAMPLE = 4
NORMALIZATION_WEIGHT = 1e6
COND_LIMIT = 1e12
RESIDUAL_TOL = 1e-8
CONFORMAL_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class DeformedCylinder:
    lower: CircleMap
    upper_height: float = 1.0

    def __post_init__(self):
        if self.lower.strip_bound >= self.upper_height and np.max(self.lower.values().imag) >= self.upper_height:
            raise PreconditionError("lower boundary touches the upper line")

    @classmethod
    def standard(cls) -> "DeformedCylinder":
        return cls(identity(), 1.0)


@dataclass(frozen=True, eq=False)
class UniformizationResult:
    tau: float
    alpha: complex
    a: np.ndarray
    b: np.ndarray
    residual: float
    upper_height: float = 1.0
    lower_min: float = 0.0

    def __post_init__(self):
        M = len(self.a)
        n = np.arange(1, M + 1, dtype=float)
        modes = np.concatenate([n, -n])
        c = np.concatenate([np.asarray(self.a, complex), np.asarray(self.b, complex)])
        object.__setattr__(self, "_modes", modes)
        object.__setattr__(self, "_c", c)
        object.__setattr__(self, "_dc", c * 1j * modes)

    @property
    def M(self) -> int:
        return len(self.a)

    def __call__(self, z):
        z = np.asarray(z, dtype=np.complex128)
        return z + self.alpha + _kernels.series(self._modes, self._c, z)

    def derivative(self, z):
        z = np.asarray(z, dtype=np.complex128)
        return 1 + _kernels.series(self._modes, self._dc, z)

    def to_dict(self) -> dict:
        return {
            "tau": self.tau,
            "alpha": {"re": self.alpha.real, "im": self.alpha.imag},
            "a": {"re": np.real(self.a).tolist(), "im": np.imag(self.a).tolist()},
            "b": {"re": np.real(self.b).tolist(), "im": np.imag(self.b).tolist()},
            "residual": self.residual,
            "upper_height": self.upper_height,
            "lower_min": self.lower_min,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "UniformizationResult":
        d = json.loads(s)
        cx = lambda e: np.asarray(e["re"]) + 1j * np.asarray(e["im"])  # noqa: E731
        al = d["alpha"]
        alpha = complex(al["re"], al["im"]) if isinstance(al, dict) else complex(al)
        return cls(d["tau"], alpha, cx(d["a"]), cx(d["b"]), d["residual"],
                   d.get("upper_height", 1.0), d.get("lower_min", 0.0))


def uniformize(cyl: DeformedCylinder, M: int = DEFAULT_MODES, tol: float = RESIDUAL_TOL) -> UniformizationResult:
    h = float(cyl.upper_height)
    K = OVERSAMPLE * M
    th = 2 * np.pi * np.arange(K) / K
    lower, _ = cyl.lower.forward(th.astype(np.complex128))
    upper = th + 1j * h
    n = np.arange(1, M + 1)

    def basis(z):
        # b-columns are rescaled by e^{-nh} so both families stay O(1)
        return np.exp(1j * np.outer(z, n)), np.exp(-1j * np.outer(z - 1j * h, n))

    # unknowns: Re alpha, Im alpha, Re a, Im a, Re bs, Im bs, tau
    ncol = 3 + 4 * M
    blocks, rhs = [], []
    for z, is_upper in ((lower, False), (upper, True)):
        Ea, Eb = basis(z)
        A = np.zeros((z.size, ncol))
        A[:, 1] = 1.0
        A[:, 2:2 + M] = Ea.imag
        A[:, 2 + M:2 + 2 * M] = Ea.real
        A[:, 2 + 2 * M:2 + 3 * M] = Eb.imag
        A[:, 2 + 3 * M:2 + 4 * M] = Eb.real
        if is_upper:
            A[:, -1] = -1.0
        blocks.append(A)
        rhs.append(-z.imag)
    z0 = np.array([1j * h])
    Ea, Eb = basis(z0)
    A = np.zeros((1, ncol))
    A[0, 0] = 1.0
    A[0, 2:2 + M] = Ea.real
    A[0, 2 + M:2 + 2 * M] = -Ea.imag
    A[0, 2 + 2 * M:2 + 3 * M] = Eb.real
    A[0, 2 + 3 * M:2 + 4 * M] = -Eb.imag
    collocation = np.vstack(blocks)
    cond = np.linalg.cond(np.vstack([collocation, A]))
    if not cond < COND_LIMIT:
        raise IllConditionedError(f"collocation condition number {cond:.2e}")
    system = np.vstack([collocation, NORMALIZATION_WEIGHT * A])
    r = np.concatenate(rhs + [NORMALIZATION_WEIGHT * -z0.real])
    sol = np.linalg.lstsq(system, r, rcond=None)[0]
    residual = float(np.max(np.abs(collocation @ sol - np.concatenate(rhs))))
    if residual > tol:
        raise ResidualError(f"boundary residual {residual:.2e} above {tol:.0e}")
    alpha = complex(sol[0], sol[1])
    a = sol[2:2 + M] + 1j * sol[2 + M:2 + 2 * M]
    b = (sol[2 + 2 * M:2 + 3 * M] + 1j * sol[2 + 3 * M:2 + 4 * M]) * np.exp(-n * h)
    tau = float(sol[-1])
    out = UniformizationResult(tau, alpha, a, b, residual, h, float(np.min(lower.imag)))
    probe = np.concatenate([lower, upper, th + 0.5j * (h + lower.imag)])
    if np.min(np.abs(out.derivative(probe))) < CONFORMAL_TOL:
        raise ConformalityError("uniformizing map is not conformal on the domain")
    return out


def _check_inside(u: UniformizationResult, z, slack: float = 1e-9):
    im = np.imag(z)
    if np.size(z) and (np.max(im) > u.upper_height + slack or np.min(im) < u.lower_min - 0.5):
        raise OutsideDomainError("point lies outside the deformed cylinder")


def unif_factor(u: UniformizationResult, z):
    """|F'(z)|^2."""
    _check_inside(u, z)
    return np.abs(u.derivative(z)) ** 2


def invert_map(u: UniformizationResult, w, maxit: int = 50, tol: float = 1e-13):
    """Newton solve of F(z) = w starting from z = w."""
    w = np.asarray(w, dtype=np.complex128)
    im = np.imag(w)
    if np.size(w) and (np.min(im) < -1e-9 or np.max(im) > u.tau + 1e-9):
        raise OutsideDomainError("target lies outside S^1 x [0, tau]")
    z = w.copy()
    for _ in range(maxit):
        step = (u(z) - w) / u.derivative(z)
        z = z - step
        if np.all(np.abs(step) <= tol * (1 + np.abs(z))):
            return z
    raise NewtonError(f"invert_map did not converge in {maxit} iterations")
