"""Excited-state propagator G(t) of the decaying qubit.

G solves ``G'(t) = -int_0^t g(t - s) G(s) ds`` with ``G(0) = 1``; the excited
amplitude is ``c1(t) = c1(0) G(t)``.  Three routes are provided: the closed
form for a Lorentzian bath, an RK4 integration of the equivalent two-component
local system, and a product-integration Volterra solver for any kernel.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from ._rk4 import rk4_linear_matrix
from .errors import NumericalToleranceError
from .spectral import LorentzianSpectrum

METHODS = ("analytic", "ode-reduction", "volterra-trapezoid")
NORM_SLACK = 1e-3


@dataclass(frozen=True)
class QubitState:
    """Initial qubit amplitudes ``c0|0> + c1_0|1>``, bath in vacuum."""

    c0: complex
    c1_0: complex

    def __post_init__(self):
        object.__setattr__(self, "c0", complex(self.c0))
        object.__setattr__(self, "c1_0", complex(self.c1_0))
        norm = abs(self.c0) ** 2 + abs(self.c1_0) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state not normalized: |c0|^2 + |c1|^2 = {norm!r}")

    @classmethod
    def balanced(cls) -> "QubitState":
        """Equal-weight superposition c0 = c1(0) = 1/sqrt(2)."""
        r = 1 / np.sqrt(2.0)
        return cls(r, r)

    @property
    def p0(self) -> float:
        return abs(self.c0) ** 2

    @property
    def p1(self) -> float:
        return abs(self.c1_0) ** 2


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 1e-3
    t_max: float = 10.0
    method: str = "analytic"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not self.t_max >= 0:
            raise ValueError(f"t_max must be >= 0, got {self.t_max}")
        if self.t_max > 0 and self.dt > self.t_max:
            raise ValueError(f"dt={self.dt} exceeds t_max={self.t_max}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")

    @property
    def n_steps(self) -> int:
        return int(np.ceil(self.t_max / self.dt - 1e-9))

    def grid(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt


@dataclass(frozen=True)
class AmplitudeTrajectory:
    """G sampled on a uniform grid; calling it interpolates (cubic) off-grid."""

    t_grid: np.ndarray
    values: np.ndarray
    _spline: CubicSpline | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        t = np.asarray(self.t_grid, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("t_grid and values must be 1-d arrays of equal length")
        object.__setattr__(self, "t_grid", t)
        object.__setattr__(self, "values", v)

    @property
    def t_max(self) -> float:
        return float(self.t_grid[-1])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > self.t_max * (1 + 1e-12)):
            raise ValueError(f"query outside trajectory range [0, {self.t_max}]")
        if self._spline is None:
            object.__setattr__(self, "_spline", CubicSpline(self.t_grid, self.values))
        out = self._spline(t)
        return out if out.ndim else complex(out)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "re_G", "im_G", "abs_G"])
            for t, g in zip(self.t_grid, self.values):
                w.writerow([f"{t:.12g}", f"{g.real:.12g}", f"{g.imag:.12g}", f"{abs(g):.12g}"])


def _sinhc(z):
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-3
    zs = np.where(small, 1.0, z)
    z2 = z * z
    return np.where(small, 1 + z2 / 6 + z2 * z2 / 120, np.sinh(zs) / zs)


def propagator_analytic(spec: LorentzianSpectrum, t):
    """Closed-form G(t) for the Lorentzian bath.

    Written as ``cosh(z) + (a t/2) sinh(z)/z`` with ``z = d t/2``, which is even
    in ``d`` (so the square-root branch is irrelevant) and regular at ``d = 0``.
    Large ``Re z`` switches to the equivalent exponential form to avoid overflow.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("propagator_analytic requires t >= 0")
    a = spec.lam - 1j * spec.delta
    d = np.sqrt(a * a - 2 * spec.gamma * spec.lam + 0j)
    z = 0.5 * d * t
    big = z.real > 20.0
    tb = np.where(big, 0.0, t)
    zb = 0.5 * d * tb
    direct = np.exp(-0.5 * a * tb) * (np.cosh(zb) + 0.5 * a * tb * _sinhc(zb))
    if np.any(big):
        r = a / d
        te = np.where(big, t, 0.0)
        expo = 0.5 * ((1 + r) * np.exp(0.5 * (d - a) * te)
                      + (1 - r) * np.exp(-0.5 * (d + a) * te))
        direct = np.where(big, expo, direct)
    return direct if direct.ndim else complex(direct)


def _check_norm(values, dt):
    peak = np.max(np.abs(values))
    if peak > 1 + NORM_SLACK:
        raise NumericalToleranceError(
            f"|G| reached {peak:.6g} > 1 + {NORM_SLACK:g}; step size dt={dt:g} too large")


def propagator_ode(spec: LorentzianSpectrum, cfg: SolverConfig) -> AmplitudeTrajectory:
    """RK4 on ``G' = -(gamma lam/2) y, y' = (i delta - lam) y + G``.

    The auxiliary ``y(t) = int_0^t exp((i delta - lam)(t-s)) G(s) ds`` turns the
    exponential memory into a local system.
    """
    a = np.array([[0.0, -spec.kernel_zero],
                  [1.0, 1j * spec.delta - spec.lam]], dtype=complex)
    step = rk4_linear_matrix(a, cfg.dt)
    t = cfg.grid()
    out = np.empty((t.size, 2), dtype=complex)
    out[0] = (1.0, 0.0)
    for n in range(t.size - 1):
        out[n + 1] = step @ out[n]
    _check_norm(out[:, 0], cfg.dt)
    return AmplitudeTrajectory(t, out[:, 0])


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_GL_U = 0.5 * (_GL_NODES + 1.0)
_GL_W = 0.5 * _GL_WEIGHTS


def _eval_kernel(kernel, s):
    try:
        out = np.asarray(kernel(s), dtype=complex)
    except (TypeError, ValueError):
        out = None
    if out is None or out.shape != s.shape:
        # scalar-only kernel
        out = np.vectorize(lambda x: complex(kernel(x)), otypes=[complex])(s)
    return out


def product_weights(kernel: Callable, h: float, n: int):
    """Exact-in-kernel trapezoid weights for ``int g(t_n - s) G(s) ds``.

    With G linear on each cell, cell ``[t_j, t_j+1]`` contributes
    ``A[m] G_j + B[m] G_{j+1}`` where ``m = n - j``; the cell integrals of the
    kernel against the two hat functions use 8-point Gauss-Legendre.
    """
    m = np.arange(1, n + 1)[:, None]
    g = _eval_kernel(kernel, (m - _GL_U[None, :]) * h)
    a = h * (g * ((1 - _GL_U) * _GL_W)).sum(axis=1)
    b = h * (g * (_GL_U * _GL_W)).sum(axis=1)
    return a, b


def propagator_volterra(kernel: Callable, cfg: SolverConfig) -> AmplitudeTrajectory:
    """Second-order product-integration solver for the memory equation.

    The convolution uses ``product_weights``; the outer time integral is the
    trapezoid rule, and since the equation is linear the implicit trapezoid
    update is solved in closed form at each step.
    """
    h = cfg.dt
    t = cfg.grid()
    n = t.size - 1
    G = np.empty(n + 1, dtype=complex)
    G[0] = 1.0
    if n == 0:
        return AmplitudeTrajectory(t, G)
    a, b = product_weights(kernel, h, n + 1)
    # w[m-1] = A_m + B_{m+1}: total weight of G_j at separation m = n - j >= 1
    w = a[:-1] + b[1:]
    w_rev = w[::-1].copy()
    b1 = b[0]
    denom = 1.0 + 0.5 * h * b1
    conv = 0.0 + 0.0j  # I_0
    for k in range(n):
        # S_{k+1} = A_{k+1} G_0 + sum_{j=1}^{k} W_{k+1-j} G_j
        s_next = a[k] * G[0]
        if k:
            s_next += np.dot(w_rev[n - k:], G[1:k + 1])
        G[k + 1] = (G[k] - 0.5 * h * (conv + s_next)) / denom
        conv = s_next + b1 * G[k + 1]
    _check_norm(G, h)
    return AmplitudeTrajectory(t, G)


def solve(spec: LorentzianSpectrum, cfg: SolverConfig) -> AmplitudeTrajectory:
    if cfg.method == "analytic":
        t = cfg.grid()
        return AmplitudeTrajectory(t, propagator_analytic(spec, t))
    if cfg.method == "ode-reduction":
        return propagator_ode(spec, cfg)
    return propagator_volterra(spec.kernel, cfg)
