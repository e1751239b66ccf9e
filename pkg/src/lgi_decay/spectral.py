"""Spectral densities and the reservoir memory kernel.

All frequencies and rates are in units of the qubit frequency ``omega0`` and
all times in units of ``1/omega0``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class SpectrumWindowWarning(UserWarning):
    """Tabulated density is still large at the edge of its window."""


@dataclass(frozen=True)
class LorentzianSpectrum:
    """Lorentzian bath with coupling ``gamma``, width ``lam`` and detuning ``delta``."""

    gamma: float
    lam: float
    delta: float = 0.0
    omega0: float = 1.0

    def __post_init__(self):
        for name in ("gamma", "lam", "delta", "omega0"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.lam <= 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")
        if self.omega0 <= 0:
            raise ValueError(f"omega0 must be > 0, got {self.omega0}")

    @property
    def peak(self) -> float:
        """Frequency at which the density is maximal."""
        return self.omega0 - self.delta

    @property
    def kernel_zero(self) -> float:
        """g(0) = gamma*lam/2, also the full-line integral of the density."""
        return 0.5 * self.gamma * self.lam

    def density(self, omega):
        return lorentzian_density(self, omega)

    def kernel(self, s):
        return memory_kernel(self, s)


def lorentzian_density(spec: LorentzianSpectrum, omega):
    omega = np.asarray(omega, dtype=float)
    x = spec.omega0 - omega - spec.delta
    out = spec.gamma * spec.lam**2 / (x * x + spec.lam**2) / (2 * np.pi)
    return out if out.ndim else float(out)


def memory_kernel(spec: LorentzianSpectrum, s):
    """Closed-form bath correlation g(s) = (gamma*lam/2) exp((i*delta - lam) s).

    Only defined for ``s >= 0``; use ``conj(g(s))`` for negative separations.
    """
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("memory_kernel requires s >= 0; use conj(g(-s)) for s < 0")
    out = spec.kernel_zero * np.exp((1j * spec.delta - spec.lam) * s)
    return out if out.ndim else complex(out)


@dataclass(frozen=True)
class TabulatedSpectrum:
    """Spectral density sampled on a strictly increasing frequency grid."""

    omega: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if omega.ndim != 1 or omega.shape != values.shape:
            raise ValueError("omega and values must be 1-d arrays of equal length")
        if omega.size < 2:
            raise ValueError("need at least two samples")
        if np.any(np.diff(omega) <= 0):
            raise ValueError("omega grid must be strictly increasing")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("spectral density samples must be finite and >= 0")
        omega.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "values", values)

    @property
    def window(self) -> tuple[float, float]:
        return float(self.omega[0]), float(self.omega[-1])

    @classmethod
    def from_lorentzian(cls, spec: LorentzianSpectrum, half_width: float, n_points: int):
        omega = np.linspace(spec.peak - half_width, spec.peak + half_width, n_points)
        return cls(omega, lorentzian_density(spec, omega))

    @classmethod
    def from_file(cls, path):
        # two columns "omega J", '#' comments
        data = np.loadtxt(path, comments="#", ndmin=2)
        if data.shape[1] != 2:
            raise ValueError(f"{path}: expected 2 columns, found {data.shape[1]}")
        return cls(data[:, 0], data[:, 1])

    def to_file(self, path):
        np.savetxt(Path(path), np.column_stack([self.omega, self.values]),
                   header="omega  J", fmt="%.12g")

    def total_weight(self) -> float:
        return float(np.trapezoid(self.values, self.omega))


def memory_kernel_quadrature(tab: TabulatedSpectrum, omega0: float, s, tol: float = 1e-3):
    """Trapezoidal approximation of the kernel integral over the tabulated window.

    A ``SpectrumWindowWarning`` is emitted when either boundary sample exceeds
    ``tol`` times the peak sample, i.e. the window visibly truncates the tails.
    """
    peak = tab.values.max()
    if peak > 0 and max(tab.values[0], tab.values[-1]) > tol * peak:
        warnings.warn(
            f"spectral window {tab.window} truncates the density: boundary value "
            f"exceeds {tol:g} x peak", SpectrumWindowWarning, stacklevel=2)
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s_arr < 0):
        raise ValueError("memory_kernel_quadrature requires s >= 0")
    detune = omega0 - tab.omega
    out = np.array([np.trapezoid(tab.values * np.exp(1j * detune * si), tab.omega)
                    for si in s_arr])
    return out.reshape(np.shape(s)) if np.ndim(s) else complex(out[0])
