"""Brute-force check: a finite bath of N modes evolved exactly in the one-excitation sector.

Nothing here uses the closed-form propagator or correlator formulas.  The
state ``c0|0,vac> + c1|1,vac> + sum_k ck|0,1_k>`` is integrated with RK4 in the
interaction picture, and two-time correlators are built by literally applying
sigma_-/sigma_+ between evolutions.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from ._rk4 import rk4_step
from .amplitude import QubitState
from .errors import NumericalToleranceError
from .spectral import LorentzianSpectrum, lorentzian_density

NORM_ABORT = 1e-6
KINDS = ("+-", "-+", "--", "++")


class UnderResolvedBathWarning(UserWarning):
    pass


@dataclass(frozen=True)
class DiscretizedBath:
    mode_freqs: np.ndarray
    couplings: np.ndarray
    omega0: float = 1.0

    def __post_init__(self):
        w = np.asarray(self.mode_freqs, dtype=float)
        g = np.asarray(self.couplings, dtype=complex)
        if w.ndim != 1 or w.shape != g.shape or w.size < 1:
            raise ValueError("mode_freqs and couplings must be equal-length 1-d arrays")
        object.__setattr__(self, "mode_freqs", w)
        object.__setattr__(self, "couplings", g)

    @property
    def count(self) -> int:
        return self.mode_freqs.size

    @property
    def detunings(self) -> np.ndarray:
        return self.omega0 - self.mode_freqs

    def total_coupling(self) -> float:
        return float(np.sum(np.abs(self.couplings) ** 2))

    def kernel(self, s):
        """Bath correlation sum_k |g_k|^2 exp(i (w0 - w_k) s)."""
        s = np.asarray(s, dtype=float)
        g2 = np.abs(self.couplings) ** 2
        out = np.exp(1j * np.multiply.outer(s, self.detunings)) @ g2
        return out if out.ndim else complex(out)


def discretize(spec: LorentzianSpectrum, n_modes: int, half_width: float) -> DiscretizedBath:
    """Uniform midpoint-free sampling of J on ``peak +- half_width``, ``g_k = sqrt(J dw)``."""
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    if half_width <= 0:
        raise ValueError("half_width must be > 0")
    if half_width < 5 * spec.lam:
        warnings.warn(f"half_width={half_width:g} < 5*lam: bath tails under-resolved",
                      UnderResolvedBathWarning, stacklevel=2)
    if n_modes == 1:
        freqs = np.array([spec.peak])
        dw = 2 * half_width
    else:
        freqs = np.linspace(spec.peak - half_width, spec.peak + half_width, n_modes)
        dw = freqs[1] - freqs[0]
    couplings = np.sqrt(lorentzian_density(spec, freqs) * dw)
    return DiscretizedBath(freqs, np.atleast_1d(couplings), spec.omega0)


@dataclass(frozen=True)
class SingleExcitationState:
    c0: complex
    c1: complex
    ck: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "c0", complex(self.c0))
        object.__setattr__(self, "c1", complex(self.c1))
        object.__setattr__(self, "ck", np.asarray(self.ck, dtype=complex))

    @classmethod
    def initial(cls, state: QubitState, bath: DiscretizedBath):
        return cls(state.c0, state.c1_0, np.zeros(bath.count, dtype=complex))

    def norm2(self) -> float:
        return abs(self.c0) ** 2 + abs(self.c1) ** 2 + float(np.sum(np.abs(self.ck) ** 2))

    def inner(self, other: "SingleExcitationState") -> complex:
        """<self|other>."""
        return (np.conj(self.c0) * other.c0 + np.conj(self.c1) * other.c1
                + np.vdot(self.ck, other.ck))

    def lower(self) -> "SingleExcitationState":
        """sigma_-: |1,vac> -> |0,vac>; annihilates the rest."""
        return SingleExcitationState(self.c1, 0.0, np.zeros_like(self.ck))

    def raise_(self) -> "SingleExcitationState":
        """sigma_+ restricted to the sector: |0,vac> -> |1,vac>.

        sigma_+ also maps |0,1_k> to |1,1_k>, which lies outside the
        one-excitation sector and is dropped.
        """
        return SingleExcitationState(0.0, self.c0, np.zeros_like(self.ck))


def _rhs(bath):
    g = bath.couplings
    gc = np.conj(g)
    det = bath.detunings

    # y = [c1, c_k...]; c0 is decoupled and constant
    def f(t, y):
        ph = np.exp(1j * det * t)
        out = np.empty_like(y)
        out[0] = -1j * np.dot(g * ph, y[1:])
        out[1:] = -1j * gc * np.conj(ph) * y[0]
        return out
    return f


def _steps(t_from, t_to, dt):
    n = int(np.ceil((t_to - t_from) / dt - 1e-9))
    return n, ((t_to - t_from) / n if n else 0.0)


def evolve(bath: DiscretizedBath, psi: SingleExcitationState, t_from: float, t_to: float,
           dt: float = 1e-3, record: np.ndarray | None = None):
    """RK4 in the interaction picture from ``t_from`` to ``t_to``.

    The step is shrunk so an integer number of steps lands exactly on ``t_to``.
    If ``record`` (sorted times within the interval, on step boundaries up to
    rounding) is given, returns ``(final_state, c1_at_record_times)``.
    """
    if t_to < t_from:
        raise ValueError("evolve requires t_to >= t_from")
    if dt <= 0:
        raise ValueError("dt must be > 0")
    n, h = _steps(t_from, t_to, dt)
    f = _rhs(bath)
    y = np.concatenate([[psi.c1], psi.ck])
    norm0 = psi.norm2()
    rec_out = None
    rec_idx = None
    if record is not None:
        rec_idx = np.rint((np.asarray(record, dtype=float) - t_from) / h).astype(int) if n else \
            np.zeros(len(record), dtype=int)
        rec_out = np.empty(len(rec_idx), dtype=complex)
        rec_out[rec_idx == 0] = y[0]
    for k in range(n):
        y = rk4_step(f, t_from + k * h, y, h)
        if rec_idx is not None:
            rec_out[rec_idx == k + 1] = y[0]
    out = SingleExcitationState(psi.c0, y[0], y[1:])
    drift = abs(out.norm2() - norm0)
    if drift > NORM_ABORT:
        raise NumericalToleranceError(
            f"norm drift {drift:.3g} over [{t_from:g}, {t_to:g}] exceeds {NORM_ABORT:g}; "
            f"reduce dt (currently {h:g})")
    return out if record is None else (out, rec_out)


def c1_trajectory(bath: DiscretizedBath, state: QubitState, times, dt: float = 1e-3):
    """Oracle c1(t) at each of the sorted, non-negative ``times``."""
    times = np.asarray(times, dtype=float)
    psi0 = SingleExcitationState.initial(state, bath)
    _, c1 = evolve(bath, psi0, 0.0, float(times[-1]), dt, record=times)
    return c1


_FIRST = {"+-": "lower", "-+": "raise_", "--": "lower", "++": "raise_"}
_SECOND = {"+-": "raise_", "-+": "lower", "--": "lower", "++": "raise_"}


def oracle_correlator(bath: DiscretizedBath, state: QubitState, kind: str, t1: float,
                      t2: float, dt: float = 1e-3, picture: str = "heisenberg") -> complex:
    """<A(t1) B(t2)> with ``kind = "AB"`` in {"+-", "-+", "--", "++"}.

    For ``t1 >= t2``: evolve to t2, apply B, evolve to t1, apply A, overlap with
    the evolved initial state at t1.  ``t1 < t2`` is the conjugate of the
    swapped ordering.  ``picture="heisenberg"`` restores the free qubit phase
    exp(+-i w0 t) carried by each sigma_+- outside the interaction picture.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    if t1 < 0 or t2 < 0:
        raise ValueError("times must be >= 0")
    if t1 < t2:
        swapped = {"+-": "+-", "-+": "-+", "--": "++", "++": "--"}[kind]
        return complex(np.conj(oracle_correlator(bath, state, swapped, t2, t1, dt, picture)))
    psi = SingleExcitationState.initial(state, bath)
    psi_t2 = evolve(bath, psi, 0.0, t2, dt)
    psi_t1 = evolve(bath, psi_t2, t2, t1, dt)
    phi = getattr(psi_t2, _FIRST[kind])()
    phi = evolve(bath, phi, t2, t1, dt)
    phi = getattr(phi, _SECOND[kind])()
    val = psi_t1.inner(phi)
    if picture == "heisenberg":
        val *= _free_phase(kind, bath.omega0, t1, t2)
    elif picture != "interaction":
        raise ValueError("picture must be 'heisenberg' or 'interaction'")
    return complex(val)


def _free_phase(kind, w0, t1, t2):
    sign = {"+": 1.0, "-": -1.0}
    return np.exp(1j * w0 * (sign[kind[0]] * t1 + sign[kind[1]] * t2))


def oracle_correlator_grid(bath: DiscretizedBath, state: QubitState, times, dt: float = 1e-3,
                           picture: str = "heisenberg"):
    """Both ``+-`` and ``-+`` correlators on every pair of a sorted time list.

    Equivalent to calling :func:`oracle_correlator` per pair but shares the
    forward evolutions.  Returns a dict ``kind -> (n, n) array`` indexed
    ``[i1, i2]`` for ``(times[i1], times[i2])``.
    """
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) <= 0) or times[0] < 0:
        raise ValueError("times must be sorted, distinct and >= 0")
    n = times.size
    out = {k: np.zeros((n, n), dtype=complex) for k in ("+-", "-+")}
    psi = SingleExcitationState.initial(state, bath)
    states = [evolve(bath, psi, 0.0, times[0], dt)]
    for a, b in zip(times[:-1], times[1:]):
        states.append(evolve(bath, states[-1], a, b, dt))
    for i2 in range(n):
        for kind in out:
            phi = getattr(states[i2], _FIRST[kind])()
            for i1 in range(i2, n):
                if i1 > i2:
                    phi = evolve(bath, phi, times[i1 - 1], times[i1], dt)
                val = states[i1].inner(getattr(phi, _SECOND[kind])())
                if picture == "heisenberg":
                    val *= _free_phase(kind, bath.omega0, times[i1], times[i2])
                out[kind][i1, i2] = val
                out[kind][i2, i1] = np.conj(val)
    return out


def write_comparison_csv(path, times, c1_oracle, c1_analytic):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "re_c1_oracle", "im_c1_oracle", "re_c1_analytic", "im_c1_analytic",
                    "abs_err"])
        for t, a, b in zip(times, c1_oracle, c1_analytic):
            w.writerow([f"{x:.12g}" for x in (t, a.real, a.imag, b.real, b.imag, abs(a - b))])
