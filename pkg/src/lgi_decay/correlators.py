"""Two-time sigma_x correlators and the Leggett-Garg witnesses C3 / C4.

Every function takes an optional ``propagator`` (a callable ``t -> G(t)``,
vectorized over numpy arrays).  When omitted the closed-form Lorentzian
propagator of ``spec`` is used, so numerical trajectories from
:mod:`lgi_decay.amplitude` can be swapped in for cross-checks.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .amplitude import QubitState, propagator_analytic
from .spectral import LorentzianSpectrum

Propagator = Callable[[np.ndarray], np.ndarray]

BOUNDS = {3: 1.0, 4: 2.0}
TERMS = {
    3: (("C21", 1, 0, +1), ("C32", 2, 1, +1), ("C31", 2, 0, -1)),
    4: (("C21", 1, 0, +1), ("C32", 2, 1, +1), ("C43", 3, 2, +1), ("C41", 3, 0, -1)),
}


def _prop(spec, propagator):
    if propagator is not None:
        return propagator
    return lambda t: propagator_analytic(spec, t)


def _scalar(x):
    return x if np.ndim(x) else x.item()


def corr_plus_minus(state: QubitState, spec: LorentzianSpectrum, t1, t2,
                    propagator: Propagator | None = None):
    """<sigma_+(t1) sigma_-(t2)> = |c1(0)|^2 G(t2) G*(t1) exp(-i w0 (t2 - t1))."""
    G = _prop(spec, propagator)
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    out = state.p1 * np.asarray(G(t2)) * np.conj(G(t1)) * np.exp(-1j * spec.omega0 * (t2 - t1))
    return _scalar(np.asarray(out, dtype=complex))


def corr_minus_plus(state: QubitState, spec: LorentzianSpectrum, t1, t2,
                    propagator: Propagator | None = None):
    """<sigma_-(t1) sigma_+(t2)> = |c0|^2 G(t1 - t2) exp(i w0 (t2 - t1)) for t1 >= t2.

    For ``t1 < t2`` the value is the conjugate of the swapped ordering, so G is
    only ever evaluated at non-negative arguments.
    """
    G = _prop(spec, propagator)
    t1, t2 = np.broadcast_arrays(np.asarray(t1, dtype=float), np.asarray(t2, dtype=float))
    sep = np.abs(t1 - t2)
    fwd = state.p0 * np.asarray(G(sep)) * np.exp(-1j * spec.omega0 * sep)
    out = np.where(t1 >= t2, fwd, np.conj(fwd))
    return _scalar(np.asarray(out, dtype=complex))


def c_ji(state: QubitState, spec: LorentzianSpectrum, t_i, t_j,
         propagator: Propagator | None = None):
    """Symmetrized correlator <{sigma_x(t_j), sigma_x(t_i)}>/2 for ``t_i <= t_j``."""
    G = _prop(spec, propagator)
    t_i, t_j = np.broadcast_arrays(np.asarray(t_i, dtype=float), np.asarray(t_j, dtype=float))
    if np.any(t_i < 0) or np.any(t_j < t_i):
        raise ValueError("c_ji requires 0 <= t_i <= t_j")
    sep = t_j - t_i
    phase = np.exp(-1j * spec.omega0 * sep)
    val = (state.p1 * np.asarray(G(t_j)) * np.conj(G(t_i)) + state.p0 * np.asarray(G(sep))) * phase
    return _scalar(np.real(val))


def c_ji_anticommutator(state: QubitState, spec: LorentzianSpectrum, t_i, t_j,
                        propagator: Propagator | None = None):
    """Same quantity assembled from the four unsymmetrized correlators.

    Returns the complex sum so callers can check that its imaginary part vanishes.
    """
    kw = dict(propagator=propagator)
    total = (corr_plus_minus(state, spec, t_i, t_j, **kw)
             + corr_minus_plus(state, spec, t_i, t_j, **kw)
             + corr_plus_minus(state, spec, t_j, t_i, **kw)
             + corr_minus_plus(state, spec, t_j, t_i, **kw))
    return 0.5 * total


@dataclass(frozen=True)
class LgiSchedule:
    t1: float
    tau: float
    order: int = 4

    def __post_init__(self):
        if self.order not in BOUNDS:
            raise ValueError(f"order must be 3 or 4, got {self.order}")
        if self.t1 < 0:
            raise ValueError(f"t1 must be >= 0, got {self.t1}")
        if self.tau < 0:
            raise ValueError(f"tau must be >= 0, got {self.tau}")

    @property
    def times(self) -> tuple[float, ...]:
        return tuple(self.t1 + k * self.tau for k in range(self.order))


@dataclass(frozen=True)
class LgiValue:
    c_terms: dict
    witness: float
    bound: float

    @property
    def violated(self) -> bool:
        return self.witness > self.bound


def _witness_terms(state, spec, t1, tau, order, propagator):
    tau = np.asarray(tau, dtype=float)
    times = [t1 + k * tau for k in range(order)]
    terms = {}
    witness = np.zeros_like(tau)
    for name, j, i, sign in TERMS[order]:
        terms[name] = c_ji(state, spec, times[i], times[j], propagator)
        witness = witness + sign * np.asarray(terms[name])
    return terms, witness


def _lgi(state, spec, sched, order, propagator):
    if sched.order != order:
        raise ValueError(f"schedule has order {sched.order}, expected {order}")
    terms, witness = _witness_terms(state, spec, sched.t1, sched.tau, order, propagator)
    return LgiValue({k: float(v) for k, v in terms.items()}, float(witness), BOUNDS[order])


def lgi_c3(state, spec, sched: LgiSchedule, propagator: Propagator | None = None) -> LgiValue:
    """C3 = C21 + C32 - C31; macrorealist bound 1."""
    return _lgi(state, spec, sched, 3, propagator)


def lgi_c4(state, spec, sched: LgiSchedule, propagator: Propagator | None = None) -> LgiValue:
    """C4 = C21 + C32 + C43 - C41; macrorealist bound 2."""
    return _lgi(state, spec, sched, 4, propagator)


def default_tau_grid(n: int = 400, tau_max: float = 2 * np.pi) -> np.ndarray:
    """``n`` points on ``(0, tau_max]``."""
    return tau_max * np.arange(1, n + 1) / n


@dataclass
class ScanReport:
    order: int
    t1: float
    tau: np.ndarray
    terms: dict
    witness: np.ndarray

    @property
    def bound(self) -> float:
        return BOUNDS[self.order]

    @property
    def max_witness(self) -> float:
        return float(self.witness.max())

    @property
    def argmax_tau(self) -> float:
        return float(self.tau[np.argmax(self.witness)])

    @property
    def violation_intervals(self) -> list[tuple[float, float]]:
        """Maximal runs of grid points where the witness exceeds the bound."""
        above = self.witness > self.bound
        out = []
        start = None
        for k, flag in enumerate(above):
            if flag and start is None:
                start = k
            elif not flag and start is not None:
                out.append((float(self.tau[start]), float(self.tau[k - 1])))
                start = None
        if start is not None:
            out.append((float(self.tau[start]), float(self.tau[-1])))
        return out

    @property
    def last_violation_tau(self) -> float | None:
        iv = self.violation_intervals
        return iv[-1][1] if iv else None

    @property
    def columns(self) -> list[str]:
        return ["tau", *[name for name, *_ in TERMS[self.order]], f"C{self.order}"]

    def rows(self):
        names = [name for name, *_ in TERMS[self.order]]
        for k, tau in enumerate(self.tau):
            yield [tau, *[self.terms[n][k] for n in names], self.witness[k]]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns)
            for row in self.rows():
                w.writerow([f"{x:.12g}" for x in row])

    def summary(self) -> str:
        iv = "[" + ", ".join(f"({a:.6g}, {b:.6g})" for a, b in self.violation_intervals) + "]"
        return (f"max_C{self.order}={self.max_witness:.10g} at tau={self.argmax_tau:.10g}; "
                f"violation_intervals={iv}")


def violation_scan(state: QubitState, spec: LorentzianSpectrum, t1: float, tau_grid,
                   order: int = 4, propagator: Propagator | None = None) -> ScanReport:
    tau = np.asarray(tau_grid, dtype=float)
    if tau.ndim != 1 or tau.size == 0:
        raise ValueError("tau_grid must be a nonempty 1-d sequence")
    if np.any(np.diff(tau) <= 0):
        raise ValueError("tau_grid must be strictly increasing")
    if order not in BOUNDS:
        raise ValueError(f"order must be 3 or 4, got {order}")
    if t1 < 0 or tau[0] < 0:
        raise ValueError("t1 and tau must be >= 0")
    terms, witness = _witness_terms(state, spec, float(t1), tau, order, propagator)
    terms = {k: np.atleast_1d(np.asarray(v, dtype=float)) for k, v in terms.items()}
    return ScanReport(order, float(t1), tau, terms, np.atleast_1d(witness))
