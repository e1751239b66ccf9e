"""``lgi-decay`` command line front end.

Configuration is a flat ``key = value`` file (``#`` comments) plus ``--key value``
overrides; complex values are written ``re,im``.  Exit status: 0 success,
1 configuration error, 2 numerical tolerance failure.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .amplitude import METHODS, QubitState, SolverConfig, propagator_analytic, solve
from .correlators import ScanReport, corr_minus_plus, corr_plus_minus, violation_scan
from .errors import NumericalToleranceError
from .oracle import c1_trajectory, discretize, oracle_correlator_grid, write_comparison_csv
from .spectral import LorentzianSpectrum

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


class ConfigError(ValueError):
    pass


_R = 1 / math.sqrt(2.0)


def _complex(text: str) -> complex:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise ValueError(f"expected 're,im', got {text!r}")


def _opt_float(text: str):
    return None if text.strip().lower() in ("", "none", "auto") else float(text)


# key -> (parser, default)
KEYS = {
    "gamma": (float, 0.1),
    "lambda": (float, 5.0),
    "delta": (float, 0.0),
    "c0": (_complex, complex(_R, 0.0)),
    "c1_0": (_complex, complex(_R, 0.0)),
    "t1": (float, 0.0),
    "tau_min": (_opt_float, None),
    "tau_max": (float, 2 * math.pi),
    "tau_points": (int, 400),
    "order": (int, 4),
    "dt": (float, 1e-3),
    "t_max": (float, 10.0),
    "method": (str, "analytic"),
    "n_modes": (int, 2000),
    "half_width": (_opt_float, None),
    "oracle_t_max": (float, 5.0),
    "oracle_samples": (int, 501),
    "corr_points": (int, 5),
    "c1_tol": (float, 1e-3),
    "corr_tol": (float, 5e-3),
    "figure": (str, "fig1"),
}


@dataclass
class RunConfig:
    values: dict = field(default_factory=lambda: {k: d for k, (_, d) in KEYS.items()})
    out: Path = Path(".")

    def __getitem__(self, key):
        return self.values[key]

    @property
    def spectrum(self) -> LorentzianSpectrum:
        return LorentzianSpectrum(self["gamma"], self["lambda"], self["delta"])

    @property
    def state(self) -> QubitState:
        return QubitState(self["c0"], self["c1_0"])

    @property
    def tau_grid(self) -> np.ndarray:
        n, hi = self["tau_points"], self["tau_max"]
        lo = self["tau_min"]
        if lo is None:
            return hi * np.arange(1, n + 1) / n
        return np.linspace(lo, hi, n)

    @property
    def half_width(self) -> float:
        hw = self["half_width"]
        return 20.0 * self["lambda"] if hw is None else hw

    def solver(self, t_max=None) -> SolverConfig:
        return SolverConfig(self["dt"], self["t_max"] if t_max is None else t_max, self["method"])

    def validate(self):
        """Build every embedded object once so invalid combinations fail at parse time."""
        try:
            self.spectrum
            self.state
            self.solver()
            if self["order"] not in (3, 4):
                raise ValueError(f"order must be 3 or 4, got {self['order']}")
            if self["tau_points"] < 1:
                raise ValueError("tau_points must be >= 1")
            grid = self.tau_grid
            if grid[0] < 0 or (grid.size > 1 and np.any(np.diff(grid) <= 0)):
                raise ValueError("tau grid must be increasing and start at tau >= 0")
            if self["t1"] < 0:
                raise ValueError("t1 must be >= 0")
            if self["method"] not in METHODS:
                raise ValueError(f"method must be one of {METHODS}")
            if self["n_modes"] < 1 or self.half_width <= 0:
                raise ValueError("n_modes must be >= 1 and half_width > 0")
            if self["corr_points"] < 1 or self["oracle_samples"] < 2:
                raise ValueError("corr_points must be >= 1 and oracle_samples >= 2")
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self


def _set(values: dict, key: str, raw: str, origin: str):
    key = key.strip().replace("-", "_")
    if key not in KEYS:
        raise ConfigError(f"{origin}: unknown key {key!r}")
    try:
        values[key] = KEYS[key][0](raw.strip())
    except ValueError as exc:
        raise ConfigError(f"{origin}: bad value for {key!r}: {exc}") from exc


def read_config_file(path, values: dict):
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, raw = line.split("=", 1)
        _set(values, key, raw, f"{path}:{lineno}")


def parse_overrides(tokens: list[str], values: dict):
    it = iter(tokens)
    for tok in it:
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, raw = key.split("=", 1)
        else:
            try:
                raw = next(it)
            except StopIteration:
                raise ConfigError(f"missing value for --{key}") from None
        _set(values, key, raw, "command line")


def build_config(config_file, overrides, out) -> RunConfig:
    cfg = RunConfig(out=Path(out))
    if config_file:
        read_config_file(config_file, cfg.values)
    parse_overrides(overrides, cfg.values)
    return cfg.validate()


def run_scan(cfg: RunConfig, spec: LorentzianSpectrum | None = None) -> ScanReport:
    spec = cfg.spectrum if spec is None else spec
    grid = cfg.tau_grid
    horizon = cfg["t1"] + (cfg["order"] - 1) * grid[-1]
    if cfg["method"] == "analytic":
        prop = None
    else:
        prop = solve(spec, SolverConfig(cfg["dt"], max(horizon, cfg["dt"]), cfg["method"]))
    return violation_scan(cfg.state, spec, cfg["t1"], grid, cfg["order"], propagator=prop)


def cmd_amplitude(cfg: RunConfig) -> int:
    traj = solve(cfg.spectrum, cfg.solver())
    path = cfg.out / "amplitude.csv"
    traj.to_csv(path)
    print(f"wrote {path} ({traj.t_grid.size} rows, method={cfg['method']})")
    return EXIT_OK


def cmd_lgi(cfg: RunConfig) -> int:
    report = run_scan(cfg)
    path = cfg.out / "lgi_scan.csv"
    report.to_csv(path)
    print(report.summary())
    return EXIT_OK


FIGURES = {
    "fig1": ("gamma", (0.01, 0.1, 0.3, 0.5), dict(lam=5.0, delta=0.0)),
    "fig2": ("lambda", (1.0, 5.0, 10.0, 40.0), dict(gamma=0.5, delta=10.0)),
    "fig3": ("delta", (0.0, 5.0, 10.0, 50.0), dict(gamma=0.2, lam=5.0)),
}


@dataclass(frozen=True)
class FigurePreset:
    figure_id: str
    param: str
    values: tuple
    fixed: dict
    t1: float = 0.0

    @classmethod
    def get(cls, figure_id: str) -> "FigurePreset":
        if figure_id not in FIGURES:
            raise ConfigError(f"unknown figure {figure_id!r}; choose from {sorted(FIGURES)}")
        param, values, fixed = FIGURES[figure_id]
        return cls(figure_id, param, values, fixed)

    def spectra(self):
        key = {"gamma": "gamma", "lambda": "lam", "delta": "delta"}[self.param]
        return [LorentzianSpectrum(**{**self.fixed, key: v}) for v in self.values]


def thread_count() -> int:
    raw = os.environ.get("LGI_DECAY_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"LGI_DECAY_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError("LGI_DECAY_THREADS must be >= 1")
    return n


def figure_scans(preset: FigurePreset, cfg: RunConfig) -> list[ScanReport]:
    cfg = RunConfig({**cfg.values, "t1": preset.t1, "order": 4}, cfg.out)
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        return list(pool.map(lambda s: run_scan(cfg, s), preset.spectra()))


_PLOT_TEMPLATE = '''\
"""Render {fig}: C4 against tau for each curve, with the macrorealist bound."""
import csv
from pathlib import Path

import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent
CURVES = {curves!r}

fig, ax = plt.subplots(figsize=(6, 4.5))
for label, name in CURVES:
    with open(HERE / name) as fh:
        rows = list(csv.DictReader(fh))
    ax.plot([float(r["tau"]) for r in rows], [float(r["C4"]) for r in rows], label=label)
ax.axhline(2.0, color="k", ls="--", lw=0.8)
ax.set_xlabel(r"$\\omega_0 \\tau$")
ax.set_ylabel(r"$C_4$")
ax.legend()
fig.tight_layout()
fig.savefig(HERE / "{fig}.png", dpi=150)
'''


def cmd_figure(preset: FigurePreset, cfg: RunConfig) -> int:
    reports = figure_scans(preset, cfg)
    curves = []
    for value, report in zip(preset.values, reports):
        name = f"{preset.figure_id}_{preset.param}_{value:g}.csv"
        report.to_csv(cfg.out / name)
        curves.append((f"{preset.param}={value:g}", name))
        print(f"{preset.param}={value:g}: {report.summary()}")
    script = cfg.out / f"{preset.figure_id}_plot.py"
    script.write_text(_PLOT_TEMPLATE.format(fig=preset.figure_id, curves=curves))
    print(f"wrote {len(curves)} curves and {script}")
    return EXIT_OK


def cmd_oracle_check(cfg: RunConfig) -> int:
    spec, state = cfg.spectrum, cfg.state
    bath = discretize(spec, cfg["n_modes"], cfg.half_width)
    times = np.linspace(0.0, cfg["oracle_t_max"], cfg["oracle_samples"])
    c1_or = c1_trajectory(bath, state, times, cfg["dt"])
    c1_an = state.c1_0 * propagator_analytic(spec, times)
    write_comparison_csv(cfg.out / "oracle_check.csv", times, c1_or, c1_an)
    c1_err = float(np.max(np.abs(c1_or - c1_an)))

    grid = np.linspace(0.0, cfg["oracle_t_max"], cfg["corr_points"])
    orc = oracle_correlator_grid(bath, state, grid, cfg["dt"])
    t1, t2 = np.meshgrid(grid, grid, indexing="ij")
    corr_err = max(float(np.max(np.abs(orc["+-"] - corr_plus_minus(state, spec, t1, t2)))),
                   float(np.max(np.abs(orc["-+"] - corr_minus_plus(state, spec, t1, t2)))))
    ok = c1_err <= cfg["c1_tol"] and corr_err <= cfg["corr_tol"]
    print(f"n_modes={bath.count} half_width={cfg.half_width:g} "
          f"max_c1_err={c1_err:.3e} (tol {cfg['c1_tol']:g}) "
          f"max_corr_err={corr_err:.3e} (tol {cfg['corr_tol']:g}) -> {'PASS' if ok else 'FAIL'}")
    if not ok:
        print("oracle disagrees with the closed form; increase n_modes/half_width "
              "or decrease dt", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lgi-decay", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=["amplitude", "lgi", "figure", "oracle-check"])
    p.add_argument("figure_id", nargs="?", help="fig1 | fig2 | fig3 (figure command)")
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args, extra = _parser().parse_known_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(args.config, extra, args.out)
        cfg.out.mkdir(parents=True, exist_ok=True)
        if args.command == "amplitude":
            return cmd_amplitude(cfg)
        if args.command == "lgi":
            return cmd_lgi(cfg)
        if args.command == "figure":
            fig_id = args.figure_id or cfg["figure"]
            return cmd_figure(FigurePreset.get(fig_id), cfg)
        if args.figure_id:
            raise ConfigError(f"unexpected argument {args.figure_id!r}")
        return cmd_oracle_check(cfg)
    except ConfigError as exc:
        print(f"lgi-decay: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalToleranceError as exc:
        print(f"lgi-decay: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
