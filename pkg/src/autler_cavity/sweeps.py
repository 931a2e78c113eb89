"""Figure presets and batch execution.

Presets ``fig1a``..``fig3f`` are spectrum families (both interference
settings), ``fig4`` is a detuning sweep of the steady state and
``fig5a``..``fig5d`` are population/coherence decompositions.
Work is split into contiguous chunks of the axis and reassembled in index
order, so the output does not depend on the number of workers.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bloch import steady_state
from .errors import ParameterError, UnknownPreset
from .params import ModelParams
from .spectrum import build_coherence_generator, default_grid, spectrum_values

__all__ = [
    "Preset",
    "SweepResult",
    "PresetRun",
    "PRESETS",
    "get_preset",
    "default_workers",
    "run_preset",
    "sweep_steady_state",
    "sweep_spectrum",
    "compare_eta",
]

WORKERS_ENV = "AUTLER_CAVITY_WORKERS"

_PANEL_DELTAS = (0.0, 10.0, 50.0, 100.0, 200.0, 500.0)
_FIG5_DELTAS = (0.0, 50.0, 100.0, 200.0)
_FIGURES = {"fig1": (100.0, 10.0), "fig2": (100.0, 20.0), "fig3": (200.0, 20.0)}

SPECTRUM_COLUMNS = ("total", "pop_part", "coh_part")
STEADY_COLUMNS = ("p0", "p1", "p2", "coh12_re", "coh12_im", "p1_minus_p0", "p2_minus_p0")


@dataclass(frozen=True)
class Preset:
    name: str
    kind: str  # "spectrum" or "steady_state"
    variants: tuple[ModelParams, ...]
    delta_grid: tuple[float, float, float] | None = None  # start, stop, step

    def axis(self) -> np.ndarray:
        if self.kind == "steady_state":
            start, stop, step = self.delta_grid
            count = int(round((stop - start) / step)) + 1
            return start + step * np.arange(count)
        return default_grid(list(self.variants))


def _base(omega21, n_thermal, delta, eta):
    return ModelParams(g1=10.0, g2=10.0, kappa=100.0, delta=delta, omega21=omega21,
                       n_thermal=n_thermal, eta=eta)


def _build_presets() -> dict[str, Preset]:
    presets = {}
    for fig, (omega21, n) in _FIGURES.items():
        for letter, delta in zip("abcdef", _PANEL_DELTAS):
            name = f"{fig}{letter}"
            presets[name] = Preset(name, "spectrum",
                                   (_base(omega21, n, delta, 0.0), _base(omega21, n, delta, 1.0)))
    presets["fig4"] = Preset("fig4", "steady_state", (_base(200.0, 20.0, 0.0, 1.0),),
                             delta_grid=(-700.0, 700.0, 1.0))
    for letter, delta in zip("abcd", _FIG5_DELTAS):
        name = f"fig5{letter}"
        presets[name] = Preset(name, "spectrum", (_base(200.0, 20.0, delta, 1.0),))
    return presets


PRESETS = _build_presets()


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r}; known: {', '.join(PRESETS)}") from None


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ParameterError(f"{WORKERS_ENV} must be an integer, got {raw!r}", key="workers") from None
        if value < 1:
            raise ParameterError(f"{WORKERS_ENV} must be >= 1", key="workers")
        return value
    return os.cpu_count() or 1


def eta_label(eta: float) -> str:
    return f"eta{eta:g}"


@dataclass(frozen=True)
class SweepResult:
    preset: str
    axis_name: str
    axis: np.ndarray
    columns: dict[str, np.ndarray]
    params: ModelParams
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.axis) > 1 and not np.all(np.diff(self.axis) > 0):
            raise ValueError("sweep axis must be strictly increasing")
        for name, col in self.columns.items():
            if len(col) != len(self.axis):
                raise ValueError(f"column {name} has {len(col)} records for {len(self.axis)} axis points")

    @property
    def eta(self) -> float:
        return self.params.eta

    @property
    def stem(self) -> str:
        return f"{self.preset}_{eta_label(self.eta)}"

    def csv_text(self) -> str:
        names = (self.axis_name, *self.columns)
        cols = (self.axis, *self.columns.values())
        lines = [",".join(names)]
        lines.extend(",".join("%.17g" % v for v in row) for row in zip(*cols))
        return "\n".join(lines) + "\n"

    def sidecar_text(self) -> str:
        return json.dumps(self.provenance, indent=2, sort_keys=True) + "\n"

    def write(self, out_dir) -> tuple[Path, Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / f"{self.stem}.csv"
        json_path = out_dir / f"{self.stem}.json"
        csv_path.write_text(self.csv_text(), encoding="utf-8")
        json_path.write_text(self.sidecar_text(), encoding="utf-8")
        return csv_path, json_path


@dataclass(frozen=True)
class PresetRun:
    name: str
    results: tuple[SweepResult, ...]

    def for_eta(self, eta: float) -> SweepResult:
        for r in self.results:
            if r.eta == eta:
                return r
        raise KeyError(f"preset {self.name} has no eta={eta} variant")


def _spectrum_chunk(params: ModelParams, omega: np.ndarray):
    ss = steady_state(params)
    gen = build_coherence_generator(params)
    return spectrum_values(params, ss, gen, omega)


def _steady_chunk(params: ModelParams, deltas: np.ndarray):
    rows = np.empty((len(deltas), len(STEADY_COLUMNS)))
    for i, delta in enumerate(deltas):
        ss = steady_state(params.replace(delta=float(delta)))
        rows[i] = (ss.p0, ss.p1, ss.p2, ss.coh12.real, ss.coh12.imag, ss.p1 - ss.p0, ss.p2 - ss.p0)
    return rows


def _map_chunks(func, params, axis, workers):
    chunks = [c for c in np.array_split(axis, max(1, min(workers, len(axis)))) if len(c)]
    if workers <= 1 or len(chunks) == 1:
        return [func(params, c) for c in chunks]
    with ProcessPoolExecutor(max_workers=min(workers, len(chunks))) as pool:
        return list(pool.map(func, [params] * len(chunks), chunks))


def _provenance(preset, params, axis_name, axis):
    return {
        "preset": preset,
        "params": params.to_config(),
        "axis": {"name": axis_name, "start": float(axis[0]), "stop": float(axis[-1]), "points": len(axis)},
        "tool": "autler_cavity",
        "version": __version__,
    }


def sweep_spectrum(params: ModelParams, omega, workers: int = 1, preset: str = "custom") -> SweepResult:
    omega = np.asarray(omega, dtype=float)
    parts = _map_chunks(_spectrum_chunk, params, omega, workers)
    columns = {name: np.concatenate([p[i] for p in parts]) for i, name in enumerate(SPECTRUM_COLUMNS)}
    return SweepResult(preset, "omega", omega, columns, params, _provenance(preset, params, "omega", omega))


def sweep_steady_state(params: ModelParams, deltas, workers: int = 1, preset: str = "custom") -> SweepResult:
    deltas = np.asarray(deltas, dtype=float)
    rows = np.concatenate(_map_chunks(_steady_chunk, params, deltas, workers))
    columns = {name: rows[:, i].copy() for i, name in enumerate(STEADY_COLUMNS)}
    snapshot = params.replace(delta=0.0)
    return SweepResult(preset, "delta", deltas, columns, snapshot,
                       _provenance(preset, snapshot, "delta", deltas))


def run_preset(name: str, workers: int | None = None) -> PresetRun:
    preset = get_preset(name)
    if workers is None:
        workers = default_workers()
    axis = preset.axis()
    if preset.kind == "steady_state":
        results = tuple(sweep_steady_state(p, axis, workers, preset=name) for p in preset.variants)
    else:
        results = tuple(sweep_spectrum(p, axis, workers, preset=name) for p in preset.variants)
    return PresetRun(name, results)


def compare_eta(run: PresetRun) -> dict[str, float]:
    """Relative deviation of the interference spectrum from the no-interference one.

    ``max_pointwise`` is ``max|A1 - A0| / max|A0|``; ``integrated`` is
    ``int |A1 - A0| / int |A0|``.
    """
    off = run.for_eta(0.0)
    on = run.for_eta(1.0)
    a0, a1 = off.columns["total"], on.columns["total"]
    diff = np.abs(a1 - a0)
    scale = np.max(np.abs(a0))
    if scale == 0:
        return {"max_pointwise": 0.0 if np.max(diff) == 0 else float("inf"), "integrated": 0.0}
    integrated = np.trapezoid(diff, off.axis) / np.trapezoid(np.abs(a0), off.axis)
    return {"max_pointwise": float(np.max(diff) / scale), "integrated": float(integrated)}
