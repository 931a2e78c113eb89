"""Weak-probe absorption spectrum from the quantum regression theorem.

The probe polarization is ``P = d1 A01 + d2 A02``. The two-time functions
``<A0i(t+tau) A_j0(t)>`` and ``<A_j0(t) A0i(t+tau)>`` obey the same linear
equations in ``tau`` as the one-time averages ``<A01>, <A02>``, i.e.
``d/dtau v = m v``, so both commutator terms share the generator ``m``.
Their initial values follow from the operator products

    A0i A_j0 = delta_ij A00,        A_j0 A0i = A_ji,

which give, for the commutator ``<[A0i(tau), A_j0(0)]>`` at ``tau = 0``,

    u_i^(j) = delta_ij p0 - <A_ji>,
    u^(1) = (p0 - p1, -<A12>),      u^(2) = (-<A21>, p0 - p2).

With ``R(w) = -(m + i w)^-1`` (the Laplace transform of ``exp(m tau)`` at
``s = -i w``) the spectrum is

    A(w) = Re sum_j conj(d_j) (d1, d2) R(w) u^(j) = Re (d1, d2) R(w) v,
    v = conj(d1) u^(1) + conj(d2) u^(2).

The ``delta_ij`` pieces of ``v`` are the population contribution and the
``<A_ji>`` pieces the coherence contribution; by linearity the two add up to
the total. Normalization is arbitrary (no prefactor), so only ratios and
signs are physically meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bloch import AtomState, steady_state
from .errors import GeneratorNotDamped, GridError, GridTooNarrow, PeakTooCoarse
from .params import ModelParams, RateKernel, rate_kernel

__all__ = [
    "CoherenceGenerator",
    "SpectrumPoint",
    "SpectrumTrace",
    "Peak",
    "build_coherence_generator",
    "initial_vectors",
    "spectrum_point",
    "spectrum_values",
    "spectrum_trace",
    "default_grid",
    "extract_peaks",
    "sum_rule_check",
    "gain_threshold",
    "CSV_HEADER",
    "write_trace_csv",
    "read_trace_csv",
]

GRID_POINTS = 4001
GRID_HALF_WIDTHS = 100.0
MIN_PEAK_POINTS = 7
GAIN_REL_THRESHOLD = 1e-9
CSV_HEADER = ("omega", "total", "pop_part", "coh_part")


@dataclass(frozen=True)
class CoherenceGenerator:
    """``d/dtau (<A01>, <A02>) = m (<A01>, <A02>)``."""

    m: np.ndarray

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.m)

    def check_damped(self) -> "CoherenceGenerator":
        ev = self.eigenvalues()
        if np.any(ev.real >= 0):
            raise GeneratorNotDamped(f"coherence generator eigenvalues {ev} are not all damped")
        return self

    def max_width(self) -> float:
        return float(np.max(-self.eigenvalues().real))


def build_coherence_generator(params: ModelParams, kernel: RateKernel | None = None) -> CoherenceGenerator:
    if kernel is None:
        kernel = rate_kernel(params)
    n, eta = params.n_thermal, params.eta
    fp, fm = kernel.f_plus, kernel.f_minus
    a1, a2 = abs(params.g1) ** 2, abs(params.g2) ** 2
    cross = params.g1 * np.conj(params.g2)
    half = 0.5 * params.omega21
    m = np.array(
        [
            [-(fp * a1 * (2 * n + 1) + fm * a2 * n - 1j * half), -eta * fm * np.conj(cross) * (n + 1)],
            [-eta * fp * cross * (n + 1), -(fp * a1 * n + fm * a2 * (2 * n + 1) + 1j * half)],
        ],
        dtype=complex,
    )
    return CoherenceGenerator(m)


def initial_vectors(ss: AtomState) -> tuple[np.ndarray, np.ndarray]:
    """``(u1, u2)``: commutator initial values for ``j = 1, 2``."""
    c = ss.coh12
    u1 = np.array([ss.p0 - ss.p1, -c], dtype=complex)
    u2 = np.array([-np.conj(c), ss.p0 - ss.p2], dtype=complex)
    return u1, u2


def _weight_vectors(params: ModelParams, ss: AtomState) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    d1c, d2c = np.conj(params.d1), np.conj(params.d2)
    pop = np.array([d1c * (ss.p0 - ss.p1), d2c * (ss.p0 - ss.p2)], dtype=complex)
    coh = np.array([-d2c * np.conj(ss.coh12), -d1c * ss.coh12], dtype=complex)
    u1, u2 = initial_vectors(ss)
    total = d1c * u1 + d2c * u2
    return total, pop, coh


@dataclass(frozen=True)
class SpectrumPoint:
    omega: float
    total: float
    pop_part: float
    coh_part: float


@dataclass(frozen=True)
class SpectrumTrace:
    """Spectrum sampled on a strictly increasing grid, stored column-wise."""

    grid: np.ndarray
    total: np.ndarray
    pop_part: np.ndarray
    coh_part: np.ndarray

    def __post_init__(self):
        n = len(self.grid)
        if any(len(col) != n for col in (self.total, self.pop_part, self.coh_part)):
            raise GridError("trace columns have unequal lengths")
        if n > 1 and not np.all(np.diff(self.grid) > 0):
            raise GridError("grid must be strictly increasing")

    def __len__(self):
        return len(self.grid)

    def __getitem__(self, i) -> SpectrumPoint:
        return SpectrumPoint(float(self.grid[i]), float(self.total[i]), float(self.pop_part[i]),
                             float(self.coh_part[i]))

    @property
    def points(self) -> list[SpectrumPoint]:
        return [self[i] for i in range(len(self))]


def _resolvent_apply(m: np.ndarray, omega: np.ndarray, d: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``d . R(w) . v`` with ``R(w) = -(m + i w)^-1`` via the 2x2 adjugate."""
    a = m[0, 0] + 1j * omega
    dd = m[1, 1] + 1j * omega
    b, c = m[0, 1], m[1, 0]
    det = a * dd - b * c
    r0 = (dd * v[0] - b * v[1]) / det
    r1 = (-c * v[0] + a * v[1]) / det
    return -(d[0] * r0 + d[1] * r1)


def spectrum_values(params: ModelParams, ss: AtomState, gen: CoherenceGenerator, omega):
    """``(total, pop_part, coh_part)`` arrays on ``omega``; elementwise, so any
    split of ``omega`` into chunks gives bit-identical results."""
    gen.check_damped()
    omega = np.asarray(omega, dtype=float)
    d = np.array([params.d1, params.d2], dtype=complex)
    v_tot, v_pop, v_coh = _weight_vectors(params, ss)
    total = _resolvent_apply(gen.m, omega, d, v_tot).real
    pop = _resolvent_apply(gen.m, omega, d, v_pop).real
    coh = _resolvent_apply(gen.m, omega, d, v_coh).real
    return total, pop, coh


def spectrum_point(params: ModelParams, ss: AtomState, gen: CoherenceGenerator, omega: float) -> SpectrumPoint:
    total, pop, coh = spectrum_values(params, ss, gen, np.array([float(omega)]))
    return SpectrumPoint(float(omega), float(total[0]), float(pop[0]), float(coh[0]))


def spectrum_trace(params: ModelParams, grid, ss: AtomState | None = None) -> SpectrumTrace:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0:
        raise GridError("grid must be a non-empty 1-d array")
    if len(grid) > 1 and not np.all(np.diff(grid) > 0):
        raise GridError("grid must be strictly increasing")
    if ss is None:
        ss = steady_state(params)
    gen = build_coherence_generator(params)
    total, pop, coh = spectrum_values(params, ss, gen, grid)
    return SpectrumTrace(grid, total, pop, coh)


def default_grid(params: ModelParams | list, points: int = GRID_POINTS,
                 half_widths: float = GRID_HALF_WIDTHS) -> np.ndarray:
    """Symmetric grid ``[-W, W]`` with ``W = omega21/2 + half_widths * Gamma_max``.

    ``Gamma_max`` is the largest decay rate of the coherence generator. A list
    of parameter sets yields one grid covering all of them.
    """
    sets = params if isinstance(params, (list, tuple)) else [params]
    width = max(0.5 * p.omega21 + half_widths * build_coherence_generator(p).max_width() for p in sets)
    return np.linspace(-width, width, points)


def gain_threshold(values) -> float:
    """Values below this count as probe gain rather than rounding noise."""
    return -GAIN_REL_THRESHOLD * float(np.max(np.abs(values)))


@dataclass(frozen=True)
class Peak:
    center: float
    height: float
    fwhm: float


def _half_crossing(x, y, i, step, level):
    j = i
    while 0 <= j + step < len(y) and y[j + step] > level:
        j += step
    k = j + step
    if not 0 <= k < len(y):
        return None, abs(j - i) + 1
    # linear interpolation between j (above) and k (below)
    xc = x[j] + (level - y[j]) * (x[k] - x[j]) / (y[k] - y[j])
    return xc, abs(j - i) + 1


def _refine(x, y, i):
    if 0 < i < len(y) - 1:
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        denom = y0 - 2 * y1 + y2
        if denom != 0:
            off = 0.5 * (y0 - y2) / denom
            h = 0.5 * (x[i + 1] - x[i - 1])
            return x[i] + off * h, y1 - 0.25 * (y0 - y2) * off
    return x[i], y[i]


def extract_peaks(trace: SpectrumTrace, min_points: int = MIN_PEAK_POINTS) -> list[Peak]:
    """Positive maxima and gain troughs, ordered by center.

    A trough is a local minimum that dips below the gain threshold; it is
    reported with negative height and the FWHM of the inverted feature.
    """
    x, y = trace.grid, trace.total
    if len(x) < 3:
        return []
    floor = gain_threshold(y)
    peaks = []
    for sign in (1.0, -1.0):
        s = sign * y
        for i in range(1, len(s) - 1):
            if not (s[i] > s[i - 1] and s[i] >= s[i + 1]):
                continue
            if sign > 0 and y[i] <= 0:
                continue
            if sign < 0 and y[i] >= floor:
                continue
            center, top = _refine(x, s, i)
            level = 0.5 * top
            left, n_left = _half_crossing(x, s, i, -1, level)
            right, n_right = _half_crossing(x, s, i, +1, level)
            span = n_left + n_right - 1
            if span < min_points:
                raise PeakTooCoarse(f"feature at omega={x[i]:.6g} spans only {span} grid points")
            fwhm = (right - left) if left is not None and right is not None else math.nan
            peaks.append(Peak(float(center), float(sign * top), float(fwhm)))
    peaks.sort(key=lambda p: p.center)
    return peaks


def sum_rule_check(params: ModelParams, trace: SpectrumTrace, ss: AtomState | None = None,
                   max_tail_fraction: float = 0.01) -> tuple[float, float]:
    """``(integral, pi * commutator_weight)``.

    The integral is the trapezoidal rule over the grid plus the analytic tail
    beyond each end: at large ``|w|`` the spectrum falls off as ``a / w^2``
    with ``a = -Re(d . m . v)``, and the odd ``1/w^3`` terms cancel between
    the two tails of a grid symmetric about zero.
    """
    if ss is None:
        ss = steady_state(params)
    x = trace.grid
    if len(x) < 2 or not (x[0] < 0 < x[-1]):
        raise GridTooNarrow("sum rule needs a grid straddling omega = 0")
    d = np.array([params.d1, params.d2], dtype=complex)
    v_tot, _, _ = _weight_vectors(params, ss)
    weight = math.pi * float(np.real(d @ v_tot))
    gen = build_coherence_generator(params)
    a = -float(np.real(d @ gen.m @ v_tot))
    body = float(np.trapezoid(trace.total, x))
    tail = a / x[-1] + a / (-x[0])
    integral = body + tail
    if abs(tail) > max_tail_fraction * abs(integral):
        raise GridTooNarrow(
            f"tail estimate {tail:.3e} exceeds {max_tail_fraction:.0%} of the integral {integral:.3e}"
        )
    return integral, weight


def write_trace_csv(trace: SpectrumTrace, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(CSV_HEADER) + "\n")
        for row in zip(trace.grid, trace.total, trace.pop_part, trace.coh_part):
            fh.write(",".join("%.17g" % v for v in row) + "\n")


def read_trace_csv(path) -> SpectrumTrace:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return SpectrumTrace(data[:, 0], data[:, 1], data[:, 2], data[:, 3])
