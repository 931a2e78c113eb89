"""Reduced (cavity-eliminated) Bloch equations for the atomic populations and
the excited-doublet coherence.

The state vector is ``x = (p1, p2, c, conj(c))`` with ``c = <A12>`` and the
ground population eliminated through ``p0 = 1 - p1 - p2``. The equations of
motion are affine, ``dx/dt = M x + b``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NoSignChange, NonPhysicalState, SingularGenerator
from .params import ModelParams, RateKernel, rate_kernel

__all__ = [
    "AtomState",
    "PopulationGenerator",
    "build_population_generator",
    "steady_state",
    "bisect",
    "inversion_thresholds",
]

STATE_TOL = 1e-10
# Re(lambda) must be below -DAMPING_TOL * ||M||
DAMPING_TOL = 1e-12


@dataclass(frozen=True)
class AtomState:
    p0: float
    p1: float
    p2: float
    coh12: complex

    def check(self, tol: float = STATE_TOL) -> "AtomState":
        """Raise NonPhysicalState unless this is a valid 3x3 density matrix."""
        total = self.p0 + self.p1 + self.p2
        if abs(total - 1.0) > tol:
            raise NonPhysicalState(f"populations sum to {total!r}")
        for name in ("p0", "p1", "p2"):
            p = getattr(self, name)
            if not -tol <= p <= 1.0 + tol:
                raise NonPhysicalState(f"{name} = {p!r} outside [0, 1]")
        if abs(self.coh12) ** 2 > self.p1 * self.p2 + tol:
            raise NonPhysicalState(
                f"|coh12|^2 = {abs(self.coh12) ** 2:.3e} exceeds p1*p2 = {self.p1 * self.p2:.3e}"
            )
        return self

    def density_matrix(self) -> np.ndarray:
        """3x3 atomic density matrix in the (|0>, |1>, |2>) basis."""
        rho = np.diag([self.p0, self.p1, self.p2]).astype(complex)
        # <A12> = rho[2, 1]
        rho[2, 1] = self.coh12
        rho[1, 2] = np.conj(self.coh12)
        return rho

    def as_vector(self) -> np.ndarray:
        return np.array([self.p1, self.p2, self.coh12, np.conj(self.coh12)], dtype=complex)


@dataclass(frozen=True)
class PopulationGenerator:
    matrix: np.ndarray
    drive: np.ndarray

    def rhs(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x + self.drive

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.matrix)

    def is_damped(self) -> bool:
        scale = np.linalg.norm(self.matrix, ord=np.inf)
        if scale == 0.0:
            return False
        return bool(np.all(self.eigenvalues().real < -DAMPING_TOL * scale))


def build_population_generator(params: ModelParams, kernel: RateKernel | None = None) -> PopulationGenerator:
    if kernel is None:
        kernel = rate_kernel(params)
    n, eta = params.n_thermal, params.eta
    fp, fm = kernel.f_plus, kernel.f_minus
    a1, a2 = abs(params.g1) ** 2, abs(params.g2) ** 2
    cross = params.g1 * np.conj(params.g2)  # g1 g2*
    cross_c = np.conj(cross)  # g1* g2
    r1 = 2.0 * fp.real * a1
    r2 = 2.0 * fm.real * a2

    m = np.zeros((4, 4), dtype=complex)
    b = np.zeros(4, dtype=complex)

    # dp1/dt = -r1[(N+1)p1 - N p0] - eta(N+1)[fm g1* g2 c + fm* g1 g2* c~]
    m[0, 0] = -r1 * (2 * n + 1)
    m[0, 1] = -r1 * n
    b[0] = r1 * n
    m[0, 2] = -eta * (n + 1) * fm * cross_c
    m[0, 3] = -eta * (n + 1) * np.conj(fm) * cross

    # dp2/dt = -r2[(N+1)p2 - N p0] - eta(N+1)[fp* g1* g2 c + fp g1 g2* c~]
    m[1, 1] = -r2 * (2 * n + 1)
    m[1, 0] = -r2 * n
    b[1] = r2 * n
    m[1, 2] = -eta * (n + 1) * np.conj(fp) * cross_c
    m[1, 3] = -eta * (n + 1) * fp * cross

    # dc/dt = -eta(N+1) g1 g2*[fp p1 + fm* p2] + eta N g1 g2*(fp + fm*) p0
    #         - [(N+1)(fp*|g1|^2 + fm|g2|^2) + i omega21] c
    pump = eta * n * cross * (fp + np.conj(fm))
    m[2, 0] = -eta * (n + 1) * cross * fp - pump
    m[2, 1] = -eta * (n + 1) * cross * np.conj(fm) - pump
    b[2] = pump
    m[2, 2] = -((n + 1) * (np.conj(fp) * a1 + fm * a2) + 1j * params.omega21)

    # conjugate line for c~ = conj(c)
    m[3, 0] = np.conj(m[2, 0])
    m[3, 1] = np.conj(m[2, 1])
    m[3, 3] = np.conj(m[2, 2])
    b[3] = np.conj(b[2])
    return PopulationGenerator(m, b)


def _singular_reason(params: ModelParams) -> str:
    if params.g1 == 0 and params.g2 == 0:
        return "atom is decoupled from the cavity (g1 = g2 = 0)"
    if params.eta == 1.0 and params.omega21 == 0.0:
        return (
            "dark state: degenerate doublet (omega21 = 0) with full interference leaves "
            "the combination g2*|1> - g1*|2> uncoupled"
        )
    return "generator has an undamped mode"


def steady_state(params: ModelParams) -> AtomState:
    """Stationary populations and coherence of the reduced Bloch equations."""
    gen = build_population_generator(params)
    if not gen.is_damped():
        raise SingularGenerator(_singular_reason(params))
    try:
        x = np.linalg.solve(gen.matrix, -gen.drive)
    except np.linalg.LinAlgError as exc:
        cond = np.linalg.cond(gen.matrix)
        raise SingularGenerator(f"{_singular_reason(params)} (condition estimate {cond:.3e})") from exc
    if abs(x[3] - np.conj(x[2])) > STATE_TOL or abs(x[0].imag) > STATE_TOL or abs(x[1].imag) > STATE_TOL:
        raise NonPhysicalState("steady-state solve broke the conjugation symmetry")
    p1, p2 = float(x[0].real), float(x[1].real)
    return AtomState(1.0 - p1 - p2, p1, p2, complex(x[2])).check()


def bisect(f: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-6, maxiter: int = 200) -> float:
    """Root of ``f`` on ``[lo, hi]`` by bisection; ``f(lo)`` and ``f(hi)`` must differ in sign."""
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise NoSignChange(f"f({lo}) = {f_lo:.3e} and f({hi}) = {f_hi:.3e} have the same sign")
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol:
            return mid
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def inversion_thresholds(params_template: ModelParams, which: int, bracket: tuple[float, float],
                         xtol: float = 1e-6) -> float:
    """Cavity detuning where ``p_which - p0`` changes sign inside ``bracket``."""
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")

    def inversion(delta):
        ss = steady_state(params_template.replace(delta=delta))
        return (ss.p1 if which == 1 else ss.p2) - ss.p0

    return bisect(inversion, float(bracket[0]), float(bracket[1]), xtol=xtol)
