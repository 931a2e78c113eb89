"""Brute-force atom + cavity master equation on a truncated Fock space.

Ground truth for the reduced model: the cavity is kept as a dynamical mode
with ``n_max + 1`` Fock states, the joint Liouvillian is assembled as a
sparse superoperator, and the stationary state is obtained from a bordered
linear system (one dynamical row replaced by the trace functional).

Joint basis ordering is atom-major, ``|i, n> -> i * (n_max + 1) + n`` with
atom levels ``(|0>, |1>, |2>)``. Density matrices are vectorized row-major,
so ``vec(A rho B) = kron(A, B.T) vec(rho)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .bloch import AtomState
from .errors import DegenerateSteadyState, DimensionOverflow, NonPhysicalState, ParameterError
from .params import ModelParams

__all__ = [
    "FullModelConfig",
    "DensityMatrix",
    "recommended_n_max",
    "operators",
    "build_liouvillian",
    "cavity_liouvillian",
    "stationary_state",
    "oracle_steady_state",
    "slow_eigenvalues",
    "atomic_marginal",
    "cavity_marginal",
    "thermal_weights",
    "oracle_report",
]

DEFAULT_MAX_DIM = 400
# dense LU below this joint dimension, sparse LU above
DENSE_DIM_LIMIT = 30
RESIDUAL_TOL = 1e-10


def recommended_n_max(n_thermal: float) -> int:
    """Fock cutoff keeping the thermal tail below about 1e-6."""
    return max(1, math.ceil(8 * (n_thermal + 1)))


@dataclass(frozen=True)
class FullModelConfig:
    params: ModelParams
    n_max: int
    max_dim: int = DEFAULT_MAX_DIM

    def __post_init__(self):
        if self.params.eta != 1.0:
            raise ParameterError(
                "the full model has no interference switch; it only validates eta = 1", key="eta"
            )
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ParameterError(f"n_max must be an integer >= 1, got {self.n_max!r}", key="n_max")
        if self.dim > self.max_dim:
            raise DimensionOverflow(
                f"joint dimension {self.dim} exceeds the cap {self.max_dim} (n_max={self.n_max})"
            )

    @property
    def n_fock(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return 3 * (self.n_max + 1)


@dataclass(frozen=True)
class DensityMatrix:
    dim: int
    entries: np.ndarray

    def check(self, herm_tol=1e-10, trace_tol=1e-10, eig_tol=1e-8) -> "DensityMatrix":
        r = self.entries
        if r.shape != (self.dim, self.dim):
            raise NonPhysicalState(f"shape {r.shape} does not match dim {self.dim}")
        herm = np.max(np.abs(r - r.conj().T))
        if herm > herm_tol:
            raise NonPhysicalState(f"density matrix not Hermitian (max deviation {herm:.3e})")
        tr = np.trace(r)
        if abs(tr - 1.0) > trace_tol:
            raise NonPhysicalState(f"trace {tr} differs from 1")
        lam = np.linalg.eigvalsh(0.5 * (r + r.conj().T))
        if lam.min() < -eig_tol:
            raise NonPhysicalState(f"negative eigenvalue {lam.min():.3e}")
        return self


def _annihilation(n_fock: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, n_fock, dtype=float)), offsets=1, format="csr", dtype=complex)


def operators(config: FullModelConfig) -> dict[str, sp.csr_matrix]:
    """Joint-space operators: ``a``, ``H`` and the atomic projectors ``A_ij``."""
    p = config.params
    nf = config.n_fock
    eye_f = sp.identity(nf, dtype=complex, format="csr")
    eye_a = sp.identity(3, dtype=complex, format="csr")

    def atom(i, j):
        m = sp.csr_matrix(([1.0 + 0j], ([i], [j])), shape=(3, 3))
        return sp.kron(m, eye_f, format="csr")

    a = sp.kron(eye_a, _annihilation(nf), format="csr")
    adag = a.conj().T.tocsr()
    lower = p.g1 * atom(0, 1) + p.g2 * atom(0, 2)
    h_c = p.delta * (adag @ a)
    h_a = 0.5 * p.omega21 * (atom(2, 2) - atom(1, 1))
    h_i = 1j * (lower @ adag) - 1j * (lower.conj().T @ a)
    return {
        "a": a,
        "H": (h_c + h_a + h_i).tocsr(),
        "A00": atom(0, 0), "A11": atom(1, 1), "A22": atom(2, 2), "A21": atom(2, 1),
    }


def _lindblad(h, jumps, dim) -> sp.csr_matrix:
    """Superoperator of ``-i[H, rho] + sum_k (C rho C^+ - {C^+ C, rho}/2)``."""
    eye = sp.identity(dim, dtype=complex, format="csr")
    sup = -1j * (sp.kron(h, eye) - sp.kron(eye, h.T))
    for c in jumps:
        cdc = (c.conj().T @ c).tocsr()
        sup = sup + sp.kron(c, c.conj()) - 0.5 * (sp.kron(cdc, eye) + sp.kron(eye, cdc.T))
    return sp.csr_matrix(sup)


def _thermal_jumps(a, kappa, n_thermal):
    # kappa(N+1)(2 a rho a^+ - ...) = D[sqrt(2 kappa (N+1)) a]
    jumps = [math.sqrt(2 * kappa * (n_thermal + 1)) * a]
    if n_thermal > 0:
        jumps.append(math.sqrt(2 * kappa * n_thermal) * a.conj().T.tocsr())
    return jumps


def build_liouvillian(config: FullModelConfig) -> sp.csr_matrix:
    """Sparse ``dim^2 x dim^2`` matrix of the full master equation."""
    ops = operators(config)
    p = config.params
    return _lindblad(ops["H"], _thermal_jumps(ops["a"], p.kappa, p.n_thermal), config.dim)


def cavity_liouvillian(kappa: float, delta: float, n_thermal: float, n_max: int) -> sp.csr_matrix:
    """The thermally damped cavity alone, i.e. the decoupled (g = 0) factor."""
    a = _annihilation(n_max + 1)
    h = delta * (a.conj().T @ a)
    return _lindblad(h.tocsr(), _thermal_jumps(a, kappa, n_thermal), n_max + 1)


def _bordered_solve(liou, dim, row):
    """Solve ``L rho = 0`` with row ``row`` replaced by ``Tr rho = 1``."""
    trace_row = np.zeros(dim * dim, dtype=complex)
    trace_row[:: dim + 1] = 1.0
    rhs = np.zeros(dim * dim, dtype=complex)
    rhs[row] = 1.0
    if dim <= DENSE_DIM_LIMIT:
        mat = liou.toarray()
        mat[row, :] = trace_row
        try:
            return np.linalg.solve(mat, rhs)
        except np.linalg.LinAlgError:
            return None
    mat = sp.lil_matrix(liou)
    mat[row, :] = trace_row
    try:
        lu = spla.splu(sp.csc_matrix(mat))
    except RuntimeError:
        return None
    x = lu.solve(rhs)
    return x if np.all(np.isfinite(x)) else None


def stationary_state(liou: sp.spmatrix, dim: int) -> tuple[DensityMatrix, float]:
    """Unique stationary density matrix of ``liou`` and its relative residual.

    Uniqueness is probed by solving twice with different rows replaced by the
    trace condition; a degenerate null space makes at least one of the
    bordered systems singular or the two answers disagree.
    """
    scale = spla.norm(liou, ord=1)
    solutions = []
    for row in (0, dim * dim - 1):
        x = _bordered_solve(liou, dim, row)
        if x is None:
            raise DegenerateSteadyState("bordered steady-state system is singular (nullity > 1)")
        solutions.append(x)
    if np.max(np.abs(solutions[0] - solutions[1])) > 1e-8:
        raise DegenerateSteadyState("steady state depends on the bordering row (nullity > 1)")
    x = solutions[0]
    residual = float(np.max(np.abs(liou @ x)) / scale) if scale > 0 else 0.0
    if residual > RESIDUAL_TOL:
        raise DegenerateSteadyState(f"steady-state residual {residual:.3e} exceeds {RESIDUAL_TOL}")
    rho = x.reshape(dim, dim)
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(dim, rho).check(), residual


def oracle_steady_state(config: FullModelConfig, return_residual: bool = False):
    rho, residual = stationary_state(build_liouvillian(config), config.dim)
    return (rho, residual) if return_residual else rho


def slow_eigenvalues(config: FullModelConfig, guesses) -> np.ndarray:
    """Full-Liouvillian eigenvalue nearest to each guess (shift-invert).

    The nine slowest modes of the joint system correspond to the atomic
    density matrix; after adiabatic elimination they are ``0``, the
    eigenvalues of the population/coherence generator and those of the
    optical-coherence generator together with their conjugates.
    """
    liou = sp.csc_matrix(build_liouvillian(config))
    out = []
    for mu in np.asarray(guesses, dtype=complex):
        lam = spla.eigs(liou, k=1, sigma=mu, which="LM", return_eigenvectors=False)
        out.append(lam[0])
    return np.array(out)


def atomic_marginal(rho: DensityMatrix) -> AtomState:
    """Partial trace over the Fock index."""
    nf = rho.dim // 3
    r = rho.entries.reshape(3, nf, 3, nf)
    reduced = np.einsum("injn->ij", r)
    return AtomState(float(reduced[0, 0].real), float(reduced[1, 1].real), float(reduced[2, 2].real),
                     complex(reduced[2, 1]))


def cavity_marginal(rho: DensityMatrix) -> np.ndarray:
    """Photon-number distribution of the joint state."""
    nf = rho.dim // 3
    r = rho.entries.reshape(3, nf, 3, nf)
    return np.einsum("inin->n", r).real


def thermal_weights(n_thermal: float, n_max: int) -> np.ndarray:
    """Bose-Einstein weights on ``0..n_max``, renormalized after truncation."""
    n = np.arange(n_max + 1)
    if n_thermal == 0:
        w = (n == 0).astype(float)
    else:
        w = (n_thermal / (n_thermal + 1)) ** n / (n_thermal + 1)
    return w / w.sum()


def oracle_report(config: FullModelConfig) -> dict:
    """JSON-ready summary of one oracle run."""
    rho, residual = oracle_steady_state(config, return_residual=True)
    atom = atomic_marginal(rho)
    return {
        "params": config.params.to_config(),
        "n_max": config.n_max,
        "p0": atom.p0,
        "p1": atom.p1,
        "p2": atom.p2,
        "coh12_re": atom.coh12.real,
        "coh12_im": atom.coh12.imag,
        "residual": residual,
    }


def dump_report(report: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
