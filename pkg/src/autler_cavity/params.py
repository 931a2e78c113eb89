"""Physical parameters of the V-atom + thermal cavity model and the derived
cavity-induced rates.

All frequencies and rates share one dimensionless angular-frequency unit.
Couplings ``g1, g2`` and probe projections ``d1, d2`` are complex scalars.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

from .errors import ParameterError

__all__ = [
    "BadCavityWarning",
    "CONFIG_KEYS",
    "ModelParams",
    "RateKernel",
    "rate_kernel",
    "sideband_linewidths",
    "sideband_centers",
    "load_config",
    "parse_config",
]

# ratio max|g|/kappa above which the adiabatic elimination is suspect
BAD_CAVITY_RATIO = 0.2

CONFIG_KEYS = (
    "g1_re", "g1_im", "g2_re", "g2_im",
    "kappa", "delta", "omega21", "n_thermal", "eta",
    "d1_re", "d1_im", "d2_re", "d2_im",
)
REQUIRED_KEYS = ("g1_re", "g2_re", "kappa", "delta", "omega21", "n_thermal")
DEFAULTS = {
    "g1_im": 0.0, "g2_im": 0.0, "eta": 1.0,
    "d1_re": 1.0, "d1_im": 0.0, "d2_re": 1.0, "d2_im": 0.0,
}


class BadCavityWarning(UserWarning):
    """Couplings are not small compared with the cavity decay rate."""


def _finite(name, value):
    if not math.isfinite(value):
        raise ParameterError(f"{name} must be finite, got {value!r}", key=name)


@dataclass(frozen=True)
class ModelParams:
    """Immutable parameter set.

    ``eta`` scales every cross-transition term ``g_i g_j*`` (0 switches the
    interference off, 1 keeps it in full). Values in between interpolate.
    """

    g1: complex
    g2: complex
    kappa: float
    delta: float
    omega21: float
    n_thermal: float
    eta: float = 1.0
    d1: complex = 1.0
    d2: complex = 1.0

    def __post_init__(self):
        for name in ("g1", "g2", "d1", "d2"):
            value = complex(getattr(self, name))
            _finite(name, value.real)
            _finite(name, value.imag)
            object.__setattr__(self, name, value)
        for name in ("kappa", "delta", "omega21", "n_thermal", "eta"):
            try:
                value = float(getattr(self, name))
            except (TypeError, ValueError):
                raise ParameterError(f"{name} must be a real number", key=name) from None
            _finite(name, value)
            object.__setattr__(self, name, value)
        if self.kappa <= 0:
            raise ParameterError(f"kappa must be > 0, got {self.kappa}", key="kappa")
        if self.n_thermal < 0:
            raise ParameterError(f"n_thermal must be >= 0, got {self.n_thermal}", key="n_thermal")
        if not 0.0 <= self.eta <= 1.0:
            raise ParameterError(f"eta must lie in [0, 1], got {self.eta}", key="eta")
        if self.omega21 < 0:
            raise ParameterError(f"omega21 must be >= 0, got {self.omega21}", key="omega21")
        if max(abs(self.g1), abs(self.g2)) > BAD_CAVITY_RATIO * self.kappa:
            warnings.warn(
                f"|g|/kappa = {max(abs(self.g1), abs(self.g2)) / self.kappa:.3g} exceeds "
                f"{BAD_CAVITY_RATIO}; the reduced atomic model assumes kappa >> g",
                BadCavityWarning,
                stacklevel=3,
            )

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def to_config(self) -> dict[str, float]:
        """Flat mapping with exactly the config-file keys."""
        return {
            "g1_re": self.g1.real, "g1_im": self.g1.imag,
            "g2_re": self.g2.real, "g2_im": self.g2.imag,
            "kappa": self.kappa, "delta": self.delta, "omega21": self.omega21,
            "n_thermal": self.n_thermal, "eta": self.eta,
            "d1_re": self.d1.real, "d1_im": self.d1.imag,
            "d2_re": self.d2.real, "d2_im": self.d2.imag,
        }

    @classmethod
    def from_config(cls, values: dict) -> "ModelParams":
        """Build from flat config keys; unknown keys and missing required keys raise."""
        unknown = sorted(set(values) - set(CONFIG_KEYS))
        if unknown:
            raise ParameterError(f"unknown parameter key: {unknown[0]}", key=unknown[0])
        for key in REQUIRED_KEYS:
            if values.get(key) is None:
                raise ParameterError(f"missing required parameter: {key}", key=key)
        merged = dict(DEFAULTS)
        merged.update({k: v for k, v in values.items() if v is not None})
        numbers = {}
        for key, raw in merged.items():
            try:
                numbers[key] = float(raw)
            except (TypeError, ValueError):
                raise ParameterError(f"{key}: cannot parse {raw!r} as a number", key=key) from None
        return cls(
            g1=complex(numbers["g1_re"], numbers["g1_im"]),
            g2=complex(numbers["g2_re"], numbers["g2_im"]),
            kappa=numbers["kappa"],
            delta=numbers["delta"],
            omega21=numbers["omega21"],
            n_thermal=numbers["n_thermal"],
            eta=numbers["eta"],
            d1=complex(numbers["d1_re"], numbers["d1_im"]),
            d2=complex(numbers["d2_re"], numbers["d2_im"]),
        )


def parse_config(text: str) -> dict[str, str]:
    """Parse ``key=value`` lines. Blank lines and ``#`` comments are skipped."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"config line {lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ParameterError(f"unknown parameter key: {key}", key=key)
        if key in values:
            raise ParameterError(f"config line {lineno}: duplicate key {key}", key=key)
        values[key] = value
    return values


def load_config(path) -> dict[str, str]:
    return parse_config(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class RateKernel:
    """``f_plus = F(omega21)``, ``f_minus = F(-omega21)`` and the real decay
    constants ``gamma_i = |g_i|^2 Re F``."""

    f_plus: complex
    f_minus: complex
    gamma1: float
    gamma2: float


def rate_kernel(params: ModelParams) -> RateKernel:
    if params.kappa <= 0:
        raise ParameterError("kappa must be > 0", key="kappa")
    k, d, half = params.kappa, params.delta, 0.5 * params.omega21
    f_plus = 1.0 / complex(k, d + half)
    f_minus = 1.0 / complex(k, d - half)
    gamma1 = k * abs(params.g1) ** 2 / (k * k + (d + half) ** 2)
    gamma2 = k * abs(params.g2) ** 2 / (k * k + (d - half) ** 2)
    return RateKernel(f_plus, f_minus, gamma1, gamma2)


def sideband_linewidths(params: ModelParams) -> tuple[float, float]:
    """Half widths (HWHM) of the lower and upper sidebands without interference.

    Exact for ``eta = 0``; with interference on, the sidebands are no longer
    independent Lorentzians and these are only indicative.
    """
    kern = rate_kernel(params)
    n = params.n_thermal
    gamma_l = kern.gamma1 * (2 * n + 1) + kern.gamma2 * n
    gamma_h = kern.gamma1 * n + kern.gamma2 * (2 * n + 1)
    return gamma_l, gamma_h


def sideband_centers(params: ModelParams) -> tuple[float, float]:
    """Probe detunings of the two ``eta = 0`` sideband maxima.

    The bare positions ``-omega21/2`` and ``+omega21/2`` are displaced by the
    cavity-induced level shifts ``Im F |g|^2``.
    """
    kern = rate_kernel(params)
    n = params.n_thermal
    a1, a2 = abs(params.g1) ** 2, abs(params.g2) ** 2
    shift_l = kern.f_plus.imag * a1 * (2 * n + 1) + kern.f_minus.imag * a2 * n
    shift_h = kern.f_plus.imag * a1 * n + kern.f_minus.imag * a2 * (2 * n + 1)
    return -0.5 * params.omega21 + shift_l, 0.5 * params.omega21 + shift_h
