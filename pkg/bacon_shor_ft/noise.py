"""Noise rates and fault-location classes shared by bounds, simulator and optimizer."""

import logging
import math
from dataclasses import asdict, dataclass, fields, replace
from enum import Enum
from typing import Optional

logger = logging.getLogger(__name__)


class BaconShorError(Exception):
    """Base class for errors raised by bacon_shor_ft."""


class InvalidConfigError(BaconShorError, ValueError):
    """A parameter is outside its allowed range or has the wrong parity."""


class BiasUndefinedError(BaconShorError, ZeroDivisionError):
    """The noise bias was requested while the non-diagonal rate is zero."""


class LocationClass(Enum):
    PREP_PLUS = "prep"
    MEAS_X = "measx"
    CZ = "cz"
    WAIT = "wait"


class RateKind(Enum):
    DIAGONAL = "diagonal"
    NON_DIAGONAL = "non_diagonal"


def check_probability(name: str, value: float) -> float:
    """Return value as float, or raise InvalidConfigError naming the field."""
    try:
        value = float(value)
    except (TypeError, ValueError) as exc:
        raise InvalidConfigError(f"{name} must be a number, got {value!r}") from exc
    if math.isnan(value) or not 0.0 <= value <= 1.0:
        raise InvalidConfigError(f"{name} must lie in [0, 1], got {value}")
    return value


@dataclass(frozen=True)
class NoiseParams:
    """Physical fault rates.

    eps and eps_nd are the diagonal and non-diagonal rates of gate locations,
    eps_s and eps_s_nd the same per idle time step. eps_meas and eps_psi default
    to eps when left as None.
    """

    eps: float
    eps_nd: float
    eps_s: float = 0.0
    eps_s_nd: float = 0.0
    eps_meas: Optional[float] = None
    eps_psi: Optional[float] = None

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                value = self.eps if f.name != "eps" else None
            object.__setattr__(self, f.name, check_probability(f.name, value))

    @classmethod
    def from_bias(cls, eps: float, bias: float, **rates) -> "NoiseParams":
        """Build rates from eps and the bias eps / eps_nd."""
        if not bias > 0:
            raise InvalidConfigError(f"bias must be positive, got {bias}")
        return cls(eps=eps, eps_nd=eps / bias, **rates)

    @classmethod
    def zero(cls) -> "NoiseParams":
        return cls(eps=0.0, eps_nd=0.0)

    @classmethod
    def from_dict(cls, params: dict) -> "NoiseParams":
        """Create NoiseParams from a flat mapping; omitted fields take defaults."""
        known = {f.name for f in fields(cls)}
        unknown = set(params) - known
        if unknown:
            raise InvalidConfigError(f"unknown noise fields: {sorted(unknown)}")
        if "eps" not in params or "eps_nd" not in params:
            raise InvalidConfigError("noise requires both 'eps' and 'eps_nd'")
        return cls(**params)

    def to_dict(self) -> dict:
        return asdict(self)

    def bias(self) -> float:
        """eps / eps_nd."""
        if self.eps_nd == 0:
            raise BiasUndefinedError("bias is undefined when eps_nd == 0")
        return self.eps / self.eps_nd

    def scaled(self, factor: float) -> "NoiseParams":
        """Every rate multiplied by factor and capped at 1."""
        return replace(
            self,
            **{f.name: min(1.0, getattr(self, f.name) * factor) for f in fields(self)},
        )


# (diagonal, non-diagonal) rate field per location class
_RATE_TABLE = {
    LocationClass.PREP_PLUS: ("eps", None),
    LocationClass.MEAS_X: ("eps_meas", None),
    LocationClass.CZ: ("eps", "eps_nd"),
    LocationClass.WAIT: ("eps_s", "eps_s_nd"),
}


def rate_of(location: LocationClass, which: RateKind, noise: NoiseParams) -> float:
    """Fault rate of one location of the given class."""
    diagonal, non_diagonal = _RATE_TABLE[location]
    name = diagonal if which is RateKind.DIAGONAL else non_diagonal
    return 0.0 if name is None else getattr(noise, name)
