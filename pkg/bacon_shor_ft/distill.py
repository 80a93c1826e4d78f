"""Magic-state distillation fed by the injection gadget, with noisy CSS operations."""

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum

import pandas as pd

from bacon_shor_ft.bounds import GadgetConfig, cnot_bound, injection_bound
from bacon_shor_ft.noise import InvalidConfigError, NoiseParams, check_probability

logger = logging.getLogger(__name__)

# distance to the floor, relative to the floor, that counts as converged
FLOOR_TOLERANCE = 0.1
NEVER = -1


class DistillKind(Enum):
    PLUS_I = "plus_i"
    T = "t"


@dataclass(frozen=True)
class DistillCoefficients:
    """eps_out = cubic * eps_in**3 + floor * eps_css."""

    inputs: int
    cubic: float
    floor: float


COEFFICIENTS = {
    DistillKind.PLUS_I: DistillCoefficients(inputs=7, cubic=7.0, floor=4.0),
    DistillKind.T: DistillCoefficients(inputs=15, cubic=35.0, floor=8.0),
}


@dataclass(frozen=True)
class DistillParams:
    kind: DistillKind
    eps_in: float
    eps_css: float
    rounds: int = 0
    cubic: float = None

    def __post_init__(self):
        object.__setattr__(self, "kind", DistillKind(self.kind))
        object.__setattr__(self, "eps_in", check_probability("eps_in", self.eps_in))
        object.__setattr__(self, "eps_css", check_probability("eps_css", self.eps_css))
        if isinstance(self.rounds, bool) or not isinstance(self.rounds, int) or self.rounds < 0:
            raise InvalidConfigError(f"rounds must be a nonnegative integer, got {self.rounds!r}")
        if self.cubic is None:
            object.__setattr__(self, "cubic", COEFFICIENTS[self.kind].cubic)
        elif not self.cubic > 0:
            raise InvalidConfigError(f"cubic coefficient must be positive, got {self.cubic}")

    @property
    def input_counts(self) -> int:
        return COEFFICIENTS[self.kind].inputs

    @property
    def floor(self) -> float:
        return COEFFICIENTS[self.kind].floor * self.eps_css

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "eps_in": self.eps_in,
            "eps_css": self.eps_css,
            "rounds": self.rounds,
            "cubic": self.cubic,
            "input_counts": self.input_counts,
        }


def distill_step(params: DistillParams) -> float:
    return min(1.0, params.cubic * params.eps_in**3 + params.floor)


def ideal_threshold(kind, cubic: float = None) -> float:
    """Input error below which perfect CSS operations drive the error to zero."""
    kind = DistillKind(kind)
    return (cubic or COEFFICIENTS[kind].cubic) ** -0.5


@dataclass(frozen=True)
class Schedule:
    params: DistillParams
    eps: list
    rounds_to_floor: int

    @property
    def final(self) -> float:
        return self.eps[-1]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"round": range(len(self.eps)), "eps": self.eps})

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "eps": list(self.eps),
            "rounds_to_floor": self.rounds_to_floor,
            "floor": self.params.floor,
        }


def _near_floor(eps: float, floor: float) -> bool:
    return abs(eps - floor) <= FLOOR_TOLERANCE * floor


def distill_schedule(params: DistillParams) -> Schedule:
    """Error after each round, starting with eps_in; rounds_to_floor is NEVER if the floor is not reached."""
    eps = [params.eps_in]
    for _ in range(params.rounds):
        eps.append(distill_step(replace(params, eps_in=eps[-1])))
    reached = [k for k, value in enumerate(eps) if k > 0 and _near_floor(value, params.floor)]
    rounds_to_floor = reached[0] if reached else NEVER
    logger.debug("distillation %s: %s", params.kind.value, eps)
    return Schedule(params, eps, rounds_to_floor)


@dataclass(frozen=True)
class EndToEnd:
    eps_inject: float
    eps_css: float
    eps_plus_i: float
    schedule: Schedule

    @property
    def floor(self) -> float:
        return self.schedule.params.floor

    def to_dict(self) -> dict:
        return {
            "eps_inject": self.eps_inject,
            "eps_css": self.eps_css,
            "eps_plus_i": self.eps_plus_i,
            "floor": self.floor,
            "schedule": self.schedule.to_dict(),
        }


def end_to_end(noise: NoiseParams, cfg: GadgetConfig, kind, rounds: int = 3) -> EndToEnd:
    """Distill states injected with `cfg`, using the CNOT bound of `cfg` as the CSS error."""
    kind = DistillKind(kind)
    eps_inject = math.exp(injection_bound(cfg, noise))
    eps_css = math.exp(cnot_bound(cfg, noise).total)
    schedule = distill_schedule(DistillParams(kind, eps_inject, eps_css, rounds))
    # |+i> ancillas used by the T protocol are taken as fully distilled
    eps_plus_i = COEFFICIENTS[DistillKind.PLUS_I].floor * eps_css
    return EndToEnd(eps_inject, eps_css, eps_plus_i, schedule)
