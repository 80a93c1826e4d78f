"""Closed-form failure-probability upper bounds for the Bacon-Shor CNOT gadget.

Every bound is returned as a natural-log probability clamped at 0. Rates enter
per location class: gates and preparations are charged eps + eps_nd, X-basis
measurements eps_meas + eps_nd, so that eps_meas == eps recovers the uniform
accounting.
"""

import logging
import math
from dataclasses import dataclass, fields
from enum import Enum
from functools import lru_cache

import numpy as np

from bacon_shor_ft.helpers import (
    NEG_INF,
    clamp_log,
    format_log_probability,
    log_add,
    log_binom,
    log_pow,
    log_sum,
    safe_log,
    to_log10,
)
from bacon_shor_ft.noise import InvalidConfigError, NoiseParams

logger = logging.getLogger(__name__)


class Locality(Enum):
    NONLOCAL = "nonlocal"
    LOCAL = "local"


class Variant(Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"


@dataclass(frozen=True)
class GadgetConfig:
    """Code shape and repetition counts of one CNOT gadget."""

    n: int
    m: int
    p: int
    r: int
    r_prime: int
    r_plus: int
    locality: Locality = Locality.NONLOCAL
    variant: Variant = Variant.A

    def __post_init__(self):
        object.__setattr__(self, "locality", Locality(self.locality))
        object.__setattr__(self, "variant", Variant(self.variant))
        for name in ("n", "m", "p", "r", "r_prime", "r_plus"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise InvalidConfigError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
            if value < 1:
                raise InvalidConfigError(f"{name} must be >= 1, got {value}")
        for name in ("n", "m", "r"):
            if getattr(self, name) % 2 == 0:
                raise InvalidConfigError(f"{name} must be odd, got {getattr(self, name)}")
        if not self.is_local and self.p > 3 * self.m:
            raise InvalidConfigError(f"p must lie in [1, 3m] = [1, {3 * self.m}], got {self.p}")

    @property
    def is_local(self) -> bool:
        return self.locality is Locality.LOCAL

    def cat_length(self, blocks: int) -> int:
        """Cat length used to measure a Z-type operator spanning `blocks` blocks."""
        return blocks * self.m if self.is_local else self.p

    def key(self) -> tuple:
        return (self.n, self.m, self.p, self.r, self.r_prime, self.r_plus)

    @classmethod
    def from_dict(cls, params: dict) -> "GadgetConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(params) - known
        if unknown:
            raise InvalidConfigError(f"unknown gadget fields: {sorted(unknown)}")
        return cls(**params)

    def to_dict(self) -> dict:
        out = {name: getattr(self, name) for name in ("n", "m", "p", "r", "r_prime", "r_plus")}
        out["locality"] = self.locality.value
        out["variant"] = self.variant.value
        return out


# multiplicity of each term in the CNOT total
TERM_MULTIPLICITY = {
    "mzz": 1,
    "mzzz": 1,
    "mx": 2,
    "plus_prep": 4,
    "zz_cat_prep": 3,
    "zzz_cat_prep": 3,
}

# data-qubit storage steps per r * r_prime charged to a Z-type measurement
_STORAGE_STEPS = {2: 24, 3: 32}
# CZ gates per data qubit, in units of r, seen before a Z-type measurement completes
_PRIOR_Z_MEASUREMENTS = {2: 3, 3: 4}


def _any_fault(noise: NoiseParams) -> float:
    return noise.eps + noise.eps_nd


def _location_weight(noise: NoiseParams, gates, measurements):
    """Summed fault rate of `gates` gate/prep locations and `measurements` X measurements."""
    return gates * _any_fault(noise) + measurements * (noise.eps_meas + noise.eps_nd)


def _syndrome_bit(noise: NoiseParams) -> float:
    # one |+> preparation, two CZ gates, one X measurement
    return 3 * noise.eps + noise.eps_meas + 2 * noise.eps_nd


def t_min(r_prime: int, u: int, s: int) -> int:
    """Fewest rounds that can carry the winning syndrome given u faulty and s X-faulty rounds."""
    if r_prime < 0 or u < 0 or s < 0:
        raise InvalidConfigError(f"t_min arguments must be nonnegative, got {(r_prime, u, s)}")
    if u >= r_prime:
        return 0
    return -(-(r_prime - u) // (s + 2))


def mx_short_ancilla_terms(n, m, p, r, r_prime, r_plus, noise: NoiseParams) -> list:
    """Log summands of the X-measurement bound when cat qubits may touch several columns."""
    half = (m + 1) // 2
    fanout = -(-m // p)
    k_max = -(-(m + 1) // (2 * fanout))
    direct = safe_log(_location_weight(noise, n * (2 * r_plus + 3 * r + 1), n))
    frame = safe_log(8 * n * r * fanout * noise.eps_nd + 6 * n * r * r_prime * noise.eps_nd)
    terms = []
    for k in range(k_max + 1):
        remaining = max(0, half - fanout * k)
        terms.append(
            log_binom(p, k)
            + log_pow(frame, k)
            + log_binom(m, remaining)
            + log_pow(direct, remaining)
        )
    return terms


def mx_term(n, m, p, r, r_prime, r_plus, noise: NoiseParams, local: bool):
    half = (m + 1) // 2
    direct = _location_weight(noise, n * (2 * r_plus + 3 * r + 1), n)
    if local:
        bracket = (
            direct
            + 32 * n * r * r_prime * (noise.eps_s + noise.eps_s_nd)
            + 8 * n * r * r_prime * noise.eps_nd
        )
    elif p >= m:
        bracket = direct + 6 * n * r * r_prime * noise.eps_nd
    else:
        return clamp_log(log_add(*mx_short_ancilla_terms(n, m, p, r, r_prime, r_plus, noise)))
    return clamp_log(log_binom(m, half) + half * safe_log(bracket))


def mz_term(blocks, n, m, p, r, r_prime, r_plus, noise: NoiseParams, local: bool):
    weight = blocks * m
    length = weight if local else p
    x_flips = weight * (2 * r_plus + _PRIOR_Z_MEASUREMENTS[blocks] * r) * noise.eps_nd
    if local:
        x_flips = x_flips + weight * _STORAGE_STEPS[blocks] * r * r_prime * noise.eps_s_nd
    cat_rate = _location_weight(noise, weight + length + 2 * length * r_prime, length)
    half_r = (r + 1) // 2
    half_n = (n + 1) // 2
    bracket = log_add(safe_log(x_flips), log_binom(r, half_r) + half_r * safe_log(cat_rate))
    return clamp_log(log_binom(n, half_n) + half_n * bracket)


def mx_bound(cfg: GadgetConfig, noise: NoiseParams) -> float:
    """Bound on a decoded X^L measurement failing for reasons other than a bad preparation."""
    return mx_term(cfg.n, cfg.m, cfg.p, cfg.r, cfg.r_prime, cfg.r_plus, noise, cfg.is_local)


def mzz_bound(cfg: GadgetConfig, noise: NoiseParams) -> float:
    return mz_term(2, cfg.n, cfg.m, cfg.cat_length(2), cfg.r, cfg.r_prime, cfg.r_plus, noise, cfg.is_local)


def mzzz_bound(cfg: GadgetConfig, noise: NoiseParams) -> float:
    return mz_term(3, cfg.n, cfg.m, cfg.cat_length(3), cfg.r, cfg.r_prime, cfg.r_plus, noise, cfg.is_local)


@lru_cache(maxsize=4096)
def ancilla_prep_bound(
    length: int, rounds: int, noise: NoiseParams, locality: Locality, misdecode: bool = True
) -> float:
    """Failure bound of a single length-`length` cat prepared with `rounds` syndrome rounds.

    Not clamped; callers add their prefactor first.
    """
    local = Locality(locality) is Locality.LOCAL
    syndrome = _syndrome_bit(noise)
    if local:
        faulty_round = safe_log(length * syndrome + 4 * length * (noise.eps_s + noise.eps_s_nd))
        x_round = safe_log(2 * length * noise.eps_nd + 4 * length * noise.eps_s_nd)
    else:
        x_round = safe_log(2 * length * noise.eps_nd)
        bad_bit = safe_log(syndrome)
        faulty_round = safe_log(length * syndrome)
        pair = log_binom(length, 2)

    terms = []
    for s in range(rounds + 1):
        for u in range(rounds + 1):
            t = t_min(rounds, u, s)
            if t < 1 or u + t > rounds:
                continue
            term = log_binom(rounds, s) + log_binom(rounds, u + t) + log_binom(u + t, u)
            if local:
                term += log_pow(faulty_round, t + u) + log_pow(x_round, s)
            else:
                term += (
                    pair
                    + log_pow(bad_bit, 2 * t)
                    + log_pow(faulty_round, u)
                    + log_pow(x_round, s)
                )
            terms.append(term)

    # high-weight reading of the repetition-code syndrome
    if misdecode:
        half = -(-length // 2)
        frame = 2 * rounds * noise.eps_nd
        if local:
            frame += 4 * rounds * noise.eps_s_nd
        terms.append(log_binom(length, half) + log_pow(safe_log(frame), half))
    return log_sum(terms)


def cat_prep_bound(cfg: GadgetConfig, noise: NoiseParams, weight_blocks: int) -> float:
    """Bound on any of the n*r cat preparations of one ZZ (2) or ZZZ (3) measurement failing."""
    if weight_blocks not in (2, 3):
        raise InvalidConfigError(f"weight_blocks must be 2 or 3, got {weight_blocks}")
    single = ancilla_prep_bound(cfg.cat_length(weight_blocks), cfg.r_prime, noise, cfg.locality)
    return clamp_log(math.log(cfg.n * cfg.r) + single)


def plus_prep_bound(cfg: GadgetConfig, noise: NoiseParams, misdecode: bool = True) -> float:
    """Bound on the |+>^L preparation failing; m column cats of length n."""
    single = ancilla_prep_bound(cfg.n, cfg.r_plus, noise, cfg.locality, misdecode)
    return clamp_log(math.log(cfg.m) + single)


@dataclass(frozen=True)
class BoundBreakdown:
    """Per-term log-probabilities of the CNOT bound and their weighted total."""

    mzz: float
    mzzz: float
    mx: float
    plus_prep: float
    zz_cat_prep: float
    zzz_cat_prep: float
    total: float

    @classmethod
    def from_terms(cls, **terms) -> "BoundBreakdown":
        weighted = [math.log(TERM_MULTIPLICITY[name]) + value for name, value in terms.items()]
        return cls(total=clamp_log(log_sum(weighted)), **terms)

    def terms(self) -> dict:
        return {name: getattr(self, name) for name in TERM_MULTIPLICITY}

    def probability(self) -> float:
        return math.exp(self.total)

    def to_dict(self) -> dict:
        out = {}
        for name in (*TERM_MULTIPLICITY, "total"):
            value = getattr(self, name)
            out[name] = format_log_probability(value)
            out[f"log10_{name}"] = None if value == NEG_INF else to_log10(value)
        return out


def cnot_bound(cfg: GadgetConfig, noise: NoiseParams) -> BoundBreakdown:
    breakdown = BoundBreakdown.from_terms(
        mzz=mzz_bound(cfg, noise),
        mzzz=mzzz_bound(cfg, noise),
        mx=mx_bound(cfg, noise),
        plus_prep=plus_prep_bound(cfg, noise),
        zz_cat_prep=cat_prep_bound(cfg, noise, 2),
        zzz_cat_prep=cat_prep_bound(cfg, noise, 3),
    )
    logger.debug("cnot bound %s -> log10 %.3f", cfg.key(), to_log10(breakdown.total))
    return breakdown


def cnot_total_grid(n, m, p, r, r_prime, r_plus, noise: NoiseParams, locality: Locality):
    """Log CNOT totals over broadcastable integer arrays r_prime and r_plus."""
    locality = Locality(locality)
    local = locality is Locality.LOCAL
    r_prime = np.asarray(r_prime)
    r_plus = np.asarray(r_plus)
    zz_len = 2 * m if local else p
    zzz_len = 3 * m if local else p
    zz_cat = np.vectorize(lambda rp: ancilla_prep_bound(zz_len, int(rp), noise, locality))(r_prime)
    zzz_cat = np.vectorize(lambda rp: ancilla_prep_bound(zzz_len, int(rp), noise, locality))(r_prime)
    plus = np.vectorize(lambda rq: ancilla_prep_bound(n, int(rq), noise, locality))(r_plus)
    weighted = [
        mz_term(2, n, m, zz_len, r, r_prime, r_plus, noise, local),
        mz_term(3, n, m, zzz_len, r, r_prime, r_plus, noise, local),
        math.log(2) + mx_term(n, m, p, r, r_prime, r_plus, noise, local),
        math.log(4) + clamp_log(math.log(m) + plus),
        math.log(3) + clamp_log(math.log(n * r) + zz_cat),
        math.log(3) + clamp_log(math.log(n * r) + zzz_cat),
    ]
    total = weighted[0]
    for term in weighted[1:]:
        total = np.logaddexp(total, term)
    return clamp_log(np.broadcast_to(total, np.broadcast(r_prime, r_plus).shape))


def injection_bound(cfg: GadgetConfig, noise: NoiseParams) -> float:
    """Bound on teleporting a physical |psi> into a block with a length-(m+1) cat."""
    m, r, rp, rq = cfg.m, cfg.r, cfg.r_prime, cfg.r_plus
    measure_x = (
        _location_weight(noise, r, 1)
        + 8 * (r - 1) * rp * (noise.eps_s + noise.eps_s_nd)
        + 2 * (m + 1) * r * rp * noise.eps_nd
    )
    measure_zz = r * noise.eps_nd + 8 * rp * (r - 1) * noise.eps_s_nd + m * (2 * rq + r) * noise.eps_nd
    cat_rate = _location_weight(noise, (m + 1) * (rp + 2), m + 1)
    half_r = (r + 1) // 2
    total = log_add(
        safe_log(noise.eps_psi + measure_x + measure_zz),
        log_binom(r, half_r) + half_r * safe_log(cat_rate),
    )
    return clamp_log(total)


def injection_leading_order(cfg: GadgetConfig, noise: NoiseParams) -> float:
    """Linear-in-eps part of the injection bound (linear probability, eps_nd dropped)."""
    linear = noise.eps_psi + cfg.r * noise.eps + noise.eps_meas
    linear += 8 * (cfg.r - 1) * cfg.r_prime * noise.eps_s
    if cfg.r == 1:
        linear += (cfg.m + 1) * ((cfg.r_prime + 2) * noise.eps + noise.eps_meas)
    return linear
