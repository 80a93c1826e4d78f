"""Exhaustive search over gadget parameters for the lowest CNOT bound or the cheapest gadget."""

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np
import pandas as pd
from tqdm import tqdm

from bacon_shor_ft.bounds import (
    BoundBreakdown,
    GadgetConfig,
    Locality,
    Variant,
    cnot_bound,
    cnot_total_grid,
    mx_term,
    mz_term,
)
from bacon_shor_ft.circuits import CircuitKind, build_circuit
from bacon_shor_ft.helpers import NEG_INF, log_binom, safe_log, to_log10
from bacon_shor_ft.noise import BaconShorError, InvalidConfigError, LocationClass, NoiseParams

logger = logging.getLogger(__name__)

DEFAULT_N = tuple(range(1, 22, 2))
DEFAULT_M = tuple(range(1, 152, 2))
DEFAULT_R = tuple(range(1, 16, 2))
DEFAULT_REPEATS = tuple(range(1, 31))

SWEEP_COLUMNS = [
    "eps",
    "bias",
    "eps_meas",
    "locality",
    "n",
    "m",
    "p",
    "r",
    "r_prime",
    "r_plus",
    "log10_bound",
    "cz_gates",
    "qubits",
]


class NotAchievableError(BaconShorError):
    """No grid point reaches the requested target."""


class Objective(Enum):
    MIN_BOUND = "min_bound"
    MIN_COST = "min_cost"


def _as_range(name: str, values, odd: bool = False) -> tuple:
    values = tuple(sorted({int(v) for v in values}))
    if odd:
        values = tuple(v for v in values if v % 2 == 1)
    values = tuple(v for v in values if v >= 1)
    if not values:
        raise InvalidConfigError(f"search range for {name} is empty")
    return values


@dataclass(frozen=True)
class SearchSpace:
    """Candidate values per parameter. p=None means every cat length that is not dominated."""

    n: tuple = DEFAULT_N
    m: tuple = DEFAULT_M
    r: tuple = DEFAULT_R
    r_prime: tuple = DEFAULT_REPEATS
    r_plus: tuple = DEFAULT_REPEATS
    p: Optional[tuple] = None
    locality: Locality = Locality.NONLOCAL
    variant: Variant = Variant.A

    def __post_init__(self):
        object.__setattr__(self, "n", _as_range("n", self.n, odd=True))
        object.__setattr__(self, "m", _as_range("m", self.m, odd=True))
        object.__setattr__(self, "r", _as_range("r", self.r, odd=True))
        object.__setattr__(self, "r_prime", _as_range("r_prime", self.r_prime))
        object.__setattr__(self, "r_plus", _as_range("r_plus", self.r_plus))
        if self.p is not None:
            object.__setattr__(self, "p", _as_range("p", self.p))
        object.__setattr__(self, "locality", Locality(self.locality))
        object.__setattr__(self, "variant", Variant(self.variant))
        if not self.is_local and not any(self.p_candidates(m) for m in self.m):
            raise InvalidConfigError("no p value lies in [1, 3m] for any m in the search range")

    @property
    def is_local(self) -> bool:
        return self.locality is Locality.LOCAL

    @classmethod
    def single(cls, cfg: GadgetConfig) -> "SearchSpace":
        return cls(
            n=(cfg.n,),
            m=(cfg.m,),
            r=(cfg.r,),
            r_prime=(cfg.r_prime,),
            r_plus=(cfg.r_plus,),
            p=(cfg.p,),
            locality=cfg.locality,
            variant=cfg.variant,
        )

    @classmethod
    def from_dict(cls, params: dict) -> "SearchSpace":
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in params.items()})

    def to_dict(self) -> dict:
        out = {name: list(getattr(self, name)) for name in ("n", "m", "r", "r_prime", "r_plus")}
        out["p"] = None if self.p is None else list(self.p)
        out["locality"] = self.locality.value
        out["variant"] = self.variant.value
        return out

    def p_candidates(self, m: int) -> list:
        """Cat lengths worth evaluating for row length m.

        For p >= m the bound and cost only grow with p, and for p < m they only
        depend on the fanout ceil(m/p) otherwise growing with p, so the smallest
        p per fanout dominates.
        """
        if self.is_local:
            # p is forced by the layout; keep one placeholder value
            return [3 * m]
        if self.p is not None:
            return [p for p in self.p if p <= 3 * m]
        return sorted({-(-m // fanout) for fanout in range(1, m + 1)})

    def pairs(self) -> list:
        return list(itertools.product(self.n, self.m))

    def size(self) -> int:
        per_block = len(self.r) * len(self.r_prime) * len(self.r_plus) * len(self.n)
        return per_block * sum(len(self.p_candidates(m)) for m in self.m)

    def config(self, n, m, p, r, r_prime, r_plus) -> GadgetConfig:
        return GadgetConfig(
            n=int(n),
            m=int(m),
            p=int(p),
            r=int(r),
            r_prime=int(r_prime),
            r_plus=int(r_plus),
            locality=self.locality,
            variant=self.variant,
        )


@dataclass(frozen=True)
class ResourceCount:
    cz_gates: int
    preps: int
    measurements: int
    wait_steps: int
    physical_qubits: int

    def to_dict(self) -> dict:
        return {
            "cz_gates": self.cz_gates,
            "preps": self.preps,
            "measurements": self.measurements,
            "wait_steps": self.wait_steps,
            "physical_qubits": self.physical_qubits,
        }


def count_resources(cfg: GadgetConfig) -> ResourceCount:
    """Tally the locations of the CNOT gadget circuit, leaving out the exposure of its inputs."""
    circuit = build_circuit(CircuitKind.CNOT, cfg)
    tally = circuit.tally()
    return ResourceCount(
        cz_gates=tally[LocationClass.CZ],
        preps=tally[LocationClass.PREP_PLUS],
        measurements=tally[LocationClass.MEAS_X],
        wait_steps=tally[LocationClass.WAIT],
        physical_qubits=circuit.physical_qubits,
    )


def _checks(length, local: bool):
    """ZZ checks per syndrome round of a length-`length` cat."""
    wrap = 0 if local else np.where(np.asarray(length) >= 2, 1, 0)
    return np.maximum(0, np.asarray(length) - 1) + wrap


def cnot_cz_count(n, m, p, r, r_prime, r_plus, local: bool = False):
    """CZ gates of the CNOT gadget, vectorized over r_prime and r_plus.

    The exposure of the input blocks belongs to the preceding gadget and is not counted.
    """
    zz_len, zzz_len = [w * m if local else min(p, w * m) for w in (2, 3)]
    plus = 2 * 2 * m * _checks(n, local) * np.asarray(r_plus)
    zz = r * n * (2 * m + 2 * _checks(zz_len, local) * np.asarray(r_prime))
    zzz = r * n * (3 * m + 2 * _checks(zzz_len, local) * np.asarray(r_prime))
    return plus + zz + zzz


def _pair_lower_bound(n, m, space: SearchSpace, noise: NoiseParams) -> float:
    """Log lower bound on the CNOT total over every (r, p, r', r+) of one (n, m)."""
    r, rq = space.r[0], space.r_plus[0]
    half_m, half_n = (m + 1) // 2, (n + 1) // 2
    direct = n * (2 * rq + 3 * r + 1) * (noise.eps + noise.eps_nd) + n * (noise.eps_meas + noise.eps_nd)
    mx = log_binom(m, half_m) + half_m * safe_log(direct)
    mzz = log_binom(n, half_n) + half_n * safe_log(2 * m * (2 * rq + 3 * r) * noise.eps_nd)
    return min(0.0, max(math.log(2) + mx, mzz))


def _block_lower_bound(n, m, p, r, space: SearchSpace, noise: NoiseParams) -> float:
    """mx, mzz and mzzz grow with r' and r+, so their values at the minimal repeats bound the block."""
    rp, rq = space.r_prime[0], space.r_plus[0]
    local = space.is_local
    zz_len, zzz_len = (2 * m, 3 * m) if local else (p, p)
    lower = max(
        math.log(2) + mx_term(n, m, p, r, rp, rq, noise, local),
        mz_term(2, n, m, zz_len, r, rp, rq, noise, local),
        mz_term(3, n, m, zzz_len, r, rp, rq, noise, local),
    )
    return min(0.0, lower)


@dataclass
class _ShardResult:
    best: Optional[tuple] = None
    evaluated: int = 0
    pruned: int = 0
    frontier: list = field(default_factory=list)


def _better(a: Optional[tuple], b: Optional[tuple]) -> Optional[tuple]:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _search_pairs(pairs, space: SearchSpace, noise: NoiseParams, objective: Objective, log_target) -> _ShardResult:
    """Evaluate (n, m) pairs in order; keys are (bound, cz, cfg) for MIN_BOUND and (cz, bound, cfg) otherwise."""
    out = _ShardResult()
    rp_grid, rq_grid = np.meshgrid(space.r_prime, space.r_plus, indexing="ij")
    block = rp_grid.size
    cz_floor_at = (space.r_prime[0], space.r_plus[0])

    for n, m in pairs:
        candidates = space.p_candidates(m)
        group = block * len(space.r) * len(candidates)
        if objective is Objective.MIN_BOUND and out.best is not None:
            if _pair_lower_bound(n, m, space, noise) > out.best[0]:
                out.pruned += group
                continue
        for r in space.r:
            for p in candidates:
                if out.best is not None:
                    if objective is Objective.MIN_BOUND:
                        skip = _block_lower_bound(n, m, p, r, space, noise) > out.best[0]
                    else:
                        cz_floor = cnot_cz_count(n, m, p, r, *cz_floor_at, local=space.is_local)
                        skip = int(cz_floor) > out.best[0]
                    if skip:
                        out.pruned += block
                        continue
                if objective is Objective.MIN_COST:
                    if _block_lower_bound(n, m, p, r, space, noise) > log_target:
                        out.pruned += block
                        continue
                bound = cnot_total_grid(n, m, p, r, rp_grid, rq_grid, noise, space.locality)
                cz = cnot_cz_count(n, m, p, r, rp_grid, rq_grid, local=space.is_local)
                out.evaluated += block
                if objective is Objective.MIN_BOUND:
                    order = np.lexsort((rq_grid.ravel(), rp_grid.ravel(), cz.ravel(), bound.ravel()))
                    i = order[0]
                    key = (float(bound.ravel()[i]), int(cz.ravel()[i]))
                else:
                    ok = np.flatnonzero(bound.ravel() <= log_target)
                    if ok.size == 0:
                        continue
                    order = np.lexsort(
                        (rq_grid.ravel()[ok], rp_grid.ravel()[ok], bound.ravel()[ok], cz.ravel()[ok])
                    )
                    i = ok[order[0]]
                    key = (int(cz.ravel()[i]), float(bound.ravel()[i]))
                cfg_key = (n, m, p, r, int(rp_grid.ravel()[i]), int(rq_grid.ravel()[i]))
                out.best = _better(out.best, (*key, cfg_key))
    return out


def _frontier_pairs(pairs, space: SearchSpace, noise: NoiseParams) -> _ShardResult:
    out = _ShardResult()
    rp_grid, rq_grid = np.meshgrid(space.r_prime, space.r_plus, indexing="ij")
    for n, m in pairs:
        for r in space.r:
            for p in space.p_candidates(m):
                bound = cnot_total_grid(n, m, p, r, rp_grid, rq_grid, noise, space.locality).ravel()
                cz = cnot_cz_count(n, m, p, r, rp_grid, rq_grid, local=space.is_local).ravel()
                out.evaluated += bound.size
                order = np.lexsort((rq_grid.ravel(), rp_grid.ravel(), bound, cz))
                running = math.inf
                for i in order:
                    if bound[i] < running:
                        running = bound[i]
                        cfg_key = (n, m, p, r, int(rp_grid.ravel()[i]), int(rq_grid.ravel()[i]))
                        out.frontier.append((int(cz[i]), float(bound[i]), cfg_key))
    return out


def _shards(pairs: list, workers: int) -> list:
    workers = max(1, workers)
    return [pairs[k::workers] for k in range(workers) if pairs[k::workers]]


def _run_sharded(fn, space: SearchSpace, workers: int, *args) -> list:
    shards = _shards(space.pairs(), workers)
    if len(shards) == 1:
        return [fn(shards[0], space, *args)]
    with ProcessPoolExecutor(max_workers=len(shards)) as pool:
        return list(pool.map(fn, shards, *[[a] * len(shards) for a in (space, *args)]))


@dataclass(frozen=True)
class FrontierPoint:
    cz_gates: int
    bound: float
    cfg: GadgetConfig

    def to_dict(self) -> dict:
        return {
            "cz_gates": self.cz_gates,
            "log10_bound": None if self.bound == NEG_INF else to_log10(self.bound),
            **self.cfg.to_dict(),
        }


@dataclass(frozen=True)
class OptResult:
    best_cfg: GadgetConfig
    bound: BoundBreakdown
    resources: ResourceCount
    objective: Objective
    evaluated: int
    pruned: int
    frontier: Optional[list] = None

    def to_dict(self) -> dict:
        out = {
            "objective": self.objective.value,
            "best_cfg": self.best_cfg.to_dict(),
            "bound": self.bound.to_dict(),
            "resources": self.resources.to_dict(),
            "evaluated": self.evaluated,
            "pruned": self.pruned,
        }
        if self.frontier is not None:
            out["frontier"] = [point.to_dict() for point in self.frontier]
        return out


def optimize(
    noise: NoiseParams,
    space: SearchSpace,
    objective=Objective.MIN_BOUND,
    target: Optional[float] = None,
    workers: int = 1,
) -> OptResult:
    """Best grid point for the objective; MIN_COST needs a target failure probability."""
    objective = Objective(objective)
    log_target = None
    if objective is Objective.MIN_COST:
        if target is None or not 0 < target <= 1:
            raise InvalidConfigError(f"MIN_COST needs a target probability in (0, 1], got {target}")
        log_target = math.log(target)

    results = _run_sharded(_search_pairs, space, workers, noise, objective, log_target)
    best = None
    for result in results:
        best = _better(best, result.best)
    evaluated = sum(r.evaluated for r in results)
    pruned = sum(r.pruned for r in results)
    logger.info("optimizer evaluated %d grid points, pruned %d", evaluated, pruned)
    if best is None:
        raise NotAchievableError(f"no configuration in the search space reaches {target:g}")

    cfg = space.config(*best[2])
    return OptResult(
        best_cfg=cfg,
        bound=cnot_bound(cfg, noise),
        resources=count_resources(cfg),
        objective=objective,
        evaluated=evaluated,
        pruned=pruned,
    )


def pareto_front(noise: NoiseParams, space: SearchSpace, workers: int = 1) -> list:
    """Grid points not dominated in (cz_gates, bound), cost ascending with strictly decreasing bound."""
    results = _run_sharded(_frontier_pairs, space, workers, noise)
    points = sorted(p for r in results for p in r.frontier)
    front = []
    running = math.inf
    for cz, bound, key in points:
        if bound < running:
            running = bound
            front.append(FrontierPoint(cz, bound, space.config(*key)))
    return front


def _sweep_noise(template: NoiseParams, eps: float, bias: float, ratio: float) -> NoiseParams:
    return NoiseParams.from_bias(
        eps,
        bias,
        eps_s=template.eps_s,
        eps_s_nd=template.eps_s_nd,
        eps_meas=min(1.0, ratio * eps),
    )


def iter_sweep(
    noise_template: NoiseParams,
    eps_grid,
    bias_list,
    space: SearchSpace,
    locality=None,
    eps_meas_ratios=(1.0,),
    workers: int = 1,
    progress: bool = False,
):
    """Yield one optimized row per (eps, bias, eps_meas/eps) point as soon as it is computed."""
    if not eps_grid or not bias_list or not eps_meas_ratios:
        raise InvalidConfigError("sweep grids must be nonempty")
    if locality is not None:
        space = replace(space, locality=Locality(locality))
    points = list(itertools.product(eps_grid, bias_list, eps_meas_ratios))
    for eps, bias, ratio in tqdm(points, disable=not progress, desc="sweep"):
        noise = _sweep_noise(noise_template, eps, bias, ratio)
        result = optimize(noise, space, workers=workers)
        cfg = result.best_cfg
        yield {
            "eps": eps,
            "bias": bias,
            "eps_meas": noise.eps_meas,
            "locality": cfg.locality.value,
            "n": cfg.n,
            "m": cfg.m,
            "p": cfg.p,
            "r": cfg.r,
            "r_prime": cfg.r_prime,
            "r_plus": cfg.r_plus,
            "log10_bound": None if result.bound.total == NEG_INF else to_log10(result.bound.total),
            "cz_gates": result.resources.cz_gates,
            "qubits": result.resources.physical_qubits,
        }


def sweep(noise_template: NoiseParams, eps_grid, bias_list, space: SearchSpace, **kwargs) -> pd.DataFrame:
    rows = list(iter_sweep(noise_template, eps_grid, bias_list, space, **kwargs))
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)
