"""Monte-Carlo Pauli-frame simulation of the gadget circuits.

All preparations are |+>, all gates CZ and all measurements X-basis, so the
noiseless reference is fixed and only fault-induced flips are tracked. Frames
are boolean arrays of shape (qubits, trials).
"""

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Optional

import numpy as np
from scipy.stats import binomtest
from tqdm import tqdm

from bacon_shor_ft.bounds import (
    GadgetConfig,
    ancilla_prep_bound,
    cat_prep_bound,
    cnot_bound,
    injection_bound,
    mx_bound,
    mzz_bound,
    mzzz_bound,
    plus_prep_bound,
)
from bacon_shor_ft.circuits import (
    Circuit,
    CircuitKind,
    CatPlan,
    Frame,
    PlusPrepPlan,
    Role,
    XMeasurementPlan,
    ZMeasurementPlan,
    build_circuit,
)
from bacon_shor_ft.helpers import clamp_log, format_log_probability, log_add
from bacon_shor_ft.noise import (
    InvalidConfigError,
    LocationClass,
    NoiseParams,
    RateKind,
    rate_of,
)

logger = logging.getLogger(__name__)

DEFAULT_SHARDS = 4
BATCH_SIZE = 4096
CONFIDENCE = 0.95

_KIND_ORDER = list(LocationClass)
_PREP, _MEAS, _CZ, _WAIT = (
    _KIND_ORDER.index(k)
    for k in (LocationClass.PREP_PLUS, LocationClass.MEAS_X, LocationClass.CZ, LocationClass.WAIT)
)

# (x, z) bits on the two operands of every CZ fault
_CZ_DIAGONAL = (
    np.zeros((3, 2), dtype=bool),
    np.array([[1, 0], [0, 1], [1, 1]], dtype=bool),
)
_CZ_ALL = [
    (np.array([xa, xb], dtype=bool), np.array([za, zb], dtype=bool))
    for xa, za, xb, zb in itertools.product((0, 1), repeat=4)
    if xa or xb
]
_CZ_NON_DIAGONAL = (np.stack([p[0] for p in _CZ_ALL]), np.stack([p[1] for p in _CZ_ALL]))
# single-qubit Paulis as (x, z): X, Y, Z
_ONE_QUBIT = (np.array([1, 1, 0], dtype=bool), np.array([0, 1, 1], dtype=bool))


class Classification(IntEnum):
    SUCCESS = 0
    PREP_FAILURE = 1
    LOGICAL_X = 2
    LOGICAL_Z = 3
    LOGICAL_Y = 4


class Verdict(Enum):
    UPHELD = "UPHELD"
    VIOLATED = "VIOLATED"


# logical Pauli injected on the CNOT inputs and its image on (ctrl x, ctrl z, tgt x, tgt z)
CNOT_RULE = {
    "XI": (1, 0, 1, 0),
    "IX": (0, 0, 1, 0),
    "ZI": (0, 1, 0, 0),
    "IZ": (0, 1, 0, 1),
}


@dataclass(frozen=True)
class PauliMask:
    x: np.ndarray
    z: np.ndarray

    def __xor__(self, other: "PauliMask") -> "PauliMask":
        return PauliMask(self.x ^ other.x, self.z ^ other.z)

    def is_identity(self) -> np.ndarray:
        return ~(self.x.any(axis=0) | self.z.any(axis=0))


@dataclass(frozen=True)
class FaultSet:
    """Sparse faults: location index, trial index and (x, z) bits on up to two operands."""

    loc: np.ndarray
    trial: np.ndarray
    x: np.ndarray
    z: np.ndarray
    trials: int

    @classmethod
    def empty(cls, trials: int) -> "FaultSet":
        return cls(
            np.zeros(0, dtype=np.int64),
            np.zeros(0, dtype=np.int64),
            np.zeros((0, 2), dtype=bool),
            np.zeros((0, 2), dtype=bool),
            trials,
        )

    def __len__(self) -> int:
        return len(self.loc)


@dataclass(frozen=True)
class Trace:
    """Pre-decode record of a batch of trials."""

    x: np.ndarray
    z: np.ndarray
    flips: np.ndarray
    flip_row: np.ndarray
    snapshots: tuple
    injected: Optional[str] = None

    @property
    def trials(self) -> int:
        return self.x.shape[1]

    def flip(self, locations) -> np.ndarray:
        return self.flips[self.flip_row[np.asarray(locations, dtype=np.int64)]]


@dataclass(frozen=True)
class TrialOutcome:
    flip_bits: np.ndarray
    inferred_frame: PauliMask
    actual_residual: PauliMask
    classification: np.ndarray
    prep_failure: np.ndarray
    decoded: dict = field(default_factory=dict)
    a_bit: Optional[np.ndarray] = None
    b_bit: Optional[np.ndarray] = None

    def counts(self) -> np.ndarray:
        return np.bincount(self.classification, minlength=len(Classification))


def _location_rates(circuit: Circuit, noise: NoiseParams):
    kinds = circuit.kinds
    diagonal = np.zeros(len(kinds))
    non_diagonal = np.zeros(len(kinds))
    for index, location in enumerate(_KIND_ORDER):
        mask = kinds == index
        diagonal[mask] = rate_of(location, RateKind.DIAGONAL, noise)
        non_diagonal[mask] = rate_of(location, RateKind.NON_DIAGONAL, noise)
    general = np.zeros(len(kinds), dtype=bool)
    psi = [q.index for q in circuit.qubits if q.role is Role.PSI]
    if psi:
        general = (kinds == _PREP) & np.isin(circuit.operands[:, 0], psi)
        diagonal[general] = noise.eps_psi
    return diagonal, non_diagonal, general


def _draw_paulis(kind: int, general: bool, diagonal: np.ndarray, rng: np.random.Generator):
    k = len(diagonal)
    x = np.zeros((k, 2), dtype=bool)
    z = np.zeros((k, 2), dtype=bool)
    if general:
        pick = rng.integers(0, 3, size=k)
        x[:, 0], z[:, 0] = _ONE_QUBIT[0][pick], _ONE_QUBIT[1][pick]
    elif kind == _CZ:
        pick_d = rng.integers(0, len(_CZ_DIAGONAL[1]), size=k)
        pick_n = rng.integers(0, len(_CZ_NON_DIAGONAL[1]), size=k)
        x[:] = np.where(diagonal[:, None], _CZ_DIAGONAL[0][pick_d], _CZ_NON_DIAGONAL[0][pick_n])
        z[:] = np.where(diagonal[:, None], _CZ_DIAGONAL[1][pick_d], _CZ_NON_DIAGONAL[1][pick_n])
    elif kind == _WAIT:
        y = rng.random(k) < 0.5
        x[:, 0] = ~diagonal
        z[:, 0] = diagonal | y
    else:
        # preparation Z error, or a measurement outcome flip
        z[:, 0] = True
    return x, z


def sample_faults(circuit: Circuit, noise: NoiseParams, rng=None, trials: int = 1) -> FaultSet:
    """Independently draw a fault per location and trial; reproducible from the seed."""
    rng = np.random.default_rng(rng)
    diagonal, non_diagonal, general = _location_rates(circuit, noise)
    total = np.minimum(1.0, diagonal + non_diagonal)
    hits = rng.binomial(trials, total)
    locs, trial_ids, xs, zs = [], [], [], []
    for i in np.flatnonzero(hits):
        k = int(hits[i])
        chosen = np.sort(rng.choice(trials, size=k, replace=False))
        is_diagonal = rng.random(k) * total[i] < diagonal[i]
        x, z = _draw_paulis(int(circuit.kinds[i]), bool(general[i]), is_diagonal, rng)
        locs.append(np.full(k, i, dtype=np.int64))
        trial_ids.append(chosen)
        xs.append(x)
        zs.append(z)
    if not locs:
        return FaultSet.empty(trials)
    return FaultSet(
        np.concatenate(locs), np.concatenate(trial_ids), np.concatenate(xs), np.concatenate(zs), trials
    )


def single_fault_sets(circuit: Circuit, chunk: int = BATCH_SIZE):
    """Every single fault of the circuit, one per trial, yielded in chunks."""
    kinds = circuit.kinds
    psi = {q.index for q in circuit.qubits if q.role is Role.PSI}
    faults = []
    for i, kind in enumerate(kinds):
        if kind == _CZ:
            options = [(x, z) for x, z in zip(*_CZ_DIAGONAL)] + list(zip(*_CZ_NON_DIAGONAL))
        elif kind == _WAIT or (kind == _PREP and circuit.operands[i, 0] in psi):
            options = [
                (np.array([x, False]), np.array([z, False])) for x, z in zip(*_ONE_QUBIT)
            ]
        else:
            options = [(np.array([False, False]), np.array([True, False]))]
        faults.extend((i, x, z) for x, z in options)
    for start in range(0, len(faults), chunk):
        part = faults[start : start + chunk]
        yield FaultSet(
            np.array([f[0] for f in part], dtype=np.int64),
            np.arange(len(part), dtype=np.int64),
            np.array([f[1] for f in part], dtype=bool).reshape(-1, 2),
            np.array([f[2] for f in part], dtype=bool).reshape(-1, 2),
            len(part),
        )


def _inject(circuit: Circuit, x: np.ndarray, z: np.ndarray, pauli: str):
    roles = circuit.roles
    if roles is None or pauli not in CNOT_RULE:
        raise InvalidConfigError(f"cannot inject {pauli!r} into a {circuit.kind.value} circuit")
    block = roles.ctrl_in if pauli[1] == "I" else roles.tgt_in
    grid = np.asarray(circuit.blocks[block])
    if "X" in pauli:
        x[grid[:, 0]] ^= True
    else:
        z[grid[0, :]] ^= True


def propagate(circuit: Circuit, faults: FaultSet, injected: Optional[str] = None) -> Trace:
    """Push every fault forward through the circuit and record measurement flips."""
    trials = faults.trials
    x = np.zeros((circuit.n_qubits, trials), dtype=bool)
    z = np.zeros_like(x)
    n_loc = len(circuit.locations)
    is_meas = circuit.kinds == _MEAS
    flip_row = np.full(n_loc, -1, dtype=np.int64)
    flip_row[is_meas] = np.arange(int(is_meas.sum()))
    flips = np.zeros((int(is_meas.sum()), trials), dtype=bool)

    positions = np.arange(n_loc)
    starts = np.searchsorted(faults.loc, positions, side="left")
    ends = np.searchsorted(faults.loc, positions, side="right")
    snapshot_at = {}
    for sid, (after, _) in enumerate(circuit.snapshots):
        snapshot_at.setdefault(after, []).append(sid)
    snapshots = [None] * len(circuit.snapshots)

    for i, location in enumerate(circuit.locations):
        if injected is not None and i == circuit.inject_at:
            _inject(circuit, x, z, injected)
        kind = circuit.kinds[i]
        ops = location.qubits
        if kind == _PREP:
            x[ops[0]] = False
            z[ops[0]] = False
        elif kind == _CZ:
            a, b = ops
            z[a] ^= x[b]
            z[b] ^= x[a]
        lo, hi = starts[i], ends[i]
        if hi > lo:
            hit = faults.trial[lo:hi]
            for k, q in enumerate(ops):
                x[q, hit] ^= faults.x[lo:hi, k]
                z[q, hit] ^= faults.z[lo:hi, k]
        if kind == _MEAS:
            q = ops[0]
            flips[flip_row[i]] = z[q]
            x[q] = False
            z[q] = False
        for sid in snapshot_at.get(i, ()):
            snapshots[sid] = x[list(circuit.snapshots[sid][1])].copy()

    return Trace(x, z, flips, flip_row, tuple(snapshots), injected)


def cat_history(cat: CatPlan, trace: Trace):
    """Syndromes (rounds, bits, trials) of a cat's check rounds and their acceptance mask.

    A Nonlocal round is rejected when its checks and the wrap-around check hold
    an odd number of flips.
    """
    syndromes = np.stack([trace.flip(rp.checks) for rp in cat.rounds])
    if cat.rounds[0].wrap is None:
        return syndromes, np.ones(syndromes.shape[::2], dtype=bool)
    wraps = np.stack([trace.flip([rp.wrap])[0] for rp in cat.rounds])
    return syndromes, (syndromes.sum(axis=1) + wraps) % 2 == 0


def winning_syndrome(syndromes: np.ndarray, accepted: np.ndarray):
    """Most frequent accepted syndrome per trial and its vote count.

    Ties go to the trivial syndrome when it leads, otherwise to the latest
    leading round. Trials without an accepted round get the trivial syndrome
    and zero votes.
    """
    rounds, _, trials = syndromes.shape
    idx = np.arange(trials)
    same = (syndromes[:, None] == syndromes[None, :]).all(axis=2)
    votes = (same & accepted[None, :, :]).sum(axis=1)
    votes = np.where(accepted, votes, 0)
    top = votes.max(axis=0)
    leading = accepted & (votes == top[None, :])
    trivial = leading & ~syndromes.any(axis=1)
    pick = np.where(trivial.any(axis=0)[None, :], trivial, leading)
    best = rounds - 1 - pick[::-1].argmax(axis=0)
    winner = syndromes[best, :, idx]
    winner[top == 0] = False
    return winner, top


def _decode_cat(cat: CatPlan, trace: Trace):
    """Inferred X pattern (length, trials) on the cat and its preparation-failure mask.

    The preparation fails when the winning syndrome is not the syndrome of the
    cat's actual X pattern at any point of the rounds, or when at least half of
    the cat qubits were hit by X.
    """
    length, trials = cat.length, trace.trials
    pattern = np.zeros((length, trials), dtype=bool)
    failed = np.zeros(trials, dtype=bool)
    if length < 2 or not cat.rounds:
        return pattern, failed

    syndromes, accepted = cat_history(cat, trace)
    snap_ids = [cat.rounds[0].start] + [rp.snapshot for rp in cat.rounds]
    snaps = np.stack([trace.snapshots[sid] for sid in snap_ids])
    active = np.flatnonzero(syndromes.any(axis=(0, 1)) | ~accepted.all(axis=0) | snaps.any(axis=(0, 1)))
    if active.size == 0:
        return pattern, failed

    winner, _ = winning_syndrome(syndromes[:, :, active], accepted[:, active])
    snaps = snaps[:, :, active]
    actual = snaps[:, :-1] ^ snaps[:, 1:]
    seen = (actual == winner.T[None]).all(axis=1).any(axis=0)
    heavy = snaps.any(axis=0).sum(axis=0) >= -(-length // 2)
    failed[active] = ~seen | heavy

    guess = np.zeros((length, active.size), dtype=bool)
    guess[1:] = np.logical_xor.accumulate(winner.T, axis=0)
    flip = 2 * guess.sum(axis=0) > length
    guess ^= flip[None, :]
    pattern[:, active] = guess
    return pattern, failed


def _majority(bits: np.ndarray, axis: int = 0) -> np.ndarray:
    return 2 * bits.sum(axis=axis) > bits.shape[axis]


def _parity(bits: np.ndarray, axis: int = 0) -> np.ndarray:
    return np.logical_xor.reduce(bits, axis=axis)


def _logical_bits(grid, x: np.ndarray, z: np.ndarray):
    """Ideal decoding of a block's error: X^L by row parities, Z^L by column parities."""
    grid = np.asarray(grid)
    rows = _parity(x[grid], axis=1)
    cols = _parity(z[grid], axis=0)
    return _majority(rows), _majority(cols)


def _classify(x_bit: np.ndarray, z_bit: np.ndarray, prep_failure: np.ndarray) -> np.ndarray:
    out = np.full(x_bit.shape, Classification.SUCCESS, dtype=np.int8)
    out[x_bit & ~z_bit] = Classification.LOGICAL_X
    out[z_bit & ~x_bit] = Classification.LOGICAL_Z
    out[x_bit & z_bit] = Classification.LOGICAL_Y
    out[prep_failure] = Classification.PREP_FAILURE
    return out


def decode(circuit: Circuit, trace: Trace) -> TrialOutcome:
    """Run the cat, row, logical-Z and logical-X decoders in circuit order and classify."""
    trials = trace.trials
    fx = np.zeros((circuit.n_qubits, trials), dtype=bool)
    fz = np.zeros_like(fx)
    prep_failure = np.zeros(trials, dtype=bool)
    decoded = {}

    for plan in circuit.plans:
        if isinstance(plan, CatPlan):
            _, failed = _decode_cat(plan, trace)
            prep_failure |= failed
        elif isinstance(plan, PlusPrepPlan):
            for column in plan.columns:
                pattern, failed = _decode_cat(column, trace)
                prep_failure |= failed
                fx[list(column.qubits)] ^= pattern
        elif isinstance(plan, ZMeasurementPlan):
            bits = np.zeros((len(plan.reps), len(plan.reps[0]), trials), dtype=bool)
            for a, rep in enumerate(plan.reps):
                for i, row in enumerate(rep):
                    pattern, failed = _decode_cat(row.cat, trace)
                    prep_failure |= failed
                    for k, targets in enumerate(row.cat.targets):
                        if targets:
                            fz[list(targets)] ^= pattern[k]
                    bits[a, i] = _parity(trace.flip(row.cat.measurements)) ^ _parity(fx[list(row.data)])
            decoded[plan.name] = _majority(_majority(bits, axis=0), axis=0)
        elif isinstance(plan, XMeasurementPlan):
            columns = np.stack(
                [
                    _parity(trace.flip(locs)) ^ _parity(fz[list(qubits)])
                    for locs, qubits in zip(plan.columns, plan.qubits)
                ]
            )
            decoded[plan.name] = _majority(columns)

    a_bit = b_bit = None
    kind = circuit.kind
    zero = np.zeros(trials, dtype=bool)
    if kind in (CircuitKind.CAT_PREP, CircuitKind.PLUS_PREP):
        # residual data errors of a preparation are charged to the gadget that consumes it
        x_bit, z_bit = zero, zero
    elif kind is CircuitKind.MX:
        x_bit, z_bit = zero, decoded["x"]
    elif kind in (CircuitKind.MZ_ROW, CircuitKind.MZZ, CircuitKind.MZZZ):
        x_bit, z_bit = decoded["z"], zero
    elif kind is CircuitKind.INJECTION:
        x_bit, z_bit = _logical_bits(circuit.blocks[1], trace.x ^ fx, trace.z ^ fz)
        x_bit = x_bit ^ decoded["zz"]
        z_bit = z_bit ^ decoded["mx_psi"]
    else:
        x_bit, z_bit, a_bit, b_bit = _cnot_logical(circuit, trace, fx, fz, decoded)

    return TrialOutcome(
        flip_bits=trace.flips,
        inferred_frame=PauliMask(fx, fz),
        actual_residual=PauliMask(trace.x, trace.z),
        classification=_classify(x_bit, z_bit, prep_failure),
        prep_failure=prep_failure,
        decoded=decoded,
        a_bit=a_bit,
        b_bit=b_bit,
    )


def _cnot_logical(circuit: Circuit, trace: Trace, fx, fz, decoded):
    roles = circuit.roles
    ex, ez = trace.x ^ fx, trace.z ^ fz
    ctrl_x, ctrl_z = _logical_bits(circuit.blocks[roles.ctrl_out], ex, ez)
    tgt_x, tgt_z = _logical_bits(circuit.blocks[roles.tgt_out], ex, ez)

    c, b = decoded["zz"], decoded["zzz"]
    x1, a = decoded["mx_ctrl"], decoded["mx_tgt"]
    ctrl_x = ctrl_x ^ c
    if roles.ctrl_out == roles.twice_measured:
        tgt_x = tgt_x ^ c
    tgt_x = tgt_x ^ b
    ctrl_z = ctrl_z ^ x1 ^ a
    tgt_z = tgt_z ^ a

    if trace.injected is not None:
        expect = CNOT_RULE[trace.injected]
        ctrl_x, ctrl_z = ctrl_x ^ bool(expect[0]), ctrl_z ^ bool(expect[1])
        tgt_x, tgt_z = tgt_x ^ bool(expect[2]), tgt_z ^ bool(expect[3])
    return ctrl_x | tgt_x, ctrl_z | tgt_z, a, b


def run_trials(circuit: Circuit, noise: NoiseParams, trials: int, rng, injected: Optional[str] = None):
    """Sample, propagate and decode `trials` trials in batches; returns per-class counts."""
    rng = np.random.default_rng(rng)
    counts = np.zeros(len(Classification), dtype=np.int64)
    done = 0
    while done < trials:
        size = min(BATCH_SIZE, trials - done)
        faults = sample_faults(circuit, noise, rng, size)
        outcome = decode(circuit, propagate(circuit, faults, injected))
        counts += outcome.counts()
        done += size
    return counts


def _run_blocks(kind: str, cfg: GadgetConfig, noise: NoiseParams, blocks: list) -> np.ndarray:
    """Counts over (size, seed) trial blocks, each drawn from its own generator."""
    circuit = build_circuit(kind, cfg)
    counts = np.zeros(len(Classification), dtype=np.int64)
    for size, seed in blocks:
        counts += run_trials(circuit, noise, size, seed)
    return counts


@dataclass(frozen=True)
class Estimate:
    kind: CircuitKind
    cfg: GadgetConfig
    noise: NoiseParams
    trials: int
    seed: int
    shards: int
    counts: dict
    p_fail: float
    ci95: tuple

    @property
    def failures(self) -> int:
        return self.trials - self.counts[Classification.SUCCESS.name]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "cfg": self.cfg.to_dict(),
            "noise": self.noise.to_dict(),
            "trials": self.trials,
            "seed": self.seed,
            "shards": self.shards,
            "counts": dict(self.counts),
            "p_fail": self.p_fail,
            "ci95": list(self.ci95),
        }


def confidence_interval(failures: int, trials: int) -> tuple:
    """Wilson score interval at 95% confidence."""
    ci = binomtest(int(failures), int(trials)).proportion_ci(confidence_level=CONFIDENCE, method="wilson")
    return (float(ci.low), float(ci.high))


def estimate(
    kind,
    cfg: GadgetConfig,
    noise: NoiseParams,
    trials: int,
    seed: int = 0,
    workers: int = 1,
    shards: int = DEFAULT_SHARDS,
    progress: bool = False,
) -> Estimate:
    """Failure-probability estimate; deterministic for a given seed.

    Trials are drawn in blocks of BATCH_SIZE, each from its own child of the
    seed, and the blocks are dealt out to shards, so the counts do not depend
    on the shard or worker count.
    """
    kind = CircuitKind(kind)
    if trials < 1:
        raise InvalidConfigError(f"trials must be >= 1, got {trials}")
    n_blocks = -(-trials // BATCH_SIZE)
    sizes = [min(BATCH_SIZE, trials - k * BATCH_SIZE) for k in range(n_blocks)]
    blocks = list(zip(sizes, np.random.SeedSequence(seed).spawn(n_blocks)))
    shards = max(1, min(shards, n_blocks))
    parts = [blocks[part[0] : part[-1] + 1] for part in np.array_split(np.arange(n_blocks), shards)]
    build_circuit(kind, cfg)
    logger.info("estimating %s %s over %d trials in %d shards", kind.value, cfg.key(), trials, shards)

    counts = np.zeros(len(Classification), dtype=np.int64)
    with tqdm(total=trials, disable=not progress, desc=kind.value) as bar:
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_run_blocks, kind.value, cfg, noise, part) for part in parts]
                for part, future in zip(parts, futures):
                    counts += future.result()
                    bar.update(sum(size for size, _ in part))
        else:
            for part in parts:
                counts += _run_blocks(kind.value, cfg, noise, part)
                bar.update(sum(size for size, _ in part))

    failures = int(trials - counts[Classification.SUCCESS])
    if failures == 0 and not any(noise.to_dict().values()):
        # no location can fail
        ci = (0.0, 0.0)
    else:
        ci = confidence_interval(failures, trials)
    return Estimate(
        kind=kind,
        cfg=cfg,
        noise=noise,
        trials=trials,
        seed=seed,
        shards=shards,
        counts={c.name: int(counts[c]) for c in Classification},
        p_fail=failures / trials,
        ci95=ci,
    )


def analytic_bound(kind, cfg: GadgetConfig, noise: NoiseParams) -> float:
    """Log of the closed-form bound matching the failure definition of `kind`."""
    kind = CircuitKind(kind)
    if kind is CircuitKind.CNOT:
        return cnot_bound(cfg, noise).total
    if kind is CircuitKind.INJECTION:
        return injection_bound(cfg, noise)
    if kind is CircuitKind.CAT_PREP:
        length = 2 * cfg.m if cfg.is_local else cfg.p
        return clamp_log(ancilla_prep_bound(length, cfg.r_prime, noise, cfg.locality))
    if kind is CircuitKind.PLUS_PREP:
        return plus_prep_bound(cfg, noise)
    plus = plus_prep_bound(cfg, noise)
    if kind is CircuitKind.MX:
        return clamp_log(log_add(mx_bound(cfg, noise), plus))
    if kind is CircuitKind.MZZ:
        return clamp_log(log_add(mzz_bound(cfg, noise), math.log(2) + plus, cat_prep_bound(cfg, noise, 2)))
    if kind is CircuitKind.MZZZ:
        return clamp_log(log_add(mzzz_bound(cfg, noise), math.log(3) + plus, cat_prep_bound(cfg, noise, 3)))
    raise InvalidConfigError(f"no closed-form bound covers the {kind.value} circuit")


@dataclass(frozen=True)
class BoundCheck:
    estimate: Estimate
    analytic: float
    verdict: Verdict
    bound_noise_scale: float = 1.0

    def to_dict(self) -> dict:
        return {
            "empirical": self.estimate.to_dict(),
            "analytic": format_log_probability(self.analytic),
            "bound_noise_scale": self.bound_noise_scale,
            "verdict": self.verdict.value,
        }


def check_bound(
    kind,
    cfg: GadgetConfig,
    noise: NoiseParams,
    trials: int,
    seed: int = 0,
    workers: int = 1,
    shards: int = DEFAULT_SHARDS,
    bound_noise_scale: float = 1.0,
    progress: bool = False,
) -> BoundCheck:
    """Compare the empirical upper confidence limit with the analytic bound.

    bound_noise_scale evaluates the bound at scaled rates while simulating at the
    given ones; values below 1 serve as a negative control.
    """
    analytic = analytic_bound(kind, cfg, noise.scaled(bound_noise_scale))
    result = estimate(kind, cfg, noise, trials, seed=seed, workers=workers, shards=shards, progress=progress)
    upheld = analytic >= 0.0 or result.ci95[1] <= math.exp(analytic)
    verdict = Verdict.UPHELD if upheld else Verdict.VIOLATED
    if not upheld:
        logger.warning(
            "bound violated for %s %s: upper limit %.3e > bound %.3e",
            result.kind.value,
            cfg.key(),
            result.ci95[1],
            math.exp(analytic),
        )
    return BoundCheck(result, analytic, verdict, bound_noise_scale)
