"""Explicit location lists for the cat-state, row, logical and CNOT gadgets.

Every circuit uses |+> preparations, CZ gates and X-basis measurements only.
Qubits are single-use wires: a check ancilla or cat qubit is a fresh qubit with
its own preparation. Locations are stored in insertion order, which is a valid
time order; the layer of a location is one past the latest layer of its
operands.
"""

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property, lru_cache
from typing import NamedTuple, Optional

import numpy as np

from bacon_shor_ft.bounds import GadgetConfig, Variant
from bacon_shor_ft.noise import InvalidConfigError, LocationClass

logger = logging.getLogger(__name__)

# storage steps per data qubit and per syndrome round while a Local cat is built
DATA_WAIT_STEPS = 8
CAT_WAIT_STEPS = 4

_DUMP_NAMES = {
    LocationClass.PREP_PLUS: "PREP",
    LocationClass.CZ: "CZ",
    LocationClass.MEAS_X: "MEASX",
    LocationClass.WAIT: "WAIT",
}


class CircuitKind(Enum):
    CAT_PREP = "catprep"
    MZ_ROW = "mzrow"
    MX = "mx"
    MZZ = "mzz"
    MZZZ = "mzzz"
    PLUS_PREP = "plusprep"
    CNOT = "cnot"
    INJECTION = "injection"


class Role(Enum):
    DATA = "data"
    CAT = "cat"
    CHECK = "check"
    PSI = "psi"


class Frame(Enum):
    """Pauli applied by the frame when a cat qubit is inferred to carry an X error."""

    Z_ON_TARGETS = "z"
    X_ON_SELF = "x"


ZZ_BLOCKS = (1, 2)
ZZZ_BLOCKS = (2, 3, 4)


class CnotRoles(NamedTuple):
    ctrl_in: int
    ctrl_out: int
    tgt_in: int
    tgt_out: int

    @property
    def twice_measured(self) -> int:
        """The block that takes part in both the ZZ and the ZZZ measurement."""
        (shared,) = set(ZZ_BLOCKS) & set(ZZZ_BLOCKS)
        return shared

    @property
    def inputs(self) -> tuple:
        return (self.ctrl_in, self.tgt_in)

    @property
    def outputs(self) -> tuple:
        return (self.ctrl_out, self.tgt_out)

VARIANT_ROLES = {
    Variant.A: CnotRoles(ctrl_in=2, ctrl_out=1, tgt_in=3, tgt_out=4),
    Variant.B: CnotRoles(ctrl_in=1, ctrl_out=2, tgt_in=3, tgt_out=4),
    Variant.C: CnotRoles(ctrl_in=2, ctrl_out=1, tgt_in=4, tgt_out=3),
    Variant.D: CnotRoles(ctrl_in=1, ctrl_out=2, tgt_in=4, tgt_out=3),
}


@dataclass(frozen=True)
class Qubit:
    index: int
    role: Role
    block: Optional[int] = None
    row: Optional[int] = None
    col: Optional[int] = None
    site: Optional[tuple] = None
    # belongs to the exposure left by a preceding gadget
    context: bool = False


@dataclass(frozen=True)
class Location:
    kind: LocationClass
    qubits: tuple
    layer: int
    tag: str = ""
    context: bool = False


@dataclass(frozen=True)
class RoundPlan:
    """Location indices of one syndrome round's check measurements.

    snapshot records the cat's X pattern after the round; the first round also
    records it before any check runs (start).
    """

    checks: tuple
    wrap: Optional[int]
    snapshot: int
    start: Optional[int] = None


@dataclass(frozen=True)
class CatPlan:
    qubits: tuple
    rounds: tuple
    # per cat qubit, the qubits its X error lands on
    targets: tuple
    frame: Frame
    measurements: tuple = ()
    name: str = ""

    @property
    def length(self) -> int:
        return len(self.qubits)


@dataclass(frozen=True)
class RowPlan:
    cat: CatPlan
    data: tuple


@dataclass(frozen=True)
class ZMeasurementPlan:
    """r repetitions of a row-by-row Z-type measurement; reps[a][i] is row i of repetition a."""

    name: str
    blocks: tuple
    reps: tuple


@dataclass(frozen=True)
class XMeasurementPlan:
    name: str
    block: Optional[int]
    # per column, measurement location indices and the measured qubits
    columns: tuple
    qubits: tuple


@dataclass(frozen=True)
class PlusPrepPlan:
    name: str
    block: int
    columns: tuple


@dataclass(frozen=True, eq=False)
class Circuit:
    kind: CircuitKind
    cfg: GadgetConfig
    qubits: tuple
    locations: tuple
    # (index of the location after which to record, cat qubits)
    snapshots: tuple
    plans: tuple
    blocks: dict = field(default_factory=dict)
    roles: Optional[CnotRoles] = None
    inject_at: Optional[int] = None
    physical_qubits: int = 0

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    def plan(self, name: str):
        for plan in self.plans:
            if plan.name == name:
                return plan
        raise KeyError(name)

    def tally(self, include_context: bool = False) -> Counter:
        """Locations per class; the preceding gadget's exposure is left out unless asked for."""
        counts = Counter({kind: 0 for kind in LocationClass})
        counts.update(loc.kind for loc in self.locations if include_context or not loc.context)
        return counts

    def layers(self) -> list:
        by_layer = defaultdict(list)
        for loc in self.locations:
            by_layer[loc.layer].append(loc)
        return [by_layer[k] for k in sorted(by_layer)]

    def dump(self) -> str:
        """One layer per line, locations as KIND(q1[,q2]) in insertion order."""
        lines = []
        for layer in self.layers():
            lines.append(
                " ".join(f"{_DUMP_NAMES[loc.kind]}({','.join(map(str, loc.qubits))})" for loc in layer)
            )
        return "\n".join(lines) + "\n"

    def non_adjacent_gates(self) -> list:
        """CZ locations whose operands are not lattice neighbours; empty for Nonlocal circuits."""
        out = []
        for i, loc in enumerate(self.locations):
            if loc.kind is not LocationClass.CZ:
                continue
            a, b = (self.qubits[q].site for q in loc.qubits)
            if a is None or b is None:
                continue
            if abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1:
                out.append(i)
        return out

    @cached_property
    def kinds(self) -> np.ndarray:
        order = list(LocationClass)
        return np.array([order.index(loc.kind) for loc in self.locations], dtype=np.int8)

    @cached_property
    def operands(self) -> np.ndarray:
        """(locations, 2) operand table, second column -1 for one-qubit locations."""
        table = np.full((len(self.locations), 2), -1, dtype=np.int64)
        for i, loc in enumerate(self.locations):
            table[i, : len(loc.qubits)] = loc.qubits
        return table


class CircuitBuilder:
    """Accumulates qubits, locations and decode plans for one circuit."""

    def __init__(self, cfg: GadgetConfig, kind: CircuitKind):
        self.cfg = cfg
        self.kind = kind
        self.local = cfg.is_local
        self.qubits = []
        self.locations = []
        self.snapshots = []
        self.plans = []
        self._last_layer = []
        self._tag = ""
        self.context = False
        self._kept = set()

    def qubit(self, role: Role, **where) -> int:
        index = len(self.qubits)
        site = where.pop("site", None)
        if not self.local:
            site = None
        self.qubits.append(Qubit(index, role, site=site, context=self.context, **where))
        self._last_layer.append(-1)
        return index

    def add(self, kind: LocationClass, *qubits: int, not_before: int = 0) -> int:
        layer = max(max(self._last_layer[q] for q in qubits) + 1, not_before)
        for q in qubits:
            self._last_layer[q] = layer
        self.locations.append(Location(kind, tuple(qubits), layer, self._tag, self.context))
        return len(self.locations) - 1

    def prep(self, role: Role, **where) -> int:
        q = self.qubit(role, **where)
        self.add(LocationClass.PREP_PLUS, q)
        return q

    def keep(self, grid):
        """Count a context block's data qubits as part of the gadget's footprint."""
        self._kept.update(q for row in grid for q in row)

    def wait(self, q: int, steps: int):
        for _ in range(steps):
            self.add(LocationClass.WAIT, q)

    def site(self, q: int):
        return self.qubits[q].site

    def _below(self, q: int):
        site = self.site(q)
        return None if site is None else (site[0] + 1, site[1])

    def _between(self, a: int, b: int):
        sa, sb = self.site(a), self.site(b)
        if sa is None or sb is None:
            return None
        return ((sa[0] + sb[0]) // 2, (sa[1] + sb[1]) // 2)

    def check(self, a: int, b: int) -> int:
        """Measure Z_a Z_b with a fresh ancilla; returns the measurement location."""
        anc = self.prep(Role.CHECK, site=self._between(a, b))
        self.add(LocationClass.CZ, anc, a)
        self.add(LocationClass.CZ, anc, b)
        return self.add(LocationClass.MEAS_X, anc)

    def snapshot(self, cat: tuple) -> int:
        self.snapshots.append((len(self.locations) - 1, tuple(cat)))
        return len(self.snapshots) - 1

    def cat_rounds(self, cat: tuple, rounds: int) -> tuple:
        length = len(cat)
        out = []
        start = self.snapshot(cat)
        for k in range(rounds):
            chain = tuple(self.check(cat[i], cat[i + 1]) for i in range(length - 1))
            wrap = None
            if not self.local and length >= 2:
                wrap = self.check(cat[0], cat[-1])
            if self.local:
                for q in cat:
                    self.wait(q, CAT_WAIT_STEPS)
            out.append(RoundPlan(chain, wrap, self.snapshot(cat), start if k == 0 else None))
        return tuple(out)

    def cat_length(self, blocks: int) -> int:
        width = blocks * self.cfg.m
        return width if self.local else min(self.cfg.p, width)

    def measure_row(
        self,
        data: list,
        positions: list,
        length: int,
        data_waits: bool = True,
        lead: Optional[int] = None,
    ) -> RowPlan:
        """Measure the product of Z over `data` with a length-`length` cat.

        positions[k] = (block offset, column) of data[k] and fixes which cat
        qubit touches it. With `lead` set, the cat touches that block offset
        first and the remaining blocks from the following layer on.
        """
        m = self.cfg.m
        if self.local:
            cat = tuple(self.prep(Role.CAT, site=self._below(d)) for d in data)
        else:
            cat = tuple(self.prep(Role.CAT) for _ in range(length))
        owner = [
            (b * m + j) % length if length >= m else j % length for b, j in positions
        ]
        targets = [[] for _ in range(length)]
        for d, k in zip(data, owner):
            targets[k].append(d)

        rounds = ()
        if self.local:
            rounds = self.cat_rounds(cat, self.cfg.r_prime)
            if data_waits:
                for d in data:
                    self.wait(d, DATA_WAIT_STEPS * self.cfg.r_prime)
        pairs = list(zip(data, owner, positions))
        if lead is None:
            for d, k, _ in pairs:
                self.add(LocationClass.CZ, cat[k], d)
        else:
            first = [self.add(LocationClass.CZ, cat[k], d) for d, k, (b, _) in pairs if b == lead]
            after = max(self.locations[i].layer for i in first) + 1
            for d, k, (b, _) in pairs:
                if b != lead:
                    self.add(LocationClass.CZ, cat[k], d, not_before=after)
        if not self.local:
            rounds = self.cat_rounds(cat, self.cfg.r_prime)
        measurements = tuple(self.add(LocationClass.MEAS_X, q) for q in cat)
        plan = CatPlan(cat, rounds, tuple(map(tuple, targets)), Frame.Z_ON_TARGETS, measurements)
        return RowPlan(plan, tuple(data))

    def measure_z_rep(self, grids: list, lead: Optional[int] = None) -> tuple:
        """One repetition of a Z-type measurement across the given blocks, row by row."""
        length = self.cat_length(len(grids))
        rows = []
        for i in range(self.cfg.n):
            data = [grid[i][j] for grid in grids for j in range(self.cfg.m)]
            positions = [(b, j) for b in range(len(grids)) for j in range(self.cfg.m)]
            rows.append(self.measure_row(data, positions, length, lead=lead))
        return tuple(rows)

    def measure_z(self, name: str, grids: list, blocks: tuple) -> ZMeasurementPlan:
        self._tag = name
        reps = tuple(self.measure_z_rep(grids) for _ in range(self.cfg.r))
        plan = ZMeasurementPlan(name, tuple(blocks), reps)
        self.plans.append(plan)
        return plan

    def measure_x(self, name: str, grid, block: Optional[int]) -> XMeasurementPlan:
        self._tag = name
        n_rows, n_cols = len(grid), len(grid[0])
        locs = [[self.add(LocationClass.MEAS_X, grid[i][j]) for j in range(n_cols)] for i in range(n_rows)]
        plan = XMeasurementPlan(
            name,
            block,
            tuple(tuple(locs[i][j] for i in range(n_rows)) for j in range(n_cols)),
            tuple(tuple(grid[i][j] for i in range(n_rows)) for j in range(n_cols)),
        )
        self.plans.append(plan)
        return plan

    def plus_prep(self, name: str, block: int, position: int) -> tuple:
        """Prepare |+>^L on a fresh block; returns the n x m grid of data qubits."""
        self._tag = name
        n, m = self.cfg.n, self.cfg.m
        grid = tuple(
            tuple(
                self.prep(Role.DATA, block=block, row=i, col=j, site=(2 * i, 2 * m * position + 2 * j))
                for j in range(m)
            )
            for i in range(n)
        )
        columns = []
        for j in range(m):
            cat = tuple(grid[i][j] for i in range(n))
            rounds = self.cat_rounds(cat, self.cfg.r_plus)
            columns.append(CatPlan(cat, rounds, tuple((q,) for q in cat), Frame.X_ON_SELF))
        self.plans.append(PlusPrepPlan(name, block, tuple(columns)))
        return grid

    def bare_block(self, position: int) -> tuple:
        """n x m freshly prepared data qubits with no column checks and no block number."""
        self._tag = "partner"
        n, m = self.cfg.n, self.cfg.m
        return tuple(
            tuple(
                self.prep(Role.DATA, row=i, col=j, site=(2 * i, 2 * m * position + 2 * j))
                for j in range(m)
            )
            for i in range(n)
        )

    def footprint(self) -> list:
        return [q for q in self.qubits if not q.context or q.index in self._kept]

    def occupied_sites(self) -> int:
        return len({q.site for q in self.footprint() if q.site is not None})

    def build(self, **extra) -> Circuit:
        physical = self.occupied_sites() if self.local else len(self.footprint())
        circuit = Circuit(
            kind=self.kind,
            cfg=self.cfg,
            qubits=tuple(self.qubits),
            locations=tuple(self.locations),
            snapshots=tuple(self.snapshots),
            plans=tuple(self.plans),
            physical_qubits=physical,
            **extra,
        )
        logger.debug(
            "built %s circuit %s: %d qubits, %d locations, %d layers",
            self.kind.value,
            self.cfg.key(),
            circuit.n_qubits,
            len(circuit.locations),
            len(circuit.layers()),
        )
        return circuit


def _build_cat_prep(builder: CircuitBuilder) -> Circuit:
    length = builder.cat_length(2) if builder.local else builder.cfg.p
    builder._tag = "cat"
    cat = tuple(builder.prep(Role.CAT, site=(1, 2 * k)) for k in range(length))
    rounds = builder.cat_rounds(cat, builder.cfg.r_prime)
    builder.plans.append(CatPlan(cat, rounds, tuple(() for _ in cat), Frame.Z_ON_TARGETS, name="cat"))
    return builder.build()


def _build_mz_row(builder: CircuitBuilder) -> Circuit:
    m = builder.cfg.m
    builder._tag = "row"
    row = [builder.prep(Role.DATA, block=1, row=0, col=j, site=(0, 2 * j)) for j in range(m)]
    length = builder.cat_length(1)
    reps = tuple(
        (builder.measure_row(row, [(0, j) for j in range(m)], length),) for _ in range(builder.cfg.r)
    )
    builder.plans.append(ZMeasurementPlan("z", (1,), reps))
    return builder.build(blocks={1: (tuple(row),)})


def _build_mx(builder: CircuitBuilder) -> Circuit:
    grid = builder.plus_prep("plus", 1, 0)
    builder.measure_x("x", grid, 1)
    return builder.build(blocks={1: grid})


def _build_plus_prep(builder: CircuitBuilder) -> Circuit:
    grid = builder.plus_prep("plus", 1, 0)
    return builder.build(blocks={1: grid})


def _build_z_type(builder: CircuitBuilder, n_blocks: int) -> Circuit:
    numbers = tuple(range(1, n_blocks + 1))
    grids = {b: builder.plus_prep(f"plus_{b}", b, b - 1) for b in numbers}
    builder.measure_z("z", [grids[b] for b in numbers], numbers)
    return builder.build(blocks=grids)


def _lead(builder: CircuitBuilder, offset: int) -> Optional[int]:
    # staggered ZZ ancillas only exist in the Nonlocal schedule
    return None if builder.local else offset


def _prior_exposure(builder: CircuitBuilder, block: int, grid: tuple, side: int):
    """Expose `block` to the ZZ and ZZZ measurements of the gadget that produced it.

    The block plays the twice-measured part; its partners are bare blocks laid
    out next to it on `side`.
    """
    near = builder.bare_block(block - 1 + side)
    far = builder.bare_block(block - 1 + 2 * side)
    zz = [near, grid] if side < 0 else [grid, near]
    zzz = [far, near, grid] if side < 0 else [grid, near, far]
    zz_lead = _lead(builder, zz.index(grid))
    zz_reps, zzz_reps = [], []
    for _ in range(builder.cfg.r):
        builder._tag = f"prior_zz_{block}"
        zz_reps.append(builder.measure_z_rep(zz, lead=zz_lead))
        builder._tag = f"prior_zzz_{block}"
        zzz_reps.append(builder.measure_z_rep(zzz))
    builder.plans.append(ZMeasurementPlan(f"prior_zz_{block}", (block,), tuple(zz_reps)))
    builder.plans.append(ZMeasurementPlan(f"prior_zzz_{block}", (block,), tuple(zzz_reps)))


def _build_cnot(builder: CircuitBuilder) -> Circuit:
    cfg = builder.cfg
    roles = VARIANT_ROLES[cfg.variant]
    grids = {}
    builder.context = True
    for b in roles.inputs:
        grids[b] = builder.plus_prep(f"prior_plus_{b}", b, b - 1)
        builder.keep(grids[b])
    for b in roles.inputs:
        _prior_exposure(builder, b, grids[b], -1 if b == min(roles.inputs) else 1)
    builder.context = False
    inject_at = len(builder.locations)

    for b in roles.outputs:
        grids[b] = builder.plus_prep(f"plus_{b}", b, b - 1)
    zz_lead = _lead(builder, ZZ_BLOCKS.index(roles.twice_measured))
    zz_reps, zzz_reps = [], []
    for _ in range(cfg.r):
        builder._tag = "zz"
        zz_reps.append(builder.measure_z_rep([grids[b] for b in ZZ_BLOCKS], lead=zz_lead))
        builder._tag = "zzz"
        zzz_reps.append(builder.measure_z_rep([grids[b] for b in ZZZ_BLOCKS]))
    builder.plans.append(ZMeasurementPlan("zz", ZZ_BLOCKS, tuple(zz_reps)))
    builder.plans.append(ZMeasurementPlan("zzz", ZZZ_BLOCKS, tuple(zzz_reps)))
    builder.measure_x("mx_ctrl", grids[roles.ctrl_in], roles.ctrl_in)
    builder.measure_x("mx_tgt", grids[roles.tgt_in], roles.tgt_in)
    return builder.build(blocks=grids, roles=roles, inject_at=inject_at)


def _build_injection(builder: CircuitBuilder) -> Circuit:
    cfg = builder.cfg
    m = cfg.m
    grid = builder.plus_prep("plus", 1, 0)
    builder._tag = "inject"
    psi = builder.prep(Role.PSI, block=1, row=0, col=m, site=(0, 2 * m))
    data = list(grid[0]) + [psi]
    positions = [(0, j) for j in range(m + 1)]
    reps = tuple(
        (builder.measure_row(data, positions, m + 1, data_waits=a >= 1),) for a in range(cfg.r)
    )
    builder.plans.append(ZMeasurementPlan("zz", (1,), reps))
    builder.measure_x("mx_psi", ((psi,),), None)
    return builder.build(blocks={1: grid})


_BUILDERS = {
    CircuitKind.CAT_PREP: _build_cat_prep,
    CircuitKind.MZ_ROW: _build_mz_row,
    CircuitKind.MX: _build_mx,
    CircuitKind.MZZ: lambda b: _build_z_type(b, 2),
    CircuitKind.MZZZ: lambda b: _build_z_type(b, 3),
    CircuitKind.PLUS_PREP: _build_plus_prep,
    CircuitKind.CNOT: _build_cnot,
    CircuitKind.INJECTION: _build_injection,
}


@lru_cache(maxsize=64)
def build_circuit(kind, cfg: GadgetConfig) -> Circuit:
    """Build the circuit of `kind` for `cfg`. Circuits are immutable and cached."""
    try:
        kind = CircuitKind(kind)
    except ValueError as exc:
        raise InvalidConfigError(f"unknown circuit kind {kind!r}") from exc
    if not isinstance(cfg, GadgetConfig):
        raise InvalidConfigError(f"expected a GadgetConfig, got {type(cfg).__name__}")
    return _BUILDERS[kind](CircuitBuilder(cfg, kind))
