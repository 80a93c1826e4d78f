from collections import Counter, defaultdict
from pathlib import Path

import pytest

from bacon_shor_ft.bounds import GadgetConfig, Locality, Variant
from bacon_shor_ft.circuits import (
    DATA_WAIT_STEPS,
    VARIANT_ROLES,
    ZZ_BLOCKS,
    ZZZ_BLOCKS,
    CircuitKind,
    build_circuit,
)
from bacon_shor_ft.noise import InvalidConfigError, LocationClass
from bacon_shor_ft.optimize import cnot_cz_count, count_resources

FIXTURES = Path(__file__).parent / "fixtures"


def test_cat_prep_dump_matches_golden_file():
    cfg = GadgetConfig(n=1, m=1, p=2, r=1, r_prime=1, r_plus=1)
    circuit = build_circuit(CircuitKind.CAT_PREP, cfg)
    assert circuit.dump() == (FIXTURES / "catprep_p2_r1_nonlocal.txt").read_text()


def test_unit_cnot_counts(unit_cfg):
    counts = count_resources(unit_cfg)
    # two output preps, one ZZ and one ZZZ cat qubit, two X measurements of the inputs
    assert counts.cz_gates == 5
    assert counts.preps == 4
    assert counts.measurements == 4
    assert counts.wait_steps == 0
    assert counts.physical_qubits == 6


@pytest.mark.parametrize(
    "params",
    [
        dict(n=1, m=1, p=1, r=1, r_prime=1, r_plus=1),
        dict(n=1, m=3, p=3, r=1, r_prime=2, r_plus=1),
        dict(n=3, m=3, p=2, r=3, r_prime=2, r_plus=2),
        dict(n=3, m=5, p=15, r=1, r_prime=3, r_plus=2),
        dict(n=3, m=3, p=9, r=1, r_prime=2, r_plus=3, locality="local"),
        dict(n=1, m=5, p=15, r=3, r_prime=1, r_plus=1, locality="local"),
    ],
)
def test_closed_form_cz_count_matches_circuit(params):
    cfg = GadgetConfig(**params)
    expected = cnot_cz_count(cfg.n, cfg.m, cfg.p, cfg.r, cfg.r_prime, cfg.r_plus, cfg.is_local)
    assert count_resources(cfg).cz_gates == int(expected)


@pytest.mark.parametrize("locality", ["nonlocal", "local"])
def test_variants_have_equal_tallies(locality):
    tallies = [
        build_circuit(
            CircuitKind.CNOT,
            GadgetConfig(n=1, m=3, p=3, r=1, r_prime=1, r_plus=1, locality=locality, variant=v),
        ).tally()
        for v in Variant
    ]
    assert all(t == tallies[0] for t in tallies[1:])


def test_nonlocal_circuits_have_no_waits(small_cfg):
    for kind in CircuitKind:
        assert build_circuit(kind, small_cfg).tally()[LocationClass.WAIT] == 0


def test_local_row_waits(local_cfg):
    circuit = build_circuit(CircuitKind.MZ_ROW, local_cfg)
    # three cat qubits wait 4 steps per round, three data qubits wait 8 steps per round
    assert circuit.tally()[LocationClass.WAIT] == 3 * 4 + 3 * DATA_WAIT_STEPS


@pytest.mark.parametrize("kind", [CircuitKind.MZZ, CircuitKind.MZZZ, CircuitKind.CNOT, CircuitKind.MX])
@pytest.mark.parametrize("n", [1, 3])
def test_local_gates_are_nearest_neighbour(kind, n):
    cfg = GadgetConfig(n=n, m=3, p=9, r=1, r_prime=2, r_plus=2, locality=Locality.LOCAL)
    assert build_circuit(kind, cfg).non_adjacent_gates() == []


@pytest.mark.parametrize("n, m", [(1, 3), (3, 3), (3, 5)])
def test_local_cnot_footprint(n, m):
    cfg = GadgetConfig(n=n, m=m, p=3 * m, r=1, r_prime=1, r_plus=1, locality=Locality.LOCAL)
    assert count_resources(cfg).physical_qubits == 12 * n * m - n


@pytest.mark.parametrize("kind", list(CircuitKind))
@pytest.mark.parametrize("locality", ["nonlocal", "local"])
def test_wires_are_prepared_once_and_used_in_order(kind, locality):
    cfg = GadgetConfig(n=3, m=3, p=2, r=1, r_prime=2, r_plus=1, locality=locality)
    circuit = build_circuit(kind, cfg)
    touches = defaultdict(list)
    for i, loc in enumerate(circuit.locations):
        for q in loc.qubits:
            touches[q].append(loc)
    assert set(touches) == set(range(circuit.n_qubits))
    for q, locs in touches.items():
        assert locs[0].kind is LocationClass.PREP_PLUS
        assert sum(loc.kind is LocationClass.PREP_PLUS for loc in locs) == 1
        measured = [k for k, loc in enumerate(locs) if loc.kind is LocationClass.MEAS_X]
        assert measured in ([], [len(locs) - 1])
        layers = [loc.layer for loc in locs]
        assert layers == sorted(set(layers))


@pytest.mark.parametrize("locality", ["nonlocal", "local"])
def test_no_qubit_twice_in_a_layer(locality):
    cfg = GadgetConfig(n=3, m=3, p=4, r=3, r_prime=2, r_plus=2, locality=locality)
    for layer in build_circuit(CircuitKind.CNOT, cfg).layers():
        used = [q for loc in layer for q in loc.qubits]
        assert len(used) == len(set(used))


def test_short_cat_assignment_wraps_columns():
    cfg = GadgetConfig(n=1, m=3, p=2, r=1, r_prime=1, r_plus=1)
    circuit = build_circuit(CircuitKind.MZZ, cfg)
    row = circuit.plan("z").reps[0][0]
    first, second = circuit.blocks[1][0], circuit.blocks[2][0]
    assert row.cat.length == 2
    assert row.cat.targets == (
        (first[0], first[2], second[0], second[2]),
        (first[1], second[1]),
    )


def test_long_cat_touches_one_data_qubit_each():
    cfg = GadgetConfig(n=1, m=3, p=6, r=1, r_prime=1, r_plus=1)
    row = build_circuit(CircuitKind.MZZ, cfg).plan("z").reps[0][0]
    assert row.cat.length == 6
    assert all(len(t) == 1 for t in row.cat.targets)


def test_nonlocal_cat_has_wrap_check():
    cfg = GadgetConfig(n=1, m=3, p=3, r=1, r_prime=2, r_plus=1)
    cat = build_circuit(CircuitKind.CAT_PREP, cfg).plan("cat")
    assert cat.length == 3
    assert len(cat.rounds) == 2
    assert all(len(rnd.checks) == 2 and rnd.wrap is not None for rnd in cat.rounds)


def test_local_cat_has_no_wrap(local_cfg):
    cat = build_circuit(CircuitKind.CAT_PREP, local_cfg).plan("cat")
    assert cat.length == 6
    assert all(rnd.wrap is None for rnd in cat.rounds)


def test_injection_round_count():
    cfg = GadgetConfig(n=1, m=3, p=3, r=3, r_prime=1, r_plus=1)
    circuit = build_circuit(CircuitKind.INJECTION, cfg)
    assert len(circuit.plan("zz").reps) == 3
    assert circuit.plan("zz").reps[0][0].cat.length == 4


def test_cnot_exposes_inputs_before_injection(unit_cfg):
    circuit = build_circuit(CircuitKind.CNOT, unit_cfg)
    assert 0 < circuit.inject_at < len(circuit.locations)
    before = {q for loc in circuit.locations[: circuit.inject_at] for q in loc.qubits}
    roles = circuit.roles
    assert circuit.blocks[roles.ctrl_in][0][0] in before
    assert circuit.blocks[roles.tgt_out][0][0] not in before


def test_circuits_are_cached(small_cfg):
    assert build_circuit(CircuitKind.CNOT, small_cfg) is build_circuit(CircuitKind.CNOT, small_cfg)
    assert build_circuit("cnot", small_cfg).tally() == build_circuit(CircuitKind.CNOT, small_cfg).tally()


def test_unknown_kind_is_rejected(small_cfg):
    with pytest.raises(InvalidConfigError):
        build_circuit("teleport", small_cfg)


def _cz_layers(circuit, cat, data):
    data = set(data)
    return [
        loc.layer
        for loc in circuit.locations
        if loc.kind is LocationClass.CZ
        and loc.qubits[0] in cat.qubits
        and loc.qubits[1] in data
    ]


@pytest.mark.parametrize("p", [3, 9])
@pytest.mark.parametrize("variant", list(Variant))
def test_nonlocal_zz_ancilla_touches_shared_block_first(p, variant):
    cfg = GadgetConfig(n=3, m=3, p=p, r=3, r_prime=1, r_plus=1, variant=variant)
    circuit = build_circuit(CircuitKind.CNOT, cfg)
    shared = circuit.roles.twice_measured
    (other,) = set(ZZ_BLOCKS) - {shared}
    shared_data = [q for row in circuit.blocks[shared] for q in row]
    other_data = [q for row in circuit.blocks[other] for q in row]
    for rep in circuit.plan("zz").reps:
        for row in rep:
            first = _cz_layers(circuit, row.cat, shared_data)
            second = _cz_layers(circuit, row.cat, other_data)
            assert len(first) == len(second) == cfg.m
            assert max(first) < min(second)


def test_cnot_roles_share_one_block_between_measurements():
    for roles in VARIANT_ROLES.values():
        assert roles.twice_measured == 2
        assert roles.twice_measured in ZZ_BLOCKS
        assert roles.twice_measured in ZZZ_BLOCKS
        assert sorted(roles.inputs + roles.outputs) == [1, 2, 3, 4]


@pytest.mark.parametrize("locality", ["nonlocal", "local"])
def test_prior_exposure_is_a_zz_and_a_zzz_measurement_per_input(locality):
    cfg = GadgetConfig(n=3, m=3, p=5, r=3, r_prime=2, r_plus=1, locality=locality)
    circuit = build_circuit(CircuitKind.CNOT, cfg)
    for b in circuit.roles.inputs:
        zz, zzz = circuit.plan(f"prior_zz_{b}"), circuit.plan(f"prior_zzz_{b}")
        assert len(zz.reps) == len(zzz.reps) == cfg.r
        assert zz.reps[0][0].cat.length == (6 if cfg.is_local else 5)
        assert zzz.reps[0][0].cat.length == (9 if cfg.is_local else 5)
        block = {q for row in circuit.blocks[b] for q in row}
        assert sum(d in block for d in zz.reps[0][0].data) == cfg.m
        assert sum(d in block for d in zzz.reps[0][0].data) == cfg.m
    exposure = circuit.locations[: circuit.inject_at]
    assert all(loc.context for loc in exposure)
    assert not any(loc.context for loc in circuit.locations[circuit.inject_at :])


def test_prior_exposure_is_not_billed(small_cfg):
    circuit = build_circuit(CircuitKind.CNOT, small_cfg)
    full = circuit.tally(include_context=True)
    own = circuit.tally()
    exposure = Counter(loc.kind for loc in circuit.locations[: circuit.inject_at])
    for kind in LocationClass:
        assert full[kind] == own[kind] + exposure[kind]
    assert count_resources(small_cfg).cz_gates == own[LocationClass.CZ]
