import numpy as np
import pytest

from opnet.core.sequential import (
    circuit_probability_sequential,
    compose_parallel,
    compose_sequential,
    deterministic_measure,
    joint_probability,
    state_effect_probability,
    update_operation,
    validate_operation,
)
from opnet.errors import LayoutError, NullCompositionError, NullUpdateError
from opnet.models.operations import (
    EffectPair,
    KrausSet,
    SequentialOperation,
    StatePair,
    UpdateKernel,
)
from tests.conftest import (
    random_circuit,
    random_density,
    random_instrument,
    random_measurement,
    random_preparation,
)


def test_born_rule(rng):
    for d in (2, 3, 4):
        rho = random_density(d, rng)
        meas = random_measurement(d, 3, rng)
        prep = SequentialOperation.preparation({"0": rho})
        dist = joint_probability(prep, meas)
        for label, effect in meas.effects().items():
            assert abs(dist[("0", label)] - np.real(np.trace(rho @ effect))) < 1e-12


def test_joint_probability_normalizes_generalized_operations(rng):
    prep = random_preparation(3, 2, rng)
    meas = random_measurement(3, 2, rng, standard=False)
    dist = joint_probability(prep, meas)
    assert sum(p for _, p in dist.items()) == pytest.approx(1.0)
    states, effects = prep.states(), meas.effects()
    total = np.real(np.trace(sum(states.values()) @ sum(effects.values())))
    expected = np.real(np.trace(states["1"] @ effects["0"])) / total
    assert dist[("1", "0")] == pytest.approx(expected, abs=1e-12)


def test_joint_probability_null_event():
    prep = SequentialOperation.preparation({"0": np.diag([1.0, 0.0])})
    meas = SequentialOperation.measurement({"1": np.diag([0.0, 2.0])})
    with pytest.raises(NullCompositionError, match="null event"):
        joint_probability(prep, meas)


def test_joint_probability_dimension_mismatch(rng):
    with pytest.raises(LayoutError):
        joint_probability(random_preparation(2, 1, rng), random_measurement(3, 2, rng))


def test_state_effect_probability():
    s = StatePair(np.diag([0.5, 0.0]), np.diag([0.5, 0.5]))
    e = EffectPair(np.diag([1.0, 0.0]), np.eye(2))
    assert state_effect_probability(s, e) == pytest.approx(0.5)
    orthogonal = StatePair.deterministic(np.diag([0.0, 1.0]))
    only_zero = EffectPair.deterministic(np.diag([2.0, 0.0]))
    assert state_effect_probability(orthogonal, only_zero) == 0.0


def test_compose_sequential_matches_circuit(rng):
    prep, (m, n), meas = random_circuit(rng, [2, 3, 2])
    composed = compose_sequential(m, n)
    assert composed.labels == ("0|0", "0|1", "1|0", "1|1")
    assert composed.normalization() == pytest.approx(1.0)
    direct = circuit_probability_sequential(prep, [m, n], meas)
    merged = circuit_probability_sequential(prep, [composed], meas)
    assert merged[("1", "0|1", "1")] == pytest.approx(direct[("1", "0", "1", "1")], abs=1e-12)


def test_compose_sequential_is_associative(rng):
    a = random_instrument(2, 2, 2, rng, "A", "B")
    b = random_instrument(2, 2, 2, rng, "B", "C")
    c = random_instrument(2, 2, 2, rng, "C", "D")
    left = compose_sequential(compose_sequential(a, b), c)
    right = compose_sequential(a, compose_sequential(b, c))
    assert left.labels == right.labels
    for (_, x), (_, y) in zip(left.outcomes, right.outcomes):
        assert np.allclose(x.choi(), y.choi(), atol=1e-12)


def test_compose_sequential_null():
    prep = SequentialOperation.preparation({"0": np.diag([1.0, 0.0])})
    meas = SequentialOperation.measurement({"1": np.diag([0.0, 2.0])})
    with pytest.raises(NullCompositionError):
        compose_sequential(prep, meas)


def test_compose_parallel_primes_clashing_ids(rng):
    m = random_instrument(2, 2, 2, rng, "A", "B")
    n = random_instrument(2, 2, 1, rng, "A", "B")
    both = compose_parallel(m, n)
    assert both.input_layout.ids == ("A", "A'")
    assert both.output_layout.ids == ("B", "B'")
    assert both.normalization() == pytest.approx(1.0)
    rho, sigma = random_density(2, rng), random_density(2, rng)
    expected = np.kron(m.outcome("1").apply(rho), n.outcome("0").apply(sigma))
    assert np.allclose(both.outcome("1|0").apply(np.kron(rho, sigma)), expected)


def test_compose_parallel_near_null():
    faint = SequentialOperation.instrument({"0": [1e-8 * np.eye(2)]})
    with pytest.raises(NullCompositionError):
        compose_parallel(faint, SequentialOperation.identity(2))


def test_deterministic_measure(rng):
    meas = random_measurement(2, 2, rng)
    rho = random_density(2, rng)
    dist = deterministic_measure(rho, meas)
    assert dist["0"] == pytest.approx(np.real(np.trace(rho @ meas.effects()["0"])))
    null = deterministic_measure(
        np.diag([1.0, 0.0]), SequentialOperation.measurement({"1": np.diag([0.0, 2.0])})
    )
    assert null.null


def test_update_coarse_grain_equals_total(rng):
    op = random_instrument(2, 2, 3, rng)
    coarse = update_operation(op, UpdateKernel.coarse_grain(op.labels))
    assert coarse.labels == ("e",)
    assert np.allclose(coarse.outcome("e").choi(), op.total().choi())


def test_update_identity_is_noop(rng):
    op = random_instrument(2, 2, 3, rng)
    same = update_operation(op, UpdateKernel.identity(op.labels))
    for (_, x), (_, y) in zip(op.outcomes, same.outcomes):
        assert np.allclose(x.choi(), y.choi())


def test_update_restrict_renormalizes(rng):
    op = random_instrument(2, 2, 3, rng)
    kept = update_operation(op, UpdateKernel.restrict(op.labels, ["2"], 0.5))
    assert kept.normalization() == pytest.approx(1.0)
    scale = 1 / op.outcome("2").normalization()
    assert np.allclose(kept.outcome("2").choi(), op.outcome("2").choi() * scale)


def test_nested_restrictions_compose(rng):
    op = random_instrument(2, 2, 4, rng)
    outer = update_operation(op, UpdateKernel.restrict(op.labels, ["0", "1", "3"]))
    nested = update_operation(outer, UpdateKernel.restrict(outer.labels, ["1", "3"]))
    direct = update_operation(op, UpdateKernel.restrict(op.labels, ["1", "3"]))
    assert nested.labels == direct.labels
    for label in direct.labels:
        assert np.allclose(nested.outcome(label).choi(), direct.outcome(label).choi())


def test_update_null():
    op = SequentialOperation.instrument(
        {"0": [np.eye(2)], "1": [np.zeros((2, 2))]}
    ).normalized()
    with pytest.raises(NullUpdateError):
        update_operation(op, UpdateKernel.restrict(op.labels, ["1"]))


def test_validate_operation(rng):
    good = validate_operation(random_instrument(2, 3, 2, rng))
    assert good.valid
    assert good.standard
    generalized = validate_operation(random_instrument(2, 3, 2, rng, standard=False))
    assert generalized.valid
    assert not generalized.standard
    op = random_instrument(2, 2, 2, rng)
    broken = op.with_outcomes([(label, k.scaled(3.0)) for label, k in op.outcomes])
    report = validate_operation(broken)
    assert not report
    assert report.normalization_residual == pytest.approx(2.0)


def test_circuit_probability_sequential(rng):
    prep, middles, meas = random_circuit(rng, [2, 2])
    dist = circuit_probability_sequential(prep, middles, meas)
    assert dist.names == ("op0", "op1", "op2")
    rho = prep.states()["1"]
    branch = middles[0].outcome("0").apply(rho)
    weights = {
        key: np.real(
            np.trace(middles[0].outcome(key[1]).apply(prep.states()[key[0]]) @ meas.effects()[key[2]])
        )
        for key in dist
    }
    total = sum(weights.values())
    expected = np.real(np.trace(branch @ meas.effects()["1"])) / total
    assert dist[("1", "0", "1")] == pytest.approx(expected, abs=1e-12)


def test_circuit_probability_null():
    prep = SequentialOperation.preparation({"0": np.diag([1.0, 0.0])})
    flip = SequentialOperation.unitary(np.array([[0, 1], [1, 0]]))
    meas = SequentialOperation.measurement({"0": np.diag([2.0, 0.0])}, "B")
    with pytest.raises(NullCompositionError):
        circuit_probability_sequential(prep, [flip], meas)


def test_kraus_then_composes_in_order(rng):
    x = KrausSet([np.array([[0, 1], [1, 0]])])
    z = KrausSet([np.diag([1, -1])])
    assert np.allclose(x.then(z).operators[0], np.diag([1, -1]) @ np.array([[0, 1], [1, 0]]))
