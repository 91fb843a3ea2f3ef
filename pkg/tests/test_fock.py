import math

import numpy as np
import pytest

from trilinear.fock import (
    Ket, LinOp, SpaceLayout, StateSpec, annihilator, basis_labels, commutator, creator, fock_probs, identity,
    number, parse_state, pauli, prepare_state, spin_probs, tail_mass,
)


def test_basis_index_order(small_layout):
    labels = list(basis_labels(small_layout))
    assert len(labels) == small_layout.total_dim
    for i, (s, nb, nr) in enumerate(labels):
        assert small_layout.index(s, nb, nr) == i
    assert small_layout.index(1, 0, 0) == 1
    assert small_layout.index(0, 0, 1) == 2
    with pytest.raises(IndexError):
        small_layout.index(0, 5, 0)


@pytest.mark.parametrize("mode", ["b", "r"])
def test_ladder_elements(small_layout, mode):
    lay = small_layout
    a = annihilator(lay, mode).matrix
    for n in range(1, lay.cutoff(mode) + 1):
        nb, nr = (n, 0) if mode == "b" else (0, n)
        lo = (n - 1, 0) if mode == "b" else (0, n - 1)
        assert math.isclose(a[lay.index(1, *lo), lay.index(1, nb, nr)], math.sqrt(n))
    n_op = number(lay, mode).matrix
    assert np.allclose(creator(lay, mode).matrix @ a, n_op)


def test_canonical_commutator_away_from_cutoff(small_layout):
    lay = small_layout
    for mode in "br":
        c = commutator(annihilator(lay, mode), creator(lay, mode)).matrix
        diag = np.diag(c).reshape(lay.shape)
        inner = diag[:-1, :, :] if mode == "b" else diag[:, :-1, :]
        assert np.allclose(inner, 1.0)
    mixed = commutator(annihilator(lay, "b"), creator(lay, "r")).matrix
    assert np.allclose(mixed, 0)


def test_pauli_algebra(small_layout):
    lay = small_layout
    sx, sy, sz = (pauli(lay, k).matrix for k in "xyz")
    assert np.allclose(sx @ sy - sy @ sx, 2j * sz)
    assert np.allclose(sx @ sx, np.eye(lay.total_dim))
    up = prepare_state(lay, "up fock(0,0)")
    assert math.isclose(up.expect(pauli(lay, "z")), 1.0)
    raised = pauli(lay, "+").matrix @ prepare_state(lay, "down fock(0,0)").amplitudes
    assert np.allclose(raised, up.amplitudes)
    plus = prepare_state(lay, "+ fock(0,0)")
    assert math.isclose(plus.expect(pauli(lay, "x")), 1.0)
    assert math.isclose(prepare_state(lay, "- fock(0,0)").expect(pauli(lay, "x")), -1.0)


def test_linop_checks(small_layout):
    with pytest.raises(ValueError):
        LinOp(np.ones((3, 3)), small_layout)
    with pytest.raises(ValueError):
        LinOp(annihilator(small_layout, "b").matrix, small_layout, hermitian=True)
    op = identity(small_layout) * 2.0 - identity(small_layout)
    assert np.allclose(op.matrix, np.eye(small_layout.total_dim))
    assert op.is_real()


@pytest.mark.parametrize("text,spec", [
    ("+ fock(2,0)", StateSpec("+", "fock", 2, 0)),
    ("down binomial(2)", StateSpec("down", "binomial", n=2)),
    ("+ twin( 5 )", StateSpec("+", "twin", n=5)),
    ("up noon(3)", StateSpec("up", "noon", n=3)),
])
def test_parse_state(text, spec):
    assert parse_state(text) == spec
    assert parse_state(str(spec)) == spec


@pytest.mark.parametrize("text", ["+ fock(2)", "left fock(0,0)", "+ twin(1,2)", "", "+ coherent(1)"])
def test_parse_state_rejects(text):
    with pytest.raises(ValueError):
        parse_state(text)


def test_binomial_state_weights():
    lay = SpaceLayout(3, 3)
    psi = prepare_state(lay, "down binomial(2)")
    t = psi.tensor()
    assert np.allclose(np.abs(t[:, :, 0]) ** 2,
                       [[0, 0, 0.25, 0], [0, 0.5, 0, 0], [0.25, 0, 0, 0], [0, 0, 0, 0]])
    assert spin_probs(psi) == (1.0, 0.0)
    assert math.isclose(psi.norm(), 1.0)


def test_noon_and_twin():
    lay = SpaceLayout(5, 5)
    noon = prepare_state(lay, "up noon(3)")
    assert np.allclose(fock_probs(noon, "b"), [0.5, 0, 0, 0.5, 0, 0])
    twin = prepare_state(lay, "+ twin(2)")
    assert np.allclose(fock_probs(twin, "r"), [0, 0, 1, 0, 0, 0])
    assert np.allclose(spin_probs(twin), (0.5, 0.5))


def test_state_beyond_cutoff():
    with pytest.raises(ValueError):
        prepare_state(SpaceLayout(2, 2), "+ fock(3,0)")
    with pytest.raises(ValueError):
        prepare_state(SpaceLayout(4, 4), "+ fock(3,0)", margin=2)


def test_tail_mass_ignores_vacuum():
    lay = SpaceLayout(1, 1)
    psi = prepare_state(lay, "up fock(0,0)")
    assert tail_mass(psi, "b") == 0.0
    assert math.isclose(tail_mass(prepare_state(lay, "up fock(1,0)"), "b"), 1.0)


def test_ket_csv_round_trip(tmp_path, small_layout):
    rng = np.random.default_rng(3)
    amp = rng.normal(size=small_layout.total_dim) + 1j * rng.normal(size=small_layout.total_dim)
    ket = Ket(amp, small_layout).normalized()
    ket.to_csv(tmp_path / "psi.csv")
    back = Ket.from_csv(tmp_path / "psi.csv", small_layout)
    assert np.array_equal(back.amplitudes, ket.amplitudes)
