import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dentlab.seqspace import (
    FinFunctional,
    IndexSeq,
    SeqVec,
    active_horizon,
    apply_functional,
    basis,
    constant,
    functional_from_json,
    make_vec,
    sup_norm,
    vec_from_json,
)

from conftest import c_vecs, coord


def test_canonical_head_drops_trailing_tail_values():
    assert make_vec([1, 0, 0]).head == (1.0,)
    assert make_vec([2, 5, 5], 5).head == (2.0,)
    assert make_vec([3, 3], 3) == constant(3)
    assert make_vec([1, 0]) == basis(1)


def test_indexing_is_one_based_and_reads_tail():
    x = make_vec([4, -1], 7)
    assert (x(1), x(2), x(3), x(100)) == (4.0, -1.0, 7.0, 7.0)
    with pytest.raises(IndexError):
        x(0)


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        make_vec([1, float("nan")])
    with pytest.raises(ValueError):
        make_vec([], float("inf"))


def test_basis_and_sup():
    assert basis(3, -2).head == (0.0, 0.0, -2.0)
    assert sup_norm(make_vec([1, -4], 2)) == 4.0
    assert sup_norm(make_vec([1], -3)) == 3.0
    with pytest.raises(ValueError):
        basis(0)


@given(c_vecs(), c_vecs(), st.integers(1, 20))
def test_pointwise_arithmetic(x, y, k):
    assert (x + y)(k) == x(k) + y(k)
    assert (x - y)(k) == x(k) - y(k)
    assert (-x)(k) == -x(k)
    assert (x * 2.5)(k) == 2.5 * x(k)


@given(c_vecs())
def test_canonical_form_is_unique(x):
    padded = make_vec(list(x.head) + [x.tail] * 3, x.tail)
    assert padded == x
    assert not x.head or x.head[-1] != x.tail


@given(c_vecs())
def test_json_round_trip(x):
    assert vec_from_json(x.to_json()) == x


def test_index_seq_validation():
    assert IndexSeq((1, 3, 4)).head == 1
    for bad in [(), (0, 1), (2, 2), (3, 1)]:
        with pytest.raises(ValueError):
            IndexSeq(bad)


def test_functional_pairing_hits_tail():
    f = FinFunctional((1.0, 0.0, 2.0), cinf=0.5)
    x = make_vec([3.0], 1.0)
    # 1*3 + 0*1 + 2*1 + 0.5*1
    assert f(x) == 5.5
    assert apply_functional(FinFunctional.coordinate(4), x) == 1.0


@given(st.lists(coord, max_size=6), c_vecs(), c_vecs(), coord)
def test_functional_is_linear(coeffs, x, y, t):
    f = FinFunctional(tuple(coeffs))
    assert f(x + y) == pytest.approx(f(x) + f(y), abs=1e-9)
    assert f(x * t) == pytest.approx(t * f(x), abs=1e-9)


@given(st.lists(coord, max_size=6), st.lists(coord, max_size=6), c_vecs())
def test_functional_sum(a, b, x):
    f, g = FinFunctional(tuple(a)), FinFunctional(tuple(b))
    assert (f + g)(x) == pytest.approx(f(x) + g(x), abs=1e-9)


def test_functional_json():
    f = functional_from_json('{"head": [0, 2], "tail": 0}')
    assert f == FinFunctional.coordinate(2, 2.0)
    assert json.loads(f.to_json())["head"] == [0.0, 2.0]
    with pytest.raises(ValueError):
        functional_from_json('{"head": [1], "tail": 1}')


def test_active_horizon_and_coords():
    x = make_vec([1, 2])
    assert active_horizon(x, [FinFunctional.coordinate(5)]) == 5
    assert np.array_equal(make_vec([1], 9).coords(3), [1.0, 9.0, 9.0])
    assert x.support() == [1, 2]
