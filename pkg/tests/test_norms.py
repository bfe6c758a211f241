import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dentlab.norms import (
    MLUR3,
    NONSYM,
    Q,
    SPREAD,
    SUP,
    ConvexBody,
    LurRenormConfig,
    all_index_seqs,
    combine_norm,
    dist_to_body,
    eval_Q,
    eval_q,
    gauge_membership,
    get_norm,
    into_body,
    lur_oracle,
    lur_renorm,
    mlur_gauge,
    nonsym_bruteforce,
    nonsym_sup_norm,
    spread_norm,
    weighted_l2,
)
from dentlab.search import SearchBudget
from dentlab.seqspace import FinFunctional, basis, constant, make_vec, sup_norm

from conftest import c0_vecs, heads

SQ2 = math.sqrt(2.0)


# Hand-expanded values of Q over every index sequence of (1, 1, 1): the best
# is j = (1, 2, 3) giving 1 + 1/2 + 1/4.
@pytest.mark.parametrize(
    "head, value, j",
    [
        ([1.0], 1.0, (1,)),
        ([1.0, 1.0, 1.0], 1.75, (1, 2, 3)),
        ([1.0, -1.0], 1.0, (1,)),
        ([-1.0, 1.0], 1.5, (1, 2)),
        ([0.0, 0.0, 2.0], 2.0, (3,)),
        ([], 0.0, (1,)),
    ],
)
def test_nonsym_examples(head, value, j):
    v, seq = nonsym_sup_norm(make_vec(head))
    assert v == value
    assert tuple(seq) == j


def test_nonsym_requires_c0():
    with pytest.raises(ValueError):
        nonsym_sup_norm(constant(1.0))


def test_eval_Q_by_hand():
    x = make_vec([-2.0, 1.0, -1.0, 4.0])
    # |x(1)| + x+(2)/2 + x+(3)/4 + x+(4)/8
    assert eval_Q(x, (1, 2, 3, 4)) == 2 + 0.5 + 0 + 0.5
    assert eval_Q(x, (3, 4)) == 1 + 2


def test_eval_q_closed_tail():
    # Constant tail t after h head entries contributes t^2 * 2^-h.
    x = make_vec([1.0], 2.0)
    assert eval_q(x) ** 2 == pytest.approx(0.5 + 4 * 0.5)
    assert eval_q(basis(1)) ** 2 == pytest.approx(0.5)


@given(heads(9, 1))
def test_dp_matches_bruteforce(h):
    x = make_vec(h)
    v, j = nonsym_sup_norm(x)
    assert v == pytest.approx(nonsym_bruteforce(x), abs=1e-12)
    assert eval_Q(x, j) == pytest.approx(v, abs=1e-12)


def test_bruteforce_matches_enumeration(rng):
    for _ in range(30):
        x = make_vec(rng.uniform(-2, 2, 6))
        best = max(eval_Q(x, j) for j in all_index_seqs(7))
        assert nonsym_bruteforce(x) == pytest.approx(best, abs=1e-14)


def test_spot_values():
    assert mlur_gauge(basis(1)) == pytest.approx(math.sqrt(1.5))
    assert mlur_gauge(make_vec([1.0, 1.0])) ** 2 == pytest.approx(1.5**2 + 0.75)
    assert spread_norm(make_vec([1.0, -1.0])) == 2.0
    assert spread_norm(constant(3.0)) == 0.0
    assert spread_norm(basis(2)) == 1.0


def test_lur_renorm_hand_sums():
    cfg = LurRenormConfig()
    # e1: only n = 1 contributes f_1(e1)^2 / 2.
    assert lur_renorm(cfg, basis(1)) ** 2 == pytest.approx(0.5)
    # e2: spread(R_1 e2)^2 / 2 + f_2(e2)^2 / 4.
    assert lur_renorm(cfg, basis(2)) ** 2 == pytest.approx(0.75)
    zero = LurRenormConfig(functionals="zero")
    assert lur_renorm(zero, basis(1)) == 0.0
    assert lur_oracle(zero).degenerate


ORACLES = [SUP, SPREAD, Q, NONSYM, MLUR3, lur_oracle(), combine_norm("l2", MLUR3, [FinFunctional.coordinate(2)])]


@pytest.mark.parametrize("g", ORACLES, ids=lambda g: g.name)
@given(x=c0_vecs(8), y=c0_vecs(8), t=st.floats(0, 5))
def test_gauge_axioms(g, x, y, t):
    gx, gy = g(x), g(y)
    assert g(x * t) == pytest.approx(t * gx, rel=1e-12, abs=1e-12)
    assert g(x + y) <= gx + gy + 1e-12
    s = sup_norm(x)
    assert g.lower * s <= gx + 1e-12
    assert gx <= g.upper * s + 1e-12
    if g.symmetric:
        assert g(-x) == pytest.approx(gx, abs=1e-12)


@pytest.mark.parametrize("g", ORACLES, ids=lambda g: g.name)
@given(heads(8, 1))
def test_batch_matches_scalar(g, h):
    X = np.array([h + [0.0] * (10 - len(h))])
    assert g.batch(X)[0] == pytest.approx(g(make_vec(h)), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("g", ORACLES, ids=lambda g: g.name)
@given(x=c0_vecs(7), y=c0_vecs(7))
def test_subgradient_supports_the_ball(g, x, y):
    f = g.subgradient(x)
    assert f(x) == pytest.approx(g(x), abs=1e-9)
    assert f(y) <= g(y) + 1e-9


def test_nonsym_is_not_symmetric():
    x = make_vec([1.0, -1.0])
    assert NONSYM(x) == 1.0 and NONSYM(-x) == 1.5
    assert not MLUR3.symmetric


@given(c0_vecs(12))
def test_chain_inequality(x):
    s, n, g = sup_norm(x), NONSYM(x), MLUR3(x)
    assert s <= n + 1e-12
    assert n <= g + 1e-12
    assert g <= math.sqrt(n * n + s * s) + 1e-12
    assert math.sqrt(n * n + s * s) <= SQ2 * n + 1e-12
    assert SQ2 * n <= 3 * s + 1e-12


def test_weighted_l2_is_finite_dimensional():
    g = weighted_l2(3)
    assert g(basis(3)) == pytest.approx(math.sqrt(0.125))
    assert g(basis(4)) == math.inf
    assert g.lower == pytest.approx(0.5**1.5)


def test_combine_constants_and_values():
    c = combine_norm("l1", SUP, [FinFunctional.coordinate(1)])
    assert c(basis(1)) == 2.0
    c2 = combine_norm("l2", weighted_l2(2), [FinFunctional.coordinate(1)])
    assert c2(basis(1)) ** 2 == pytest.approx(1.5)
    with pytest.raises(ValueError):
        combine_norm("l1", SUP, [])
    with pytest.raises(ValueError):
        combine_norm("lp", SUP, [FinFunctional.coordinate(1)])


@pytest.mark.parametrize(
    "spec, name",
    [
        ("sup", "sup"),
        ("mlur3", "mlur3"),
        ("wl2:5", "wl2:5"),
        ("lur", "lur(spread,coordinate)"),
        ("lur(sup,zero)", "lur(sup,zero)"),
        ("combine(l2,wl2:4,e1;e3)", "combine(l2,wl2:4,W2)"),
    ],
)
def test_registry(spec, name):
    assert get_norm(spec).name == name


@pytest.mark.parametrize("spec", ["", "lp", "lur(sup)", "combine(l2,sup)", "combine(l2,sup,x1)"])
def test_registry_rejects(spec):
    with pytest.raises(ValueError):
        get_norm(spec)


def test_body_helpers():
    body = ConvexBody(MLUR3)
    assert gauge_membership(body, basis(1) / MLUR3(basis(1)), 1e-9) == "boundary"
    assert gauge_membership(body, basis(1, 0.1), 1e-9) == "inside"
    v = into_body(body, make_vec([3.0, -2.0]))
    assert MLUR3(v) <= 1.0
    with pytest.raises(ValueError):
        ConvexBody(Q)


def test_dist_to_body_brackets():
    body = ConvexBody(SUP)
    d, w = dist_to_body(body, make_vec([3.0, 0.5]), SearchBudget(restarts=8, iters=100))
    # Exact distance is 2; the upper bound comes with a witness in the ball.
    assert sup_norm(w) <= 1.0
    assert 2.0 - 1e-12 <= d <= sup_norm(make_vec([3.0, 0.5]) - w) + 1e-12
    assert d == pytest.approx(2.0, abs=1e-6)
