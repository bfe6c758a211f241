import math

import pytest
from hypothesis import assume, given, strategies as st

from dentlab.norms import MLUR3, SUP, ConvexBody, LurRenormConfig, mlur_gauge, nonsym_sup_norm, weighted_l2
from dentlab.search import SearchBudget
from dentlab.seqspace import FinFunctional, basis, make_vec, sup_norm
from dentlab.witnesses import (
    claim1_adversary,
    claim1_check,
    claim1_params,
    claim2_witness,
    example_c_witness,
    functional_sup,
    pc_trace_check,
    pk_witness,
    slice_lb_certificate,
)

SMALL = SearchBudget(restarts=16, iters=120)


def test_claim1_params_examples():
    assert claim1_params(basis(1), 1.0) == (1, 1 / 16)
    assert claim1_params(make_vec([]), 1.0) == (1, 1 / 16)
    x = make_vec([1.0, 1.0, 0.01, 0.01, 0.01])
    assert claim1_params(x, 1.0) == (2, 1 / 32)
    with pytest.raises(ValueError):
        claim1_params(basis(1), 0.0)


def test_claim1_check_examples():
    r = claim1_check(basis(1), 1.0, basis(5, 2.0))
    assert not r.vacuous and r.margin >= 0
    # |e1 + 2e5| = 1 + 2/2 and the margin is that minus (1 + 1/16).
    assert r.margin == pytest.approx(2.0 - 1.0 - 1 / 16)
    assert claim1_check(basis(1), 1.0, basis(1, 5.0)).vacuous


@given(
    st.lists(st.floats(-1, 1), min_size=1, max_size=5),
    st.floats(0.05, 1.0),
    st.integers(1, 12),
    st.floats(-3, 3).filter(lambda t: abs(t) > 1e-6),
)
def test_claim1_holds_for_spikes(head, eps, r, scale):
    x = make_vec(head)
    m, _ = claim1_params(x, eps)
    y = basis(m + r, scale * (eps + 1e-3) / max(abs(scale), 1e-9) * 2)
    assert claim1_check(x, eps, y).holds


def test_claim1_adversary_margin_nonnegative():
    margin, y = claim1_adversary(make_vec([0.5, -0.3, 0.2]), 0.3, SearchBudget(restarts=200, iters=40))
    assert margin >= 0.0
    assert sup_norm(y) > 0


def test_claim2_example():
    c = claim2_witness(basis(1, 0.5), FinFunctional.coordinate(1), 0.25)
    assert c.ok
    assert c.y == make_vec([0.5] + [0.0] * (c.m - 2) + [-0.5])
    assert sup_norm(c.x - c.y) == 0.5
    assert mlur_gauge(c.y) < 1 and c.delta == 0.125


def test_claim2_rejects_bad_inputs():
    f = FinFunctional.coordinate(1)
    with pytest.raises(ValueError):
        claim2_witness(make_vec([]), f, -1.0)
    with pytest.raises(ValueError):
        claim2_witness(basis(1, 0.9), f, 0.0)  # gauge > 1
    with pytest.raises(ValueError):
        claim2_witness(basis(1, 0.5), f, 0.6)  # f(x) <= a


@given(st.lists(st.floats(-1, 1), min_size=1, max_size=6), st.lists(st.floats(-2, 2), min_size=1, max_size=6),
       st.floats(0.05, 0.95), st.floats(0.01, 0.99))
def test_claim2_always_certifies(head, coeffs, scale, depth):
    x = make_vec(head)
    f = FinFunctional(tuple(coeffs))
    assume(sup_norm(x) > 1e-6 and abs(f(x)) > 1e-6)
    if f(x) < 0:
        f = -f
    x = x * (scale / mlur_gauge(x))
    a = f(x) * (1 - depth)
    c = claim2_witness(x, f, a)
    assert c.ok
    assert sup_norm(x - c.y) == nonsym_sup_norm(x)[0]


@pytest.mark.parametrize("sign, a", [(1.0, 0.0), (-1.0, -0.2)])
def test_slice_certificate_floor(sign, a):
    cert = slice_lb_certificate(FinFunctional.coordinate(1, sign), a, 0.995, SMALL)
    assert cert.ok
    assert cert.bound_sup >= 0.995 / math.sqrt(2)
    assert cert.bound_mlur >= cert.bound_sup
    assert cert.recheck() == (cert.bound_sup, cert.bound_mlur)


def test_slice_certificate_degenerate_target():
    cert = slice_lb_certificate(FinFunctional.coordinate(1), 0.0, 0.0, SMALL)
    assert cert.bound_sup == 0.0 and cert.y is None


@pytest.mark.parametrize("lam, expected", [(1.0, 2.0), (0.5, 1.5), (1e-9, 1.0 + 1e-9)])
def test_example_c(lam, expected):
    r = example_c_witness(lam)
    assert r["Pz_equals_e"] and r["ok"]
    assert r["value"] == pytest.approx(expected, abs=1e-12)


def _pk_sign(k, lam):
    # Hand expansion of the two finite sums: lur^2(Tu) - lur^2(u).
    return (1 - 2.0 ** (1 - k)) * (2 * lam + lam * lam) - 1.5 * 2.0**-k * (1 - lam * lam)


@pytest.mark.parametrize("k", [1, 2, 3, 5, 12])
@pytest.mark.parametrize("lam", [0.1, 0.2, 0.5, 1.0])
def test_pk_witness_matches_closed_form(k, lam):
    r = pk_witness(k, lam)
    diff = r["image"] ** 2 - r["norm_u"] ** 2
    assert diff == pytest.approx(_pk_sign(k, lam), abs=1e-12)


def test_pk_witness_examples():
    assert pk_witness(5, 1.0)["ratio"] > 1
    assert pk_witness(2, 0.5)["ratio"] > 1
    # k = 1, lam = 1: (P_1 - R_1)(e1 + e2) = e1 - e2 has the same renorm as e1 + e2.
    assert pk_witness(1, 1.0)["ratio"] == pytest.approx(1.0, abs=1e-15)
    assert pk_witness(3, 0.0)["ratio"] <= 1.0


def test_functional_sup_on_cube():
    M, u = functional_sup(ConvexBody(SUP), FinFunctional((1.0, -1.0)), SMALL)
    assert M == pytest.approx(2.0, abs=1e-6)
    assert sup_norm(u) <= 1.0


def test_pc_trace_identity_passes():
    body = ConvexBody(weighted_l2(3))
    x = make_vec([1.0, 1.0]) / body.gauge(make_vec([1.0, 1.0]))
    w = x * 0.999
    tr = pc_trace_check(body, x, w, w, 0.5, 0.005, 0.05, 0.1, SMALL)
    assert tr.ok, tr.broken


def test_pc_trace_labels_failure_on_mlur_ball():
    body = ConvexBody(MLUR3)
    x = basis(1) / MLUR3(basis(1))
    w = x + basis(9, 0.3)
    w = w / max(1.0, MLUR3(w))
    phi_w = make_vec(w.coords(4))
    tr = pc_trace_check(body, x, w, phi_w, 1.0, 1e-3, 1e-3, 0.05, SMALL)
    assert not tr.ok
    assert tr.broken is not None
