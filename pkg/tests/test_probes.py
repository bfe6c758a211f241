import math

import pytest

from dentlab.norms import MLUR3, SUP, ConvexBody, lur_oracle, weighted_l2
from dentlab.probes import (
    ProbeReport,
    SliceSpec,
    classify,
    denting_probe,
    lur_gap,
    lur_gap_grid,
    midpoint_modulus,
    midpoint_modulus_grid,
    slice_diameter,
)
from dentlab.search import SearchBudget
from dentlab.seqspace import FinFunctional, basis, make_vec, sup_norm, vec_from_json

SMALL = SearchBudget(restarts=16, iters=120)
CUBE = ConvexBody(SUP)
BALL3 = ConvexBody(MLUR3)
WL2 = ConvexBody(weighted_l2(4))


def _unit(body, head):
    x = make_vec(head)
    return x / body.gauge(x)


def test_cube_vertexless_point_is_not_extreme():
    rep = midpoint_modulus(CUBE, basis(1), 0.0, SMALL)
    assert rep.certified == 1.0
    d = rep.witness["d"]
    assert max(sup_norm(basis(1) + d), sup_norm(basis(1) - d)) <= 1.0


def test_strictly_convex_modulus_vanishes():
    rep = midpoint_modulus(WL2, _unit(WL2, [1, 1]), 0.0, SMALL)
    assert rep.certified < 1e-6


def test_modulus_grid_monotone_and_decreasing_trend():
    x = _unit(BALL3, [0.3, -0.5, 0.2, 0.1, 0.4])
    rep = midpoint_modulus_grid(BALL3, x, budget=SMALL)
    est = [r["estimate"] for r in sorted(rep.grid, key=lambda r: r["param"])]
    assert est == sorted(est)
    assert est[0] <= 0.5 * est[-1]
    for row in rep.grid:
        d = vec_from_json(row["witness"])
        assert max(MLUR3(x + d), MLUR3(x - d)) <= 1.0 + row["param"]
        assert sup_norm(d) == row["certified"]


def test_probes_reject_interior_points():
    with pytest.raises(ValueError):
        midpoint_modulus(CUBE, basis(1, 0.5), 0.1, SMALL)
    with pytest.raises(ValueError):
        lur_gap(CUBE, basis(1, 0.5), 0.1, SMALL)


def test_lur_gap_cube():
    rep = lur_gap(CUBE, basis(1), 0.1, SMALL)
    y = rep.witness["y"]
    assert rep.certified >= 1.0
    assert sup_norm(y) <= 1.0 and sup_norm(basis(1) + y) >= 1.9


def test_lur_gap_trend_for_lur_renorm():
    g = lur_oracle()
    body = ConvexBody(g)
    x = basis(1) / g(basis(1))
    rep = lur_gap_grid(body, x, budget=SMALL)
    est = [r["estimate"] for r in sorted(rep.grid, key=lambda r: r["param"])]
    assert est == sorted(est)
    assert est[0] <= 0.5 * est[-1]


def test_cube_slice_diameter_is_two():
    spec = SliceSpec.depth(CUBE, FinFunctional.coordinate(1), 0.3, SMALL)
    rep = slice_diameter(CUBE, spec, SMALL)
    assert rep.certified == 2.0
    u, v = rep.witness["u"], rep.witness["v"]
    assert u(1) > spec.level and v(1) > spec.level
    assert rep.certified <= rep.extra["upper_from_constants"]


def test_slice_spec_rejects_empty():
    with pytest.raises(ValueError):
        SliceSpec.threshold(CUBE, FinFunctional.coordinate(1), 1.5, SMALL)
    with pytest.raises(ValueError):
        SliceSpec.depth(CUBE, FinFunctional.coordinate(1), 0.0, SMALL)


@pytest.mark.parametrize("metric", ["sup", "mlur3"])
def test_mlur_ball_slices_have_certified_floor(metric):
    f = FinFunctional((0.3, -1.0, 0.5))
    spec = SliceSpec.depth(BALL3, f, 1e-3, SMALL)
    rep = slice_diameter(BALL3, spec, SMALL, metric)
    assert rep.extra["claim2"]["ok"]
    assert rep.certified >= 0.995 / math.sqrt(2)


def test_denting_probe_contrast():
    x3 = _unit(BALL3, [0.3, -0.5, 0.2])
    d3 = denting_probe(BALL3, x3, SMALL)
    assert d3.side == "lower" and d3.certified >= 0.995 / math.sqrt(2)
    dw = denting_probe(WL2, _unit(WL2, [1, 1]), SMALL)
    est = [r["estimate"] for r in sorted(dw.grid, key=lambda r: r["param"])]
    assert est[0] <= 0.5 * est[-1]


def test_classify_labels():
    assert classify(CUBE, basis(1), SMALL)["labels"]["extreme"] == "refuted"
    lw = classify(WL2, _unit(WL2, [1, -1, 0.5]), SMALL)["labels"]
    assert lw == {"extreme": "no-counterexample", "mlur": "trend-0", "lur": "trend-0", "denting": "trend-0"}
    l3 = classify(BALL3, _unit(BALL3, [0.3, -0.5, 0.2]), SMALL)["labels"]
    assert l3["mlur"] == "trend-0" and l3["denting"] == "certified-floor"


def test_report_is_deterministic_json():
    a = midpoint_modulus(CUBE, basis(1), 0.1, SMALL).to_json()
    b = midpoint_modulus(CUBE, basis(1), 0.1, SMALL).to_json()
    assert a == b
    rows = ProbeReport("q", 1.0, 1.0, "lower", budget={"seed": 3}).csv_rows()
    assert rows == [("q", "", 1.0, 1.0, "lower", 3)]
