import numpy as np
import pytest

from refltrace.tensor_core import IndexSet, MultiOp, aux, commutator_residual, quantum, residual
from refltrace.yb_traces import (
    TraceOperator,
    build_yb_solution,
    check_dress0,
    check_r,
    coincident_pair,
    gybe_residual,
    yb_report,
    yb_trace,
)

SITES = (quantum("q1"), quantum("q2"))
THETAS = (0.1 + 0.2j, -0.3 + 0.05j)


def test_yb_report(model):
    rep = yb_report(model, SITES, THETAS, count=2)
    assert rep.passed, rep.failures()
    assert {r.tag for r in rep.rows} >= {"gybe[2,2]", "trace[3,1]"}


def test_traces_commute_for_disjoint_sets(model):
    a = build_yb_solution(model, IndexSet.of(["n0", "n1"], [0.2, -0.4 + 0.1j]), SITES, THETAS)
    b = build_yb_solution(model, IndexSet.of(["m0"], [0.7j]), SITES, THETAS)
    assert gybe_residual(a, b) < 1e-12
    ha, hb = yb_trace(a).op, yb_trace(b).op
    assert commutator_residual(ha, hb) < 1e-12
    assert set(ha.labels) == {"q1", "q2"}


def test_check_r_dress0_at_coincident_values(model):
    lam = 0.3 - 0.1j
    a, b = aux("a", 2, lam), aux("b", 2, lam)
    probe = aux("c", 2, 0.55j)
    assert check_dress0(model, check_r(model, a, b, 0), lam, lam, probe) < 1e-12


def test_check_r_exchanges_spectral_values(model):
    # Pi R12(l1 - l2) R13(l1) R23(l2) = R13(l2) R23(l1) Pi R12(l1 - l2): the
    # relation with fixed arguments on both sides only holds on the diagonal
    l1, l2, l3 = 0.3, -0.2 + 0.1j, 0.55j
    a, b, c = aux("a", 2, l1), aux("b", 2, l2), aux("c", 2, l3)
    C = check_r(model, a, b, l1 - l2)
    lhs = C @ model.R(a, c, l1 - l3) @ model.R(b, c, l2 - l3)
    swapped = model.R(a, c, l2 - l3) @ model.R(b, c, l1 - l3) @ C
    assert residual(lhs, swapped) < 1e-12
    assert check_dress0(model, C, l1, l2, c) > 1e-3


def test_coincident_dressing_keeps_fundamental_equation(model):
    N = IndexSet.of(["n0", "n1"], 0.3 - 0.2j)
    M = IndexSet.of(["m0"], [0.45 - 0.3j])
    a = build_yb_solution(model, N, SITES, THETAS)
    dressed = a.with_dressing(check_r(model, N[0], N[1], 0))
    b = build_yb_solution(model, M, SITES, THETAS)
    assert gybe_residual(dressed, b) < 1e-11
    assert commutator_residual(yb_trace(dressed).op, yb_trace(b).op) < 1e-11


def test_dressing_must_stay_on_its_set(rational):
    N = IndexSet.of(["n0"], [0.3])
    a = build_yb_solution(rational, N, SITES, THETAS)
    with pytest.raises(ValueError):
        a.with_dressing(MultiOp.identity([aux("x")]))


def test_trace_operator_rejects_auxiliary_legs():
    with pytest.raises(ValueError):
        TraceOperator(IndexSet.of(["a"], 0.1), MultiOp.identity([aux("a")]))


def test_argument_validation(rational):
    N = IndexSet.of(["n0"], [0.3])
    with pytest.raises(ValueError):
        build_yb_solution(rational, N, SITES, THETAS[:1])
    with pytest.raises(ValueError):
        build_yb_solution(rational, IndexSet.of(["n0"], [0.3], dim=3), SITES, THETAS)


def test_coincident_pair():
    a, b = coincident_pair("x", "y", 0.4)
    assert a.lam == b.lam == 0.4 and np.isclose(a.dim, 2)
