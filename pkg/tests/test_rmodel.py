import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from refltrace.rmodel import (
    AXIOM_TAGS,
    CertificationError,
    model_from_descriptor,
    rational_gl_model,
    sample_spectral,
    six_vertex_model,
    verify_axioms,
)

P = np.eye(4)[[0, 2, 1, 3]]
I2 = np.eye(2)


def ybe_plain(Rfun, l1, l2):
    """R12 R13 R23 against R23 R13 R12 with explicit 8x8 matrices."""
    R12 = np.kron(Rfun(l1 - l2), I2)
    R23 = np.kron(I2, Rfun(l2))
    P23 = np.kron(I2, P)
    R13 = P23 @ np.kron(Rfun(l1), I2) @ P23
    lhs, rhs = R12 @ R13 @ R23, R23 @ R13 @ R12
    return np.linalg.norm(lhs - rhs) / np.linalg.norm(lhs)


def six_vertex_plain(lam, eta):
    a, b, c = np.sinh(lam + eta), np.sinh(lam), np.sinh(eta)
    return np.array([[a, 0, 0, 0], [0, b, np.exp(lam) * c, 0], [0, np.exp(-lam) * c, b, 0], [0, 0, 0, a]])


def test_kernels_match_closed_forms(rational, six_vertex):
    lam = 0.3 - 0.7j
    assert np.allclose(rational.kernel(lam), lam * np.eye(4) + P)
    assert np.allclose(six_vertex.kernel(lam), six_vertex_plain(lam, six_vertex.eta))


@settings(max_examples=25, deadline=None)
@given(st.complex_numbers(max_magnitude=2, allow_nan=False), st.complex_numbers(max_magnitude=2, allow_nan=False))
def test_plain_matrix_oracle_satisfies_ybe(l1, l2):
    eta = 0.35 + 0.1j
    assert ybe_plain(lambda x: x * np.eye(4) + P, l1, l2) < 1e-12
    assert ybe_plain(lambda x: six_vertex_plain(x, eta), l1, l2) < 1e-12


def test_axiom_rows_pass(model):
    rep = verify_axioms(model, sample_spectral(model, 20))
    assert [r.tag for r in rep.rows] == list(AXIOM_TAGS)
    assert rep.passed, rep.failures()
    assert all(r.samples == 20 for r in rep.rows)


def test_crossing_data(rational, six_vertex):
    assert np.allclose(rational.V, [[0, 1], [-1, 0]])
    assert np.allclose(rational.M, I2)
    assert rational.rho == 1.0
    q = six_vertex.eta
    assert np.allclose(six_vertex.M, np.diag([cmath.exp(q), cmath.exp(-q)]))
    assert six_vertex.rho == pytest.approx(q)
    for m in (rational, six_vertex):
        assert np.allclose(m.V @ m.V, -I2)
        assert np.allclose(m.V.T @ m.V, m.M)


@settings(max_examples=25, deadline=None)
@given(st.complex_numbers(max_magnitude=3, allow_nan=False))
def test_rational_unitarity_scalar(lam):
    # (lam + P)(-lam + P) = 1 - lam^2
    m = rational_gl_model(2, 1.0)
    assert m.unitarity_scalar(lam) == pytest.approx(1 - lam**2, abs=1e-12)


def test_six_vertex_unitarity_scalar(six_vertex):
    lam, eta = 0.4 + 0.2j, six_vertex.eta
    expected = cmath.sinh(eta + lam) * cmath.sinh(eta - lam)
    assert six_vertex.unitarity_scalar(lam) == pytest.approx(expected, rel=1e-12)


def test_gl3_fails_crossing():
    with pytest.raises(CertificationError) as info:
        rational_gl_model(3)
    assert info.value.tag == "cross"


def test_invalid_parameters():
    with pytest.raises(ValueError):
        rational_gl_model(2, 0)
    with pytest.raises(ValueError):
        six_vertex_model(1j)  # q^4 = 1
    with pytest.raises(ValueError):
        model_from_descriptor({"name": "nope"})


def test_descriptors():
    m = model_from_descriptor({"name": "rational", "eta": [0.5, 0.0]})
    assert m.eta == 0.5 and m.certified
    sv = model_from_descriptor({"name": "six-vertex", "q_param": [1.2, 0.3]})
    assert sv.certified and abs(cmath.exp(sv.eta) - (1.2 + 0.3j)) < 1e-14


def test_sampling_is_seeded(rational):
    assert sample_spectral(rational, 5, seed=3) == sample_spectral(rational, 5, seed=3)
    assert sample_spectral(rational, 5, seed=3) != sample_spectral(rational, 5, seed=4)
    pts = sample_spectral(rational, 50, box=1.5)
    assert all(abs(z.real) <= 1.5 and abs(z.imag) <= 1.5 for p in pts for z in p)


def test_normalized_model_tends_to_identity():
    m = rational_gl_model(2, 1e-6).normalized()
    assert not m.certified
    assert np.allclose(m.kernel(0.4), np.eye(4), atol=1e-5)


def test_z_scalars_do_not_depend_on_framing(model):
    from refltrace.tensor_core import MultiOp, aux, proportionality_scalar

    rng = np.random.default_rng(12)
    lam = 0.45 - 0.3j
    X = model.R(1, 2, lam) @ model.R(2, 1, -lam)
    zs = []
    for _ in range(2):
        S = MultiOp((aux("1"), aux("2")), rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
        zs.append(proportionality_scalar(S @ X @ S.inv())[0])
    assert abs(zs[0] - zs[1]) <= 1e-12 * abs(zs[0])
    assert abs(zs[0] - model.unitarity_scalar(lam)) <= 1e-12 * abs(zs[0])


def test_second_crossing_follows_from_first_and_transposition(model):
    from refltrace.tensor_core import MultiOp, aux, residual

    lam, rho = 0.3 + 0.4j, model.rho
    a, b = aux("1"), aux("2")
    # transposing the first crossing fully gives R21(lam) by (transp);
    # swapping the labels 1 <-> 2 then yields the second crossing
    first = model.V_op(a) @ model.R(a, b, -lam - rho).transpose(["2"]) @ model.V_op(a)
    derived = first.transpose(["1", "2"]).relabel({"1": "2", "2": "1"}).reorder(["1", "2"])
    Vt = MultiOp((b,), model.V.T)
    direct = Vt @ model.R(a, b, -lam - rho).transpose(["1"]) @ Vt
    assert residual(derived, direct) < 1e-12
    assert residual(direct, model.R(a, b, lam)) < 1e-12
