import naive_oracle as oracle
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from refltrace.tensor_core import (
    IndexSet,
    Kind,
    MultiOp,
    Space,
    SpaceError,
    aux,
    commutator_residual,
    compose,
    dumps,
    embed,
    loads,
    partial_trace,
    partial_transpose,
    product,
    proportionality_scalar,
    quantum,
    residual,
)

LABELS = ["a", "b", "c"]


def random_op(rng, spaces):
    n = int(np.prod([s.dim for s in spaces]))
    return MultiOp(tuple(spaces), rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))


seeds = st.integers(0, 2**32 - 1)
subsets = st.lists(st.sampled_from(LABELS), unique=True)


@settings(max_examples=40, deadline=None)
@given(seeds, subsets)
def test_partial_transpose_is_involution(seed, sub):
    rng = np.random.default_rng(seed)
    op = random_op(rng, [aux(x) for x in LABELS])
    assert residual(op.transpose(sub).transpose(sub), op) == 0.0


@settings(max_examples=40, deadline=None)
@given(seeds, subsets, subsets)
def test_partial_transposes_compose(seed, s1, s2):
    rng = np.random.default_rng(seed)
    op = random_op(rng, [aux(x) for x in LABELS])
    sym = sorted(set(s1) ^ set(s2))
    assert residual(op.transpose(s1).transpose(s2), op.transpose(sym)) == 0.0


@settings(max_examples=40, deadline=None)
@given(seeds, st.permutations(LABELS))
def test_reorder_round_trip(seed, perm):
    rng = np.random.default_rng(seed)
    op = random_op(rng, [aux(x) for x in LABELS])
    back = op.reorder(perm).reorder(LABELS)
    assert np.array_equal(back.matrix, op.matrix)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_trace_of_embedded_operator_scales_by_dim(seed):
    rng = np.random.default_rng(seed)
    op = random_op(rng, [aux("a", 2), aux("b", 3)])
    big = embed(op, [aux("c", 2), aux("a", 2), aux("b", 3)])
    assert residual(big.trace(["c"]), op * 2) < 1e-14


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_trace_is_cyclic_on_the_traced_space(seed):
    rng = np.random.default_rng(seed)
    A = random_op(rng, [aux("a"), aux("b")])
    B = random_op(rng, [aux("a"), aux("b")])
    assert residual((A @ B).trace(["a", "b"]), (B @ A).trace(["a", "b"])) < 1e-12


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_operators_on_disjoint_spaces_commute(seed):
    rng = np.random.default_rng(seed)
    A = random_op(rng, [aux("a")])
    B = random_op(rng, [aux("b"), quantum("q")])
    assert commutator_residual(A, B) < 1e-15


def test_compose_and_product_agree():
    rng = np.random.default_rng(1)
    ops = [random_op(rng, [aux(x), aux(y)]) for x, y in (("a", "b"), ("b", "c"), ("a", "c"))]
    assert residual(ops[0] @ ops[1] @ ops[2], product(ops)) < 1e-14


def test_identity_and_scalar():
    rng = np.random.default_rng(2)
    op = random_op(rng, [aux("a"), aux("b")])
    assert residual(MultiOp.identity([aux("b")]) @ op, op) == 0.0
    assert MultiOp.scalar(3 + 1j).value() == 3 + 1j
    assert op.trace().spaces == ()


def test_permutation_swaps_legs():
    a, b = aux("a"), aux("b")
    rng = np.random.default_rng(3)
    x, y = rng.normal(size=(2, 2)), rng.normal(size=(2, 2))
    P = MultiOp.permutation(a, b)
    xy = MultiOp((a, b), np.kron(x, y))
    yx = MultiOp((a, b), np.kron(y, x))
    assert residual(P @ xy @ P, yx) < 1e-15


def test_proportionality_scalar():
    op = MultiOp.identity([aux("a"), aux("b")]) * (2 - 1j)
    z, dev = proportionality_scalar(op)
    assert z == 2 - 1j and dev == 0.0


def test_residual_is_symmetric_and_relative():
    a = MultiOp.identity([aux("a")])
    b = a * 1.5
    assert residual(a, b) == residual(b, a) == pytest.approx(1 / 3)


def test_dump_round_trip():
    rng = np.random.default_rng(4)
    op = random_op(rng, [aux("n0", 2, 0.3 - 0.1j), quantum("q1", 2), aux("x", 3)])
    text = dumps(op)
    assert text.startswith("spaces: n0:2:auxiliary:0.3,-0.1 q1:2:quantum x:3:auxiliary\n")
    back = loads(text)
    assert back.spaces == op.spaces and np.array_equal(back.matrix, op.matrix)
    assert dumps(back) == text


def test_loads_rejects_missing_header():
    with pytest.raises(ValueError):
        loads("1 0\n")


def test_errors():
    with pytest.raises(SpaceError):
        MultiOp((aux("a"), aux("a")), np.eye(4))
    with pytest.raises(SpaceError):
        MultiOp((aux("a"),), np.eye(3))
    with pytest.raises(SpaceError):
        MultiOp.identity([aux("a")]).trace(["z"])
    with pytest.raises(SpaceError):
        compose(MultiOp.identity([aux("a", 2)]), MultiOp.identity([aux("a", 3)]))
    with pytest.raises(SpaceError):
        Space("q", 2, Kind.QUANTUM, 0.5)
    with pytest.raises(SpaceError):
        _ = aux("a").lam
    with pytest.raises(SpaceError):
        MultiOp.identity([aux("a")]).value()


def test_index_set_bar_is_involution():
    N = IndexSet.of(["1", "2", "3"], [0.1, 0.2, 0.3])
    assert N.bar().labels == ("3", "2", "1")
    assert N.bar().bar() == N
    assert N.bar().spectral == (0.3, 0.2, 0.1)
    assert N[1:].labels == ("2", "3")
    assert N.with_spectral(1.0).spectral == (1, 1, 1)
    with pytest.raises(SpaceError):
        IndexSet.of(["1", "1"], 0.0)


# -- brute-force oracle --------------------------------------------------------


def _triple(op):
    return list(op.labels), list(op.dims), op.matrix


def _close(x, y, tol=1e-14):
    return np.linalg.norm(x - y) <= tol * max(np.linalg.norm(x), np.linalg.norm(y), 1.0)


@pytest.mark.parametrize("seed", range(10))
def test_kernels_match_index_loop_oracle(seed):
    rng = np.random.default_rng(1000 + seed)
    spaces = [aux(x) for x in LABELS]
    order = list(rng.permutation(3))
    A = random_op(rng, [spaces[i] for i in order[:2]])
    B = random_op(rng, [spaces[i] for i in order[1:]])
    target = [spaces[i] for i in rng.permutation(3)]
    tl, td = [s.label for s in target], [2, 2, 2]
    assert _close(embed(A, target).matrix, oracle.embed(*_triple(A), tl, td))

    C = compose(A, B)
    labels, _, ref = oracle.compose(*_triple(A), *_triple(B))
    assert list(C.labels) == labels and _close(C.matrix, ref)

    sub = [LABELS[i] for i in range(3) if rng.random() < 0.5]
    assert _close(partial_transpose(C, sub).matrix, oracle.partial_transpose(*_triple(C), sub))
    kept, ref = oracle.partial_trace(*_triple(C), sub)
    T = partial_trace(C, sub)
    assert list(T.labels) == kept and _close(T.matrix, ref)


@settings(max_examples=30, deadline=None)
@given(seeds, st.permutations(LABELS))
def test_embed_is_a_homomorphism(seed, order):
    rng = np.random.default_rng(seed)
    A = random_op(rng, [aux("a"), aux("b")])
    B = random_op(rng, [aux("a"), aux("b")])
    target = [aux(x) for x in order]
    lhs = embed(A @ B, target)
    rhs = MultiOp(tuple(target), embed(A, target).matrix @ embed(B, target).matrix)
    assert residual(lhs, rhs) < 1e-14


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_trace_commutes_with_untraced_factor(seed):
    rng = np.random.default_rng(seed)
    A = random_op(rng, [aux("a"), aux("b"), aux("c")])
    C = random_op(rng, [aux("c")])
    assert residual(partial_trace(A @ C, ["a", "b"]), partial_trace(A, ["a", "b"]) @ C) < 1e-13


@settings(max_examples=30, deadline=None)
@given(seeds, subsets)
def test_transpose_is_invisible_under_trace_of_same_subset(seed, sub):
    rng = np.random.default_rng(seed)
    A = random_op(rng, [aux(x) for x in LABELS])
    assert residual(partial_trace(partial_transpose(A, sub), sub), partial_trace(A, sub)) < 1e-14


def test_residual_floor():
    zero = MultiOp.identity([aux("a")]) * 0
    assert residual(zero, zero) == 0.0
