"""Commuting traces for Yang-Baxter type algebras: the warm-up construction.

A solution ``L_N`` of the generalized fundamental equation

    R_{N bar M'}(lam_N - lam_bar M') L_N L_M' = L_M' L_N R_{N bar M'}(...)

is the product of single-space monodromies ``L_1(lam_1) ... L_n(lam_n)``
sharing the quantum sites.  A dressing on the left by operators acting only on
auxiliary spaces keeps the relation; its trace over ``N`` commutes for
disjoint sets.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .checks import TOL_COMPOSITE, AxiomReport, gather
from .fused_r import DIFF, R_
from .reflection import monodromy
from .rmodel import RModel
from .tensor_core import IndexSet, Kind, MultiOp, Space, aux, commutator_residual, product, residual


@dataclass(frozen=True)
class TraceOperator:
    """An operator on quantum spaces obtained by tracing out ``index_set``."""

    index_set: IndexSet
    op: MultiOp
    dressing: object | None = None
    provenance: str = ""

    def __post_init__(self):
        stray = [s.label for s in self.op.spaces if s.kind is Kind.AUXILIARY]
        if stray:
            raise ValueError(f"trace operator still carries auxiliary spaces {stray}")

    @property
    def spectral(self) -> tuple[complex, ...]:
        return self.index_set.spectral


@dataclass(frozen=True)
class YBSolution:
    model: RModel = field(repr=False)
    index_set: IndexSet
    quantum_spaces: tuple[Space, ...]
    thetas: tuple[complex, ...]
    op: MultiOp
    dressing: MultiOp | None = None

    def undressed(self) -> MultiOp:
        return _lax_product(self.model, self.index_set, self.quantum_spaces, self.thetas)

    def dressed(self) -> MultiOp:
        return self.op if self.dressing is None else self.dressing @ self.op

    def with_dressing(self, q: MultiOp | None) -> YBSolution:
        if q is not None and any(s.label not in self.index_set.labels for s in q.spaces):
            raise ValueError("a dressing acts on the auxiliary spaces of its own set only")
        return YBSolution(self.model, self.index_set, self.quantum_spaces, self.thetas, self.op, q)


def _lax_product(model: RModel, N: IndexSet, sites: Sequence[Space], thetas: Sequence[complex]) -> MultiOp:
    return product([monodromy(model, a, a.lam, sites, thetas) for a in N])


def build_yb_solution(model: RModel, N: IndexSet, sites: Sequence[Space], thetas: Sequence[complex]) -> YBSolution:
    """``L_1(lam_1) ... L_n(lam_n)`` with every ``L_i`` running over all quantum sites."""
    for s in (*N, *sites):
        if s.dim != model.local_dim:
            raise ValueError(f"space {s.label!r} has dim {s.dim}, model needs {model.local_dim}")
    if len(thetas) != len(sites):
        raise ValueError("one inhomogeneity per quantum site")
    sites, thetas = tuple(sites), tuple(complex(t) for t in thetas)
    return YBSolution(model, N, sites, thetas, _lax_product(model, N, sites, thetas))


def gybe_residual(a: YBSolution, b: YBSolution) -> float:
    """Residual of the generalized fundamental equation for ``N = a``, ``M' = b``."""
    R = R_(a.model, a.index_set, b.index_set.bar(), DIFF)
    La, Lb = a.dressed(), b.dressed()
    return residual(product([R, La, Lb]), product([Lb, La, R]))


def check_dress0(model: RModel, candidate: MultiOp, l1: complex, l2: complex, probe: Space) -> float:
    """Residual of ``C_12 R_13(l1 - l3) R_23(l2 - l3) = R_13 R_23 C_12`` for a candidate ``C``.

    ``candidate`` must act on two auxiliary spaces only; they play the roles
    of spaces 1 and 2 in the order they are listed.
    """
    if len(candidate.spaces) != 2:
        raise ValueError("candidate must act on exactly two auxiliary spaces")
    s1, s2 = candidate.spaces
    l3 = probe.lam
    rr = product([model.R(s1, probe, l1 - l3), model.R(s2, probe, l2 - l3)])
    return residual(candidate @ rr, rr @ candidate)


def check_r(model: RModel, a: Space, b: Space, lam: complex) -> MultiOp:
    """``Pi_ab R_ab(lam)`` where ``Pi`` only swaps the vector spaces."""
    return MultiOp.permutation(a, b) @ model.R(a, b, lam)


def yb_trace(sol: YBSolution) -> TraceOperator:
    """``Tr_N`` of the (possibly dressed) solution."""
    op = sol.dressed().trace(list(sol.index_set.labels))
    return TraceOperator(sol.index_set, op, sol.dressing, "yb")


def yb_report(model: RModel, sites: Sequence[Space], thetas: Sequence[complex], seed: int = 5, count: int = 3) -> AxiomReport:
    """(gybe) and commutation of traces for every card pair with total at most 4."""
    rng = np.random.default_rng(seed)
    d = model.local_dim
    rows = []
    for n, k in ((1, 1), (2, 1), (1, 2), (2, 2), (3, 1), (1, 3)):
        g, c = [], []
        for _ in range(count):
            N = IndexSet.of([f"n{i}" for i in range(n)], list(0.6 * rng.normal(size=n) + 0.6j * rng.normal(size=n)), d)
            Mp = IndexSet.of([f"m{i}" for i in range(k)], list(0.6 * rng.normal(size=k) + 0.6j * rng.normal(size=k)), d)
            a, b = build_yb_solution(model, N, sites, thetas), build_yb_solution(model, Mp, sites, thetas)
            g.append(gybe_residual(a, b))
            c.append(commutator_residual(yb_trace(a).op, yb_trace(b).op))
        rows.append(gather(f"gybe[{n},{k}]", f"generalized fundamental equation, card {n},{k}", g, TOL_COMPOSITE))
        rows.append(gather(f"trace[{n},{k}]", f"[H_N, H_M'] for Yang-Baxter traces, card {n},{k}", c, TOL_COMPOSITE))
    return AxiomReport(rows, {})


def coincident_pair(label_a: str, label_b: str, lam: complex, d: int = 2) -> tuple[Space, Space]:
    return aux(label_a, d, lam), aux(label_b, d, lam)


__all__ = [
    "TraceOperator",
    "YBSolution",
    "build_yb_solution",
    "check_dress0",
    "check_r",
    "coincident_pair",
    "gybe_residual",
    "yb_report",
    "yb_trace",
]
