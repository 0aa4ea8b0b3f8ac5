"""Reflection and dual reflection solutions, and their fusion.

Conventions fixed here:

* ``T(lam) = L(lam) K(lam) L(-lam)^{-1}`` with ``L(lam) = R_{a q_n}(lam - theta_n) ... R_{a q_1}(lam - theta_1)``.
  Using ``L(lam)^{-1}`` on the right (the form usually quoted) does not solve
  the reflection equation for a non-scalar ``K``; the reflected argument does.
* ``K+(lam) = K(-lam - rho)^t M`` is the first dual candidate, ``K+ = M`` the fallback.
* ``T0`` (fused direct solution): ``T_1 R_21 ... R_n1 T_2 R_32 ... T_n`` at sums of spectral values.
* ``K0`` (fused dual solution): ``K_n M_{n-1} R_{n-1,n} M_{n-1}^{-1} K_{n-1} ... K_1``
  at ``-lam_i - lam_j - 2 rho``.

Only c-number ``K`` and ``K+`` are built, so the transposition acting on their
quantum entries is the identity.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .checks import TOL_AXIOM, TOL_COMPOSITE, AxiomReport, Check, gather
from .fused_r import DIFF, NEGSUM2RHO, R_, REVDIFF, SUM, M_on, Minv_on
from .rmodel import CertificationError, RModel, sample_spectral
from .tensor_core import IndexSet, MultiOp, Space, aux, commutator_residual, product, quantum, residual

KFamily = Callable[[complex], np.ndarray]
OpFamily = Callable[[Space, complex], MultiOp]

TOL_T = 1e-11


# -- single-space reflection equations -------------------------------------


def re_sides(model: RModel, T: OpFamily, l1: complex, l2: complex) -> tuple[MultiOp, MultiOp]:
    """Both sides of the reflection equation for a family ``T(space, lam)``."""
    a, b = aux("1", model.local_dim, l1), aux("2", model.local_dim, l2)
    lhs = product([model.R(a, b, l1 - l2), T(a, l1), model.R(b, a, l1 + l2), T(b, l2)])
    rhs = product([T(b, l2), model.R(a, b, l1 + l2), T(a, l1), model.R(b, a, l1 - l2)])
    return lhs, rhs


def red_sides(model: RModel, Kp: OpFamily, l1: complex, l2: complex) -> tuple[MultiOp, MultiOp]:
    """Both sides of the dual reflection equation."""
    d = model.local_dim
    a, b = aux("1", d, l1), aux("2", d, l2)
    r2 = 2 * model.rho
    M, Mi = model.M_op(a), model.Minv_op(a)
    lhs = product([model.R(a, b, -l1 + l2), Kp(a, l1), Mi, model.R(b, a, -l1 - l2 - r2), M, Kp(b, l2)])
    rhs = product([Kp(b, l2), M, model.R(a, b, -l1 - l2 - r2), Mi, Kp(a, l1), model.R(b, a, -l1 + l2)])
    return lhs, rhs


def _family_op(fn: KFamily) -> OpFamily:
    return lambda s, lam: MultiOp((s,), fn(lam))


def _pairs(model: RModel, count: int, seed: int):
    return sample_spectral(model, count=count, arity=2, seed=seed)


def certify_k(model: RModel, K: KFamily, count: int = 10, seed: int = 7, tol: float = TOL_AXIOM) -> Check:
    op = _family_op(K)
    return gather("re", "c-number K solves the reflection equation", [residual(*re_sides(model, op, x, y)) for x, y in _pairs(model, count, seed)], tol)


def certify_k_plus(model: RModel, Kp: KFamily, count: int = 10, seed: int = 8, tol: float = TOL_AXIOM) -> Check:
    op = _family_op(Kp)
    return gather("red", "c-number K+ solves the dual reflection equation", [residual(*red_sides(model, op, x, y)) for x, y in _pairs(model, count, seed)], tol)


def diagonal_k(model: RModel, xi: complex) -> KFamily:
    """The model's diagonal boundary family at parameter ``xi``, certified against (re)."""
    if model.k_family is None:
        raise CertificationError(model.name, "re", float("nan"))
    fam = model.k_family
    xi = complex(xi)

    def K(lam: complex) -> np.ndarray:
        return np.asarray(fam(complex(lam), xi), dtype=complex)

    row = certify_k(model, K)
    if not row.passed:
        raise CertificationError(model.name, "re", row.residual)
    return K


def identity_k(model: RModel) -> KFamily:
    eye = np.eye(model.local_dim, dtype=complex)
    return lambda lam: eye


def dual_k_from_k(model: RModel, K: KFamily) -> tuple[KFamily, str]:
    """Certified ``K+``: first ``K(-lam-rho)^t M``, then the constant ``M``."""
    rho, M = model.rho, model.M

    def crossed(lam: complex) -> np.ndarray:
        return K(-lam - rho).T @ M

    candidates = [("K(-lam-rho)^t M", crossed), ("M", lambda lam: M)]
    worst = float("inf")
    for name, fn in candidates:
        row = certify_k_plus(model, fn)
        if row.passed:
            return fn, name
        worst = min(worst, row.residual)
    raise CertificationError(model.name, "red", worst)


# -- quantum realization ---------------------------------------------------


def monodromy(model: RModel, a: Space, lam: complex, sites: Sequence[Space], thetas: Sequence[complex]) -> MultiOp:
    """``L_a(lam) = R_{a q_n}(lam - theta_n) ... R_{a q_1}(lam - theta_1)``."""
    out = MultiOp.identity([a, *sites])
    for s, th in zip(sites, thetas):
        out = MultiOp((a, s), model.kernel(complex(lam - th))) @ out
    return out


@dataclass(frozen=True)
class ReflectionData:
    """A c-number boundary pair ``(K, K+)`` dressed by a chain of quantum sites."""

    model: RModel
    xi: complex
    K: KFamily = field(repr=False)
    K_plus: KFamily = field(repr=False)
    quantum: tuple[Space, ...] = ()
    thetas: tuple[complex, ...] = ()
    k_choice: str = "diagonal"
    k_plus_choice: str = ""

    def K_op(self, a: Space, lam: complex | None = None) -> MultiOp:
        return MultiOp((a,), self.K(a.lam if lam is None else lam))

    def K_plus_op(self, a: Space, lam: complex | None = None) -> MultiOp:
        return MultiOp((a,), self.K_plus(a.lam if lam is None else lam))

    def L(self, a: Space, lam: complex) -> MultiOp:
        return monodromy(self.model, a, lam, self.quantum, self.thetas)

    def T(self, a: Space, lam: complex | None = None) -> MultiOp:
        lam = a.lam if lam is None else lam
        right = self.L(a, -lam)
        return product([self.L(a, lam), self.K_op(a, lam), right.inv()])

    def condition(self, lam: complex) -> float:
        """Condition number of the inverted monodromy at ``lam``."""
        return float(np.linalg.cond(self.L(aux("0", self.model.local_dim), -lam).matrix))

    @property
    def quantum_dim(self) -> int:
        return int(np.prod([s.dim for s in self.quantum])) if self.quantum else 1


def build_T(model: RModel, K: KFamily, sites: Sequence[Space], thetas: Sequence[complex]) -> OpFamily:
    data = ReflectionData(model, 0, K, K, tuple(sites), tuple(complex(t) for t in thetas))
    return data.T


def make_reflection_data(
    model: RModel,
    xi: complex = 0.7 + 0.1j,
    sites: int = 1,
    thetas: Sequence[complex] | None = None,
    k_choice: Literal["diagonal", "identity"] = "diagonal",
    certify_T: bool = True,
) -> ReflectionData:
    """Assemble and certify ``K``, ``K+`` and the quantum ``T`` on ``sites`` sites."""
    K = diagonal_k(model, xi) if k_choice == "diagonal" else identity_k(model)
    Kp, kp_name = dual_k_from_k(model, K)
    if thetas is None:
        thetas = [0.2 - 0.3j, -0.4 + 0.1j, 0.15 + 0.25j, -0.1 - 0.2j][:sites]
    if len(thetas) != sites:
        raise ValueError(f"{sites} sites need {sites} inhomogeneities, got {len(thetas)}")
    qs = tuple(quantum(f"q{i + 1}", model.local_dim) for i in range(sites))
    data = ReflectionData(model, complex(xi), K, Kp, qs, tuple(complex(t) for t in thetas), k_choice, kp_name)
    if certify_T and sites:
        row = certify_T_row(data)
        if not row.passed:
            raise CertificationError(model.name, "re[T]", row.residual)
    return data


def certify_T_row(data: ReflectionData, count: int = 5, seed: int = 9, tol: float = TOL_T) -> Check:
    rs = [residual(*re_sides(data.model, data.T, x, y)) for x, y in _pairs(data.model, count, seed)]
    return gather("re[T]", "T = L(lam) K L(-lam)^-1 solves the reflection equation", rs, tol)


def transfer_matrix(data: ReflectionData, lam: complex) -> MultiOp:
    """``t(lam) = Tr_a (K+_a(lam) T_a(lam))`` on the quantum spaces."""
    a = aux("0", data.model.local_dim, lam)
    return (data.K_plus_op(a) @ data.T(a)).trace([a.label])


def reflection_report(data: ReflectionData, count: int = 10, seed: int = 7) -> AxiomReport:
    m = data.model
    rows = [certify_k(m, data.K, count, seed), certify_k_plus(m, data.K_plus, count, seed + 1)]
    if data.quantum:
        rows.append(certify_T_row(data, count=5, seed=seed + 2))
        rs = []
        for x, y in _pairs(m, 5, seed + 3):
            rs.append(commutator_residual(transfer_matrix(data, x), transfer_matrix(data, y)))
        rows.append(gather("com0", "[t(lam), t(mu)] = 0", rs, TOL_T))
    conds = [data.condition(x) for x, _ in _pairs(m, 3, seed)] if data.quantum else []
    return AxiomReport(
        rows,
        {
            "xi": data.xi,
            "k_choice": data.k_choice,
            "k_plus_choice": data.k_plus_choice,
            "L_condition_max": max(conds) if conds else 1.0,
        },
    )


# -- fused solutions -------------------------------------------------------


def t0_product(model: RModel, N: IndexSet, T: OpFamily) -> MultiOp:
    """``T_1 R_21(l1+l2) ... R_n1(l1+ln) T_2 R_32 ... T_n`` for any family ``T``."""
    ops: list[MultiOp] = []
    for k, a in enumerate(N):
        ops.append(T(a, a.lam))
        for b in N[k + 1 :]:
            ops.append(model.R(b, a, a.lam + b.lam))
    return product(ops)


def k0_product(model: RModel, N: IndexSet, Kp: OpFamily) -> MultiOp:
    """``K_n M_{n-1} R_{n-1,n} M^{-1}_{n-1} K_{n-1} ... K_1`` at ``-li - lj - 2 rho``."""
    r2 = 2 * model.rho
    n = len(N)
    ops = [Kp(N[n - 1], N[n - 1].lam)]
    for k in range(n - 2, -1, -1):
        a = N[k]
        ops.append(model.M_op(a))
        for j in range(n - 1, k, -1):
            b = N[j]
            ops.append(model.R(a, b, -a.lam - b.lam - r2))
        ops.append(model.Minv_op(a))
        ops.append(Kp(a, a.lam))
    return product(ops)


@dataclass(frozen=True)
class FusedSolution:
    kind: Literal["T0", "K0"]
    index_set: IndexSet
    op: MultiOp
    data: ReflectionData = field(repr=False)

    @property
    def spectral(self) -> tuple[complex, ...]:
        return self.index_set.spectral

    def rebuild(self) -> MultiOp:
        builder = fuse_T0 if self.kind == "T0" else fuse_K0
        return builder(self.data, self.index_set).op


def fuse_T0(data: ReflectionData, N: IndexSet) -> FusedSolution:
    _check_dims(data, N)
    return FusedSolution("T0", N, t0_product(data.model, N, data.T), data)


def fuse_K0(data: ReflectionData, N: IndexSet) -> FusedSolution:
    _check_dims(data, N)
    if abs(np.linalg.det(data.model.M)) < 1e-300:
        raise ValueError("singular M")
    return FusedSolution("K0", N, k0_product(data.model, N, data.K_plus_op), data)


def _check_dims(data: ReflectionData, N: IndexSet) -> None:
    for s in N:
        if s.dim != data.model.local_dim:
            raise ValueError(f"space {s.label!r} has dim {s.dim}, model needs {data.model.local_dim}")
        if s.spectral is None:
            raise ValueError(f"space {s.label!r} has no spectral value")


# -- generalized reflection equations ---------------------------------------


def greq_sides(model: RModel, TN: MultiOp, TM: MultiOp, N: IndexSet, Mp: IndexSet):
    lhs = product([TN, R_(model, Mp, N, SUM), TM, R_(model, N.bar(), Mp, REVDIFF)])
    rhs = product([R_(model, Mp, N.bar(), DIFF), TM, R_(model, N, Mp, SUM), TN])
    return lhs, rhs


def greqd_sides(model: RModel, KN: MultiOp, KM: MultiOp, N: IndexSet, Mp: IndexSet):
    MM, MMi = M_on(model, Mp), Minv_on(model, Mp)
    lhs = product([KN, MM, R_(model, Mp.bar(), N.bar(), NEGSUM2RHO), MMi, KM, R_(model, N, Mp.bar(), DIFF)])
    rhs = product([R_(model, Mp.bar(), N, REVDIFF), KM, MMi, R_(model, N.bar(), Mp.bar(), NEGSUM2RHO), MM, KN])
    return lhs, rhs


def greq_residual(data: ReflectionData, N: IndexSet, Mp: IndexSet) -> float:
    return residual(*greq_sides(data.model, fuse_T0(data, N).op, fuse_T0(data, Mp).op, N, Mp))


def greqd_residual(data: ReflectionData, N: IndexSet, Mp: IndexSet) -> float:
    return residual(*greqd_sides(data.model, fuse_K0(data, N).op, fuse_K0(data, Mp).op, N, Mp))


def greq3_chain(data: ReflectionData, N: IndexSet, Mp: IndexSet) -> list[tuple[str, float]]:
    """Replay the recursion step behind the fused direct solutions.

    ``N`` is split as ``{1}`` plus ``N^-``.  The decoupled left side is
    rewritten by the exchange relation for ``N^-, M'``, two fused
    Yang-Baxter moves and the exchange relation for ``{1}, M'``; every
    intermediate expression is compared with its predecessor.  The first two
    rows compare the decoupled sides with the undecoupled ones.
    """
    if len(N) < 2:
        raise ValueError("the recursion step needs card N >= 2")
    m = data.model
    one, Nm = IndexSet((N[0],)), IndexSet(tuple(N[1:]))
    T1 = data.T(N[0])
    TNm = fuse_T0(data, Nm).op
    TM = fuse_T0(data, Mp).op
    TN = fuse_T0(data, N).op
    R = lambda A, B, rule: R_(m, A, B, rule)

    lhs, rhs = greq_sides(m, TN, TM, N, Mp)
    e0 = product([T1, R(Nm, one, SUM), TNm, R(Mp, one, SUM), R(Mp, Nm, SUM), TM, R(Nm.bar(), Mp, REVDIFF), R(one, Mp, REVDIFF)])
    end = product([R(Mp, Nm.bar(), DIFF), R(Mp, one, DIFF), TM, R(one, Mp, SUM), R(Nm, Mp, SUM), T1, R(Nm, one, SUM), TNm])
    # exchange relation for N^- and M'
    e1 = product([T1, R(Nm, one, SUM), R(Mp, one, SUM), R(Mp, Nm.bar(), DIFF), TM, R(Nm, Mp, SUM), TNm, R(one, Mp, REVDIFF)])
    # first fused Yang-Baxter move
    e2 = product([T1, R(Mp, Nm.bar(), DIFF), R(Mp, one, SUM), R(Nm, one, SUM), TM, R(Nm, Mp, SUM), TNm, R(one, Mp, REVDIFF)])
    # second fused Yang-Baxter move
    e3 = product([T1, R(Mp, Nm.bar(), DIFF), R(Mp, one, SUM), TM, R(one, Mp, REVDIFF), R(Nm, Mp, SUM), R(Nm, one, SUM), TNm])
    # exchange relation for {1} and M'
    e4 = product([R(Mp, Nm.bar(), DIFF), R(Mp, one, DIFF), TM, R(one, Mp, SUM), T1, R(Nm, Mp, SUM), R(Nm, one, SUM), TNm])
    return [
        ("decoupled-lhs", residual(e0, lhs)),
        ("decoupled-rhs", residual(end, rhs)),
        ("step1-exchange(N-,M')", residual(e1, e0)),
        ("step2-fyb1", residual(e2, e1)),
        ("step3-fyb2", residual(e3, e2)),
        ("step4-exchange(1,M')", residual(e4, e3)),
        ("final", residual(e4, end)),
    ]


def duality_residual(data: ReflectionData, N: IndexSet) -> float:
    """``K0_N(lam) = T0_N(-lam - rho)^{t_N}`` with the direct builder fed ``mu -> K+(-mu-rho)^t``."""
    m = data.model
    k0 = fuse_K0(data, N).op
    reflected = N.map_spectral(lambda lam: -lam - m.rho)
    fam = lambda s, mu: MultiOp((s,), data.K_plus(-mu - m.rho).T)
    t0 = t0_product(m, reflected, fam)
    return residual(k0, t0.transpose(list(N.labels)))


def fused_reflection_report(
    data: ReflectionData,
    cards: Sequence[tuple[int, int]] = ((1, 1), (2, 1), (1, 2), (2, 2)),
    count: int = 5,
    seed: int = 11,
    tol: float = TOL_COMPOSITE,
) -> AxiomReport:
    """(greq), (greqd), the recursion step and duality over card pairs."""
    rng = np.random.default_rng(seed)
    d = data.model.local_dim
    rows: list[Check] = []
    for n, k in cards:
        g, gd, steps = [], [], []
        for _ in range(count):
            N = IndexSet.of([f"n{i}" for i in range(n)], _spectral(rng, n), d)
            Mp = IndexSet.of([f"m{i}" for i in range(k)], _spectral(rng, k), d)
            g.append(greq_residual(data, N, Mp))
            gd.append(greqd_residual(data, N, Mp))
            if n >= 2:
                steps.append(max(r for _, r in greq3_chain(data, N, Mp)))
        rows.append(gather(f"greq[{n},{k}]", f"generalized reflection equation, card {n},{k}", g, tol))
        rows.append(gather(f"greqd[{n},{k}]", f"generalized dual reflection equation, card {n},{k}", gd, tol))
        if steps:
            rows.append(gather(f"greq3[{n},{k}]", "recursion-step chain", steps, TOL_T))
    for n in sorted({c for pair in cards for c in pair}):
        rs = [duality_residual(data, IndexSet.of([f"n{i}" for i in range(n)], _spectral(rng, n), d)) for _ in range(count)]
        rows.append(gather(f"duality[{n}]", "K0(lam) = T0(-lam-rho)^t", rs, tol))
    return AxiomReport(rows, {})


def _spectral(rng: np.random.Generator, n: int) -> list[complex]:
    return list(0.6 * rng.normal(size=n) + 0.6j * rng.normal(size=n))


__all__ = [
    "FusedSolution",
    "ReflectionData",
    "build_T",
    "certify_T_row",
    "certify_k",
    "certify_k_plus",
    "diagonal_k",
    "dual_k_from_k",
    "duality_residual",
    "fuse_K0",
    "fuse_T0",
    "fused_reflection_report",
    "greq3_chain",
    "greq_residual",
    "greq_sides",
    "greqd_residual",
    "greqd_sides",
    "identity_k",
    "k0_product",
    "make_reflection_data",
    "monodromy",
    "re_sides",
    "red_sides",
    "reflection_report",
    "t0_product",
    "transfer_matrix",
]
