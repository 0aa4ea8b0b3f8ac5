"""Dressings, quantum traces and the checks built on them.

``H_N = Tr_N(Q_N K0_N T0_N)`` with ``Q_N`` an optional dressing acting on the
auxiliary spaces only.  ``K0`` is a c-number, so its quantum transposition is
trivial.

Two facts shape this module:

* A regular ``R`` has ``R(0) = c P``, so the check-R dressing at coincident
  spectral values, ``Pi R(0)``, is the scalar ``c``.  The bare permutation does
  not commute with the fused ``R``-matrices and fails certification;
  ``dressing_commutant`` shows the admissible dressings are scalars at card 2.
* Undressed traces factorize as ``H_N = prod_{i<j} Z(lam_i + lam_j) prod_i t(lam_i)``,
  where ``Z`` is the crossing-unitarity scalar.  The scalars are carried
  explicitly since ``R`` is not normalized.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from itertools import pairwise
from typing import Literal

import numpy as np

from .checks import TOL_COMPOSITE, AxiomReport, Check, gather
from .fused_r import DIFF, NEGSUM2RHO, R_, REVDIFF, SUM, ArgRule, M_on, Minv_on, pairwise_scalars
from .reflection import (
    ReflectionData,
    certify_k_plus,
    diagonal_k,
    fuse_K0,
    fuse_T0,
    greq_sides,
    greqd_sides,
    transfer_matrix,
)
from .rmodel import RModel, rational_gl_model
from .tensor_core import (
    IndexSet,
    MultiOp,
    commutator_residual,
    product,
    proportionality_scalar,
    quantum,
    residual,
)
from .yb_traces import TraceOperator

NEGSUM = ArgRule(-1, -1, 0, "negsum")
TOL_DRESS = 1e-11


# -- dressings ---------------------------------------------------------------


@dataclass(frozen=True)
class DressingOp:
    side: Literal["Q", "S"]
    index_set: IndexSet
    op: MultiOp
    descriptor: str
    report: AxiomReport = field(default_factory=AxiomReport, repr=False)

    def __post_init__(self):
        extra = set(self.op.labels) - set(self.index_set.labels)
        if extra:
            raise ValueError(f"dressing acts outside its auxiliary spaces: {sorted(extra)}")

    @property
    def certified(self) -> bool:
        return bool(self.report.rows) and self.report.passed


class DressingError(ValueError):
    pass


def _probe_sets(model: RModel, N: IndexSet, sizes=(1, 2), seed: int = 3) -> list[IndexSet]:
    rng = np.random.default_rng(seed)
    out = []
    for k in sizes:
        lam = list(0.7 * rng.normal(size=k) + 0.7j * rng.normal(size=k))
        out.append(IndexSet.of([f"p{i}" for i in range(k)], lam, model.local_dim))
    for p in out:
        if not p.isdisjoint(N):
            raise ValueError("probe labels collide with the dressed set")
    return out


def dress_conditions(model: RModel, N: IndexSet, Mp: IndexSet, side: Literal["Q", "S"]) -> list[MultiOp]:
    """The fused ``R``-matrices a dressing must commute with."""
    if side == "Q":
        return [R_(model, Mp, N, SUM), R_(model, Mp, N, REVDIFF), R_(model, N.bar(), Mp, REVDIFF), R_(model, N.bar(), Mp, NEGSUM)]
    return [R_(model, N, Mp, SUM), R_(model, N, Mp, DIFF), R_(model, Mp, N.bar(), DIFF), R_(model, Mp, N.bar(), NEGSUM)]


def certify_dressing(model: RModel, op: MultiOp, N: IndexSet, side: Literal["Q", "S"] = "Q", tol: float = TOL_DRESS) -> AxiomReport:
    tag = "dress" if side == "Q" else "dress1"
    rows = []
    for Mp in _probe_sets(model, N):
        rs = [commutator_residual(op, r) for r in dress_conditions(model, N, Mp, side)]
        rows.append(gather(f"{tag}[{len(N)},{len(Mp)}]", f"dressing commutes with fused R, probe card {len(Mp)}", rs, tol))
    return AxiomReport(rows, {})


def dressing_commutant(model: RModel, N: IndexSet, side: Literal["Q", "S"] = "Q", tol: float = 1e-9) -> int:
    """Dimension of the space of operators on ``N`` meeting every dressing condition.

    Solves ``[X, R] = 0`` on the ``N`` block for all probe conditions at once;
    a result of 1 means only scalars qualify.
    """
    d = int(np.prod([s.dim for s in N]))
    blocks = []
    for Mp in _probe_sets(model, N):
        for r in dress_conditions(model, N, Mp, side):
            r = r.reorder([*N.labels, *Mp.labels]).matrix
            e = r.shape[0] // d
            # X acts as X (x) 1_e; vec(X R - R X) is linear in vec(X)
            basis = []
            for k in range(d * d):
                x = np.zeros(d * d, dtype=complex)
                x[k] = 1
                X = np.kron(x.reshape(d, d), np.eye(e))
                basis.append((X @ r - r @ X).ravel())
            blocks.append(np.array(basis).T)
    A = np.vstack(blocks)
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(s <= tol * s[0])) + max(0, d * d - len(s))


def _chain(N: IndexSet, factor) -> MultiOp:
    ops = [factor(N[i], N[i + 1]) for i in range(len(N) - 1)]
    return product(ops) if ops else MultiOp.identity(list(N))


def coincident_candidates(model: RModel, N: IndexSet) -> list[tuple[str, MultiOp]]:
    return [
        ("coincident_check_r", _chain(N, lambda a, b: MultiOp.permutation(a, b) @ model.R(a, b, 0))),
        ("coincident_permutation", _chain(N, MultiOp.permutation)),
    ]


def coincident_dressing(model: RModel, N: IndexSet) -> DressingOp:
    """Check-R product at coincident spectral values, certified against (dress).

    Candidates are the products of ``Pi R(0)`` and of bare ``Pi``; the first
    one that certifies is returned.
    """
    lams = N.spectral
    if any(abs(x - lams[0]) > 1e-14 for x in lams):
        raise DressingError("coincident dressing needs equal spectral values in the set")
    if len(N) == 1:
        return DressingOp("Q", N, MultiOp.identity(list(N)), "identity", certify_dressing(model, MultiOp.identity(list(N)), N))
    worst = {}
    for name, op in coincident_candidates(model, N):
        rep = certify_dressing(model, op, N)
        if rep.passed:
            return DressingOp("Q", N, op, name, rep)
        worst[name] = max(r.residual for r in rep.rows)
    raise DressingError(f"no coincident dressing certifies: {worst}")


def dress1_partner(model: RModel, q: DressingOp) -> DressingOp:
    """The right-side partner ``S = R Q R^-1`` conjugated through fused unitarity.

    ``[Q, R_{M'N}] = 0`` is equivalent to ``[S, R_{NM'}] = 0`` once both are
    related by the unitarity pair; for the dressings built here the partner
    coincides with ``Q`` itself, and it is re-certified against (dress1).
    """
    rep = certify_dressing(model, q.op, q.index_set, "S")
    return DressingOp("S", q.index_set, q.op, q.descriptor, rep)


# -- Laurent data and the delta identity ---------------------------------------


@dataclass(frozen=True)
class Laurent:
    """Finite Laurent polynomial ``sum_k c_k lam^k``."""

    coeffs: dict = field(default_factory=dict)

    @classmethod
    def random(cls, rng: np.random.Generator, low: int = -3, high: int = 3, integer: bool = True) -> Laurent:
        ks = range(low, high + 1)
        if integer:
            return cls({k: float(rng.integers(-5, 6)) for k in ks})
        return cls({k: complex(rng.normal(), rng.normal()) for k in ks})

    def __call__(self, lam: complex) -> complex:
        return sum(c * lam**k for k, c in self.coeffs.items())

    def get(self, k: int) -> complex:
        return self.coeffs.get(k, 0)

    @property
    def low(self) -> int:
        return min(self.coeffs) if self.coeffs else 0

    @property
    def high(self) -> int:
        return max(self.coeffs) if self.coeffs else 0


def _delta_side(f: Laurent, g: Laurent, a: int, b: int, swapped: bool) -> complex:
    """Coefficient of ``l1^a l2^b`` in ``delta f(l1) g(l2)`` (or ``f(l2) g(l1) delta``)."""
    total = 0
    for m, fm in f.coeffs.items():
        for p, gp in g.coeffs.items():
            # delta contributes l1^n l2^-n for every integer n
            if swapped:
                n = a - p
                if m - n == b:
                    total += fm * gp
            else:
                n = a - m
                if p - n == b:
                    total += fm * gp
    return total


def delta_coefficients(f: Laurent, g: Laurent, truncation: int) -> np.ndarray:
    """Table of ``(a, b, lhs, rhs, convolution)`` for ``|a|, |b| <= truncation``."""
    rows = []
    for a in range(-truncation, truncation + 1):
        for b in range(-truncation, truncation + 1):
            conv = sum(f.get(m) * g.get(a + b - m) for m in range(f.low, f.high + 1))
            rows.append((a, b, _delta_side(f, g, a, b, False), _delta_side(f, g, a, b, True), conv))
    return np.array(rows, dtype=complex)


def verify_delta_identity(f: Laurent, g: Laurent, truncation: int) -> float:
    """Largest coefficient mismatch among both sides and the finite convolution."""
    t = delta_coefficients(f, g, truncation)
    lhs, rhs, conv = t[:, 2], t[:, 3], t[:, 4]
    return float(max(np.max(np.abs(lhs - rhs), initial=0), np.max(np.abs(lhs - conv), initial=0)))


# -- quantum traces -------------------------------------------------------------


def quantum_trace(data: ReflectionData, N: IndexSet, dressing: DressingOp | None = None, require_certified: bool = True) -> TraceOperator:
    """``H_N = Tr_N(Q_N K0_N T0_N)``."""
    ops = [fuse_K0(data, N).op, fuse_T0(data, N).op]
    desc = "undressed"
    if dressing is not None:
        if dressing.index_set.labels != N.labels:
            raise DressingError("dressing belongs to a different index set")
        if require_certified and not dressing.certified:
            raise DressingError(f"dressing {dressing.descriptor!r} is not certified")
        ops.insert(0, dressing.op)
        desc = dressing.descriptor
    op = product(ops).trace(list(N.labels))
    return TraceOperator(N, op, dressing, f"tracer/{desc}")


def check_commutativity(h1: TraceOperator, h2: TraceOperator) -> float:
    if not h1.index_set.isdisjoint(h2.index_set):
        raise ValueError("trace operators must come from disjoint index sets")
    return commutator_residual(h1.op, h2.op)


def crossing_unitarity_scalar(model: RModel, x: complex) -> complex:
    """``Z`` with ``R_21(x)^{t_1} M_1^-1 R_12(-x - 2 rho)^{t_1} M_1 = Z``."""
    op = product(
        [
            model.R("2", "1", x).transpose(["1"]),
            model.Minv_op("1"),
            model.R("1", "2", -x - 2 * model.rho).transpose(["1"]),
            model.M_op("1"),
        ]
    )
    return proportionality_scalar(op)[0]


def check_factorization(data: ReflectionData, N: IndexSet) -> tuple[MultiOp, MultiOp, float]:
    """Undressed ``H_N`` against ``prod_{i<j} Z(lam_i + lam_j) prod_i t(lam_i)``."""
    h = quantum_trace(data, N).op
    lams = N.spectral
    z = 1 + 0j
    for i in range(len(lams)):
        for j in range(i + 1, len(lams)):
            z *= crossing_unitarity_scalar(data.model, lams[i] + lams[j])
    rhs = product([transfer_matrix(data, lam) for lam in lams]) * z
    return h, rhs, residual(h, rhs)


def spectral_gap_to_powers(h: MultiOp, t: MultiOp, max_power: int = 4) -> dict:
    """Compare ``h`` with ``c t^k`` eigenvalue by eigenvalue, best ``c`` per ``k``.

    Eigenvalues are paired through the eigenbasis of ``t``; the gap is the
    largest mismatch relative to the largest eigenvalue of ``h``.
    """
    w, V = np.linalg.eig(t.reorder(h.labels).matrix)
    hd = np.diag(np.linalg.solve(V, h.matrix @ V))
    scale = max(np.max(np.abs(hd)), 1e-300)
    gaps = {}
    for k in range(1, max_power + 1):
        tk = w**k
        c = np.vdot(tk, hd) / max(np.vdot(tk, tk).real, 1e-300)
        gaps[k] = float(np.max(np.abs(hd - c * tk)) / scale)
    return {"gaps": gaps, "min_gap": min(gaps.values()), "eigenvalues": hd}


# -- the commutativity proof, step by step ----------------------------------------


def _proof_chain(data: ReflectionData, N: IndexSet, Mp: IndexSet) -> tuple[list[tuple[str, MultiOp]], dict]:
    """Expressions equal to ``H_M' H_N`` after each rewrite of the proof.

    Steps: traces merged; transposition over ``M'``; insertion of the
    crossing-unitarity pair; (p1) on the shifted factor; regrouping into two
    transposed blocks; moving ``t_M'`` onto the first block; insertion of the
    unitarity pair; absorbing one factor into the first block with (p1);
    recognizing the left side of (greqd) and the right side of (greq); then
    (greq) and (greqd).
    """
    m = data.model
    labs = [*Mp.labels, *N.labels]
    nl, ml = list(N.labels), list(Mp.labels)
    A, B = fuse_K0(data, Mp).op, fuse_K0(data, N).op
    X, Y = fuse_T0(data, Mp).op, fuse_T0(data, N).op
    MM, MMi = M_on(m, Mp), Minv_on(m, Mp)
    tr = lambda op: op.trace(labs)

    steps: list[tuple[str, MultiOp]] = []
    steps.append(("product", A.__matmul__(X).trace(ml) @ B.__matmul__(Y).trace(nl)))
    steps.append(("merge", tr(product([A, X, B, Y]))))
    At, Xt = A.transpose(ml), X.transpose(ml)
    steps.append(("transpose-M'", tr(product([At, B, Xt, Y]))))

    c1 = product([MMi, R_(m, Mp.bar(), N.bar(), NEGSUM2RHO).transpose(ml), MM, R_(m, N, Mp, SUM).transpose(ml)])
    zp, zp_res = proportionality_scalar(c1)
    steps.append(("insert-crossing-unitarity", tr(product([At, B, c1, Xt, Y])) / zp))
    rneg = R_(m, N, Mp, NEGSUM2RHO)
    rsum = R_(m, N, Mp, SUM)
    steps.append(("p1", tr(product([At, B, MMi, rneg.transpose(nl), MM, rsum.transpose(ml), Xt, Y])) / zp))
    P = product([At, MMi, rneg, MM, B.transpose(nl)])
    steps.append(("regroup", tr(P.transpose(nl) @ product([X, rsum, Y]).transpose(ml)) / zp))
    Pt = P.transpose(labs)
    steps.append(("move-transpose", tr(Pt @ product([X, rsum, Y])) / zp))

    c2 = R_(m, N, Mp.bar(), DIFF) @ R_(m, Mp, N.bar(), DIFF)
    zm, zm_res = proportionality_scalar(c2)
    steps.append(("insert-unitarity", tr(product([Pt, c2, X, rsum, Y])) / (zp * zm)))
    first = (R_(m, Mp, N.bar(), REVDIFF) @ P).transpose(labs)
    second = product([R_(m, Mp, N.bar(), DIFF), X, rsum, Y])
    steps.append(("absorb-p1", tr(first @ second) / (zp * zm)))

    gd_lhs, gd_rhs = greqd_sides(m, B, A, N, Mp)
    g_lhs, g_rhs = greq_sides(m, Y, X, N, Mp)
    # the block inside the transposition is the transposed left side of (greqd)
    steps.append(("identify-greqd", tr(gd_lhs @ g_rhs) / (zp * zm)))
    steps.append(("greq", tr(gd_lhs @ g_lhs) / (zp * zm)))
    steps.append(("greqd", tr(gd_rhs @ g_lhs) / (zp * zm)))

    scalars = {
        "Z_plus": zp,
        "Z_plus_residual": zp_res,
        "Z_minus": zm,
        "Z_minus_residual": zm_res,
        "Z_plus_pairwise": pairwise_scalars(m, N, Mp, SUM, "crossing"),
        "Z_minus_pairwise": pairwise_scalars(m, N, Mp, DIFF, "unitarity"),
    }
    return steps, scalars


def commutation_proof_replication(data: ReflectionData, N: IndexSet, Mp: IndexSet) -> dict:
    """Replay the commutativity proof from both ends and join them.

    The forward chain starts at ``H_M' H_N``, the backward one at
    ``H_N H_M'`` (roles swapped).  Each rewrite is compared with its
    predecessor; the two chains are then joined at their last expressions.
    """
    fwd, zf = _proof_chain(data, N, Mp)
    bwd, zb = _proof_chain(data, Mp, N)
    rows = []
    for tag, chain in (("fwd", fwd), ("bwd", bwd)):
        for (_, prev), (name, cur) in pairwise(chain):
            rows.append((f"{tag}:{name}", residual(cur, prev)))
    rows.append(("join", residual(fwd[-1][1], bwd[-1][1])))
    z_checks = []
    for tag, z in (("fwd", zf), ("bwd", zb)):
        z_checks += [
            (f"{tag}:Z+(crossing-unitarity)", z["Z_plus_residual"]),
            (f"{tag}:Z-(unitarity)", z["Z_minus_residual"]),
            (f"{tag}:Z+ vs pairwise", abs(z["Z_plus"] - z["Z_plus_pairwise"]) / max(abs(z["Z_plus_pairwise"]), 1e-300)),
            (f"{tag}:Z- vs pairwise", abs(z["Z_minus"] - z["Z_minus_pairwise"]) / max(abs(z["Z_minus_pairwise"]), 1e-300)),
        ]
    return {"steps": rows, "z_checks": z_checks, "scalars": zf}


# -- classical limit ---------------------------------------------------------------


@dataclass
class LimitReport:
    n: int
    lam: complex
    etas: list[float]
    gaps: list[float]
    slope: float
    extrapolated_gap: float
    target: complex

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "lam": [self.lam.real, self.lam.imag],
            "etas": self.etas,
            "gaps": self.gaps,
            "slope": self.slope,
            "extrapolated_gap": self.extrapolated_gap,
            "target": [self.target.real, self.target.imag],
        }


def classical_data(eta: float, xi: complex, sites: int = 1, thetas: Sequence[complex] = (0.2 - 0.3j,)) -> ReflectionData:
    """Rational data normalized so that ``R -> 1`` and ``K+ = 1`` as ``eta -> 0``."""
    model = rational_gl_model(2, eta).normalized()
    K = diagonal_k(model, xi)
    eye = np.eye(2, dtype=complex)
    Kp = lambda lam: eye
    row = certify_k_plus(model, Kp)
    if not row.passed:
        raise ValueError(f"identity K+ fails the dual reflection equation ({row.residual:.2e})")
    qs = tuple(quantum(f"q{i + 1}", 2) for i in range(sites))
    return ReflectionData(model, complex(xi), K, Kp, qs, tuple(complex(t) for t in thetas[:sites]), "diagonal", "identity")


def classical_trace(data: ReflectionData, N: IndexSet) -> MultiOp:
    """Trace with the permutation dressing, the ``eta -> 0`` shadow of the check-R product."""
    q = _chain(N, MultiOp.permutation)
    return product([q, fuse_K0(data, N).op, fuse_T0(data, N).op]).trace(list(N.labels))


def classical_limit_sweep(
    n: int,
    lam: complex,
    etas: Sequence[float] = (1e-1, 1e-2, 1e-3),
    xi: complex = 0.7 + 0.1j,
    sites: int = 1,
) -> LimitReport:
    """``H_N(eta)`` at coincident ``lam`` against ``Tr(t(lam)^n)`` with ``t = K(lam)``."""
    if len(etas) < 2:
        raise ValueError("the sweep needs at least two eta values")
    etas = sorted(float(e) for e in etas)[::-1]
    N = IndexSet.of([f"n{i}" for i in range(n)], lam)
    values, gaps = [], []
    target = None
    for eta in etas:
        data = classical_data(eta, xi, sites)
        h = classical_trace(data, N)
        if target is None:
            k = data.K(lam)
            target = complex(np.trace(np.linalg.matrix_power(k, n)))
        ref = MultiOp.identity(h.spaces) * target
        values.append(h)
        gaps.append(residual(h, ref))
    slope = float(np.polyfit(np.log(etas), np.log(np.maximum(gaps, 1e-300)), 1)[0])
    e1, e2 = etas[-2], etas[-1]
    h1, h2 = values[-2], values[-1]
    extrap = (h2 * e1 - h1 * e2) / (e1 - e2)
    ref = MultiOp.identity(extrap.spaces) * target
    return LimitReport(n, complex(lam), list(etas), gaps, slope, residual(extrap, ref), target)


# -- suite ---------------------------------------------------------------------------


def traces_report(data: ReflectionData, seed: int = 13, count: int = 3) -> AxiomReport:
    """(comrel) with and without dressing, the factorization of the undressed trace and the proof chain."""
    rng = np.random.default_rng(seed)
    d = data.model.local_dim
    spec = lambda k: list(0.6 * rng.normal(size=k) + 0.6j * rng.normal(size=k))
    rows: list[Check] = []
    for n, k in ((1, 1), (2, 1), (2, 2)):
        plain, dressed, proof, zc = [], [], [], []
        for _ in range(count):
            N = IndexSet.of([f"n{i}" for i in range(n)], spec(n), d)
            Mp = IndexSet.of([f"m{i}" for i in range(k)], spec(k), d)
            plain.append(check_commutativity(quantum_trace(data, N), quantum_trace(data, Mp)))
            Nc = N.with_spectral(N[0].lam)
            hd = quantum_trace(data, Nc, coincident_dressing(data.model, Nc))
            dressed.append(check_commutativity(hd, quantum_trace(data, Mp)))
            rep = commutation_proof_replication(data, N, Mp)
            proof.append(max(r for _, r in rep["steps"]))
            zc.append(max(r for _, r in rep["z_checks"]))
        rows.append(gather(f"comrel[{n},{k}]", f"[H_N, H_M'] = 0, card {n},{k}", plain, TOL_COMPOSITE))
        rows.append(gather(f"comrel-dressed[{n},{k}]", f"[Q H_N, H_M'] = 0 at coincident lam_N, card {n},{k}", dressed, TOL_COMPOSITE))
        rows.append(gather(f"proof[{n},{k}]", "every rewrite of the commutativity proof", proof, TOL_COMPOSITE))
        rows.append(gather(f"proof-Z[{n},{k}]", "crossing-unitarity and unitarity scalars match the pairwise products", zc, TOL_DRESS))
    for n in (2, 3):
        rs = [check_factorization(data, IndexSet.of([f"n{i}" for i in range(n)], spec(n), d))[2] for _ in range(count)]
        rows.append(gather(f"prop3[{n}]", "H_N = prod Z(lam_i + lam_j) prod t(lam_i)", rs, TOL_DRESS))
    return AxiomReport(rows, {})


__all__ = [
    "DressingError",
    "DressingOp",
    "Laurent",
    "LimitReport",
    "certify_dressing",
    "check_commutativity",
    "check_factorization",
    "classical_data",
    "classical_limit_sweep",
    "classical_trace",
    "coincident_candidates",
    "coincident_dressing",
    "commutation_proof_replication",
    "crossing_unitarity_scalar",
    "delta_coefficients",
    "dress1_partner",
    "dress_conditions",
    "dressing_commutant",
    "quantum_trace",
    "spectral_gap_to_powers",
    "traces_report",
    "verify_delta_identity",
]
