"""Fused R-matrices over ordered index sets.

``fuse(model, A, B, rule)`` is the ordered product

    R_{a1 b1} R_{a2 b1} ... R_{an b1}  R_{a1 b2} ... R_{an bm}

(outer loop over ``B``, inner loop over ``A``), each factor evaluated at
``rule(lam_a, lam_b)``.  Barred sets are just reversed ``IndexSet`` objects.
Any reordering of the factors that keeps, for every space, the relative
order of the factors touching it gives the same operator, so the loop
nesting itself is a convention.

The compact ``R^+``, ``R^-`` and ``R^--`` notations used by the fused
Yang-Baxter equations resolve to explicit argument rules:

    SUM         lam_a + lam_b            (R^+)
    DIFF        lam_a - lam_b
    REVDIFF    -lam_a + lam_b            (R^- next to a reflection factor)
    NEGSUM2RHO -lam_a - lam_b - 2 rho    (R^--)

and the four equations read, with ``1`` a single space, ``Nm`` the rest of
the fused set and ``Mp`` the probe set:

    fyb1   R(Nm,1;SUM)  R(Mp,1;SUM)  R(Mp,bar Nm;DIFF)       = reversed product
    fyb2   R(Nm,1;SUM)  R(Nm,Mp;SUM) R(1,Mp;REVDIFF)         = reversed product
    dfyb1  R(Nm,bar Mp;DIFF) R(1,bar Mp;NEGSUM2RHO) R(1,bar Nm;NEGSUM2RHO)
                                                             = reversed product
    dfyb2  R(bar Mp,1;REVDIFF) R(bar Mp,bar Nm;NEGSUM2RHO) R(1,bar Nm;NEGSUM2RHO)
                                                             = reversed product

Fused unitarity and crossing-unitarity pair ``R(A, B; rule)`` with
``R(bar B, bar A; rule')`` where ``rule'`` swaps the roles of the two
spectral arguments, negates them, and (for crossing-unitarity) shifts by
``-2 rho``; this is the only distribution of shifts that reduces to the
two-space axioms factor by factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .checks import TOL_COMPOSITE, AxiomReport, Check, gather
from .rmodel import RModel
from .tensor_core import (
    IndexSet,
    MultiOp,
    Space,
    aux,
    commutator_residual,
    product,
    proportionality_scalar,
    residual,
)


@dataclass(frozen=True)
class ArgRule:
    """Spectral argument ``ca * lam_a + cb * lam_b + shift * rho`` of ``R_ab``."""

    ca: complex
    cb: complex
    shift: complex = 0
    name: str = ""

    def __call__(self, model: RModel, la: complex, lb: complex) -> complex:
        return self.ca * la + self.cb * lb + self.shift * model.rho

    def swapped(self) -> ArgRule:
        """Rule for ``R_ba`` carrying the same value as ``R_ab`` under this rule."""
        return ArgRule(self.cb, self.ca, self.shift, self.name + "~")

    def inverse(self) -> ArgRule:
        """Partner rule for unitarity: ``R_ab(x) R_ba(-x)``."""
        return ArgRule(-self.cb, -self.ca, -self.shift, "inv(" + self.name + ")")

    def crossing_partner(self) -> ArgRule:
        """Partner rule for crossing-unitarity: ``R_ab(x)^t R_ba(-x-2rho)^t``."""
        return ArgRule(-self.cb, -self.ca, -self.shift - 2, "cu(" + self.name + ")")

    def crossed(self) -> ArgRule:
        """``x -> -x - rho``."""
        return ArgRule(-self.ca, -self.cb, -self.shift - 1, "cross(" + self.name + ")")


SUM = ArgRule(1, 1, 0, "sum")
DIFF = ArgRule(1, -1, 0, "diff")
REVDIFF = ArgRule(-1, 1, 0, "revdiff")
NEGSUM2RHO = ArgRule(-1, -1, -2, "negsum-2rho")


@dataclass(frozen=True)
class FusedR:
    model: RModel
    left: IndexSet
    right: IndexSet
    rule: ArgRule
    op: MultiOp

    def rebuild(self) -> MultiOp:
        return _fused_product(self.model, self.left, self.right, self.rule)

    def at(self, left: IndexSet, right: IndexSet) -> FusedR:
        """Same sets and rule, re-evaluated at new spectral values."""
        return fuse(self.model, left, right, self.rule)


def _fused_product(model: RModel, left: IndexSet, right: IndexSet, rule: ArgRule) -> MultiOp:
    factors = [model.R(a, b, rule(model, a.lam, b.lam)) for b in right for a in left]
    return product(factors)


def fuse(model: RModel, left: IndexSet, right: IndexSet, rule: ArgRule = DIFF) -> FusedR:
    if not left.isdisjoint(right):
        raise ValueError(f"index sets overlap: {left.labels} vs {right.labels}")
    if len(left) == 0 or len(right) == 0:
        raise ValueError("fused R needs non-empty index sets")
    for s in (*left, *right):
        if s.spectral is None:
            raise ValueError(f"space {s.label!r} has no spectral value")
    return FusedR(model, left, right, rule, _fused_product(model, left, right, rule))


def R_(model: RModel, left: IndexSet, right: IndexSet, rule: ArgRule) -> MultiOp:
    """Shorthand for the operator of ``fuse``."""
    return fuse(model, left, right, rule).op


def M_on(model: RModel, spaces) -> MultiOp:
    return product([model.M_op(s) for s in spaces])


def Minv_on(model: RModel, spaces) -> MultiOp:
    return product([model.Minv_op(s) for s in spaces])


def V_on(model: RModel, spaces, transpose: bool = False) -> MultiOp:
    v = model.V.T if transpose else model.V
    return product([MultiOp((s,), v) for s in spaces])


def pairwise_scalars(model: RModel, left: IndexSet, right: IndexSet, rule: ArgRule, kind: str):
    """Product of two-space ``Z`` scalars over all pairs; ``kind`` is unitarity or crossing."""
    z = 1.0 + 0j
    for a in left:
        for b in right:
            x = rule(model, a.lam, b.lam)
            if kind == "unitarity":
                op = model.R(1, 2, x) @ model.R(2, 1, -x)
            else:
                op = product(
                    [
                        model.R(1, 2, x).transpose(["2"]),
                        model.Minv_op(2),
                        model.R(2, 1, -x - 2 * model.rho).transpose(["2"]),
                        model.M_op(2),
                    ]
                )
            z *= proportionality_scalar(op)[0]
    return z


def verify_fused_properties(f: FusedR, tol: float = TOL_COMPOSITE) -> AxiomReport:
    """Transposition, both crossings, unitarity, crossing-unitarity and M-commutation."""
    m, N, Mp, rule = f.model, f.left, f.right, f.rule
    nl, ml = list(N.labels), list(Mp.labels)
    rows: list[Check] = []

    # full transposition: R(N, M')^{t_N t_M'} = R(bar M', bar N) with roles swapped
    rhs = R_(m, Mp.bar(), N.bar(), rule.swapped())
    rows.append(gather("p1", "R_NM'^{t_M' t_N} = R_{bar M' bar N}", [residual(f.op.transpose(nl + ml), rhs)], tol))

    # V_N is the tensor product of single-space V's; collecting them across
    # the column groups leaves (V^2)^{n(m-1)}, which is 1 only when V^2 = 1
    vsq = complex((m.V @ m.V)[0, 0])
    n, k = len(N), len(Mp)
    crossed = R_(m, N, Mp, rule.crossed())
    lhs = R_(m, N.bar(), Mp, rule)
    VN = V_on(m, N)
    rows.append(
        gather(
            "cross-fused",
            "R_{bar N M'} = (V^2)^{n(m-1)} V_N R_NM'(-x-rho)^{t_M'} V_N",
            [residual(lhs, vsq ** (n * (k - 1)) * (VN @ crossed.transpose(ml) @ VN))],
            tol,
        )
    )
    lhs = R_(m, N, Mp.bar(), rule)
    VMt = V_on(m, Mp, transpose=True)
    rows.append(
        gather(
            "cross-fused-2",
            "R_{N bar M'} = (V^2)^{m(n-1)} V_M'^t R_NM'(-x-rho)^{t_N} V_M'^t",
            [residual(lhs, vsq ** (k * (n - 1)) * (VMt @ crossed.transpose(nl) @ VMt))],
            tol,
        )
    )

    z, r = proportionality_scalar(f.op @ R_(m, Mp.bar(), N.bar(), rule.inverse()))
    zp = pairwise_scalars(m, N, Mp, rule, "unitarity")
    rows.append(gather("cross2-unitarity", "R_NM' R_{bar M' bar N} = Z 1", [r], tol, [z]))
    rows.append(
        gather("cross2-unitarity-Z", "fused unitarity Z = product of pair Z", [abs(z - zp) / max(abs(zp), 1e-300)], tol, [zp])
    )

    cu = product(
        [
            f.op.transpose(ml),
            Minv_on(m, Mp),
            R_(m, Mp.bar(), N.bar(), rule.crossing_partner()).transpose(ml),
            M_on(m, Mp),
        ]
    )
    z, r = proportionality_scalar(cu)
    zp = pairwise_scalars(m, N, Mp, rule, "crossing")
    rows.append(gather("cross2-crossing-unitarity", "R_NM'^{t_M'} M^-1 R_{bar M' bar N}^{t_M'} M = Z 1", [r], tol, [z]))
    rows.append(
        gather(
            "cross2-crossing-unitarity-Z",
            "fused crossing-unitarity Z = product of pair Z",
            [abs(z - zp) / max(abs(zp), 1e-300)],
            tol,
            [zp],
        )
    )

    MM = M_on(m, (*N, *Mp))
    rows.append(gather("crosscom2", "[R_NM', M_N M_M'] = 0", [commutator_residual(f.op, MM)], tol))
    return AxiomReport(rows, {"left": N.labels, "right": Mp.labels, "rule": rule.name})


Variant = Literal["fyb1", "fyb2", "dfyb1", "dfyb2"]


def fused_ybe_sides(model: RModel, Nm: IndexSet, Mp: IndexSet, single: Space, variant: Variant):
    """The three factors of a fused Yang-Baxter equation, left to right."""
    one = IndexSet((single,))
    if variant == "fyb1":
        return [R_(model, Nm, one, SUM), R_(model, Mp, one, SUM), R_(model, Mp, Nm.bar(), DIFF)]
    if variant == "fyb2":
        return [R_(model, Nm, one, SUM), R_(model, Nm, Mp, SUM), R_(model, one, Mp, REVDIFF)]
    if variant == "dfyb1":
        return [
            R_(model, Nm, Mp.bar(), DIFF),
            R_(model, one, Mp.bar(), NEGSUM2RHO),
            R_(model, one, Nm.bar(), NEGSUM2RHO),
        ]
    if variant == "dfyb2":
        return [
            R_(model, Mp.bar(), one, REVDIFF),
            R_(model, Mp.bar(), Nm.bar(), NEGSUM2RHO),
            R_(model, one, Nm.bar(), NEGSUM2RHO),
        ]
    raise ValueError(f"unknown fused YBE variant {variant!r}")


def verify_fused_ybe(model: RModel, Nm: IndexSet, Mp: IndexSet, single: Space, variant: Variant) -> float:
    """Residual of ``A B C = C B A`` for the selected fused Yang-Baxter equation."""
    labels = [*Nm.labels, *Mp.labels, single.label]
    if len(set(labels)) != len(labels):
        raise ValueError("fused YBE needs disjoint index sets")
    a, b, c = fused_ybe_sides(model, Nm, Mp, single, variant)
    return residual(product([a, b, c]), product([c, b, a]))


def grid_reordered(f: FusedR) -> MultiOp:
    """The same fused product with the loop nesting swapped (outer over ``left``)."""
    m = f.model
    return product([m.R(a, b, f.rule(m, a.lam, b.lam)) for a in f.left for b in f.right])


def fused_report(
    model: RModel,
    max_total: int = 5,
    count: int = 2,
    seed: int = 17,
    rules: tuple[ArgRule, ...] = (DIFF, SUM),
    tol: float = TOL_COMPOSITE,
) -> AxiomReport:
    """Fused properties and the four fused YBEs for every card pair with ``n + m <= max_total``.

    The fused YBEs add one more single space, so ``Nm`` and ``Mp`` there share
    the budget ``max_total``.
    """
    rng = np.random.default_rng(seed)
    d = model.local_dim
    spec = lambda k: list(0.6 * rng.normal(size=k) + 0.6j * rng.normal(size=k))
    pairs = [(n, k) for n in range(1, max_total) for k in range(1, max_total) if n + k <= max_total]
    report = AxiomReport()
    for n, k in pairs:
        for rule in rules:
            worst: dict[str, list[float]] = {}
            names: dict[str, str] = {}
            for _ in range(count):
                N = IndexSet.of([f"n{i}" for i in range(n)], spec(n), d)
                Mp = IndexSet.of([f"m{i}" for i in range(k)], spec(k), d)
                for row in verify_fused_properties(fuse(model, N, Mp, rule), tol).rows:
                    worst.setdefault(row.tag, []).append(row.residual)
                    names[row.tag] = row.name
            for tag, rs in worst.items():
                report.rows.append(gather(f"{tag}[{n},{k};{rule.name}]", names[tag], rs, tol))
        for variant in ("fyb1", "fyb2", "dfyb1", "dfyb2"):
            rs = []
            for _ in range(count):
                N = IndexSet.of([f"n{i}" for i in range(n)], spec(n), d)
                Mp = IndexSet.of([f"m{i}" for i in range(k)], spec(k), d)
                rs.append(verify_fused_ybe(model, N, Mp, aux("s", d, spec(1)[0]), variant))
            report.rows.append(gather(f"{variant}[{n},{k}]", f"fused Yang-Baxter equation {variant}", rs, tol))
    report.constants["fused_max_total"] = max_total
    return report


__all__ = [
    "DIFF",
    "NEGSUM2RHO",
    "REVDIFF",
    "R_",
    "SUM",
    "ArgRule",
    "FusedR",
    "M_on",
    "Minv_on",
    "V_on",
    "fuse",
    "fused_report",
    "fused_ybe_sides",
    "grid_reordered",
    "pairwise_scalars",
    "verify_fused_properties",
    "verify_fused_ybe",
]

