"""R-matrix families with crossing data, and the axiom suite that certifies them.

A model is a function ``lam -> R(lam)`` on two copies of a ``d``-dimensional
space together with the crossing constants ``V``, ``M = V^t V`` and the
shift ``rho``.  Factories certify the model against all axioms before
returning it; a model that fails is never handed out.

Both shipped models use ``rho = eta`` and a ``V`` that squares to ``-1``:
with the unnormalized ``R`` the crossing relation holds as an equality only
for that sign, so the report records ``V @ V`` instead of assuming it.
"""

from __future__ import annotations

import cmath
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace

import numpy as np

from .checks import TOL_AXIOM, AxiomReport, gather
from .tensor_core import (
    MultiOp,
    Space,
    aux,
    commutator_residual,
    product,
    proportionality_scalar,
    residual,
)

DEFAULT_SEED = 20031
DEFAULT_SAMPLES = 20
POLE_GUARD = 1e-6


class CertificationError(RuntimeError):
    def __init__(self, model: str, tag: str, residual: float):
        super().__init__(f"model {model!r} fails {tag} (residual {residual:.3e})")
        self.model = model
        self.tag = tag
        self.residual = residual


def _as_space(x, dim: int) -> Space:
    if isinstance(x, Space):
        if x.dim != dim:
            raise ValueError(f"space {x.label!r} has dim {x.dim}, model needs {dim}")
        return x
    return aux(str(x), dim)


@dataclass(frozen=True)
class RModel:
    name: str
    local_dim: int
    eta: complex
    rho: complex
    V: np.ndarray
    M: np.ndarray
    kernel: Callable[[complex], np.ndarray] = field(repr=False)
    params: dict = field(default_factory=dict)
    k_family: Callable[[complex, complex], np.ndarray] | None = field(default=None, repr=False)
    scale: Callable[[complex], complex] | None = field(default=None, repr=False)
    certified: bool = False

    def R(self, a, b, lam: complex) -> MultiOp:
        """``R_ab(lam)`` on the ordered pair of spaces ``(a, b)``."""
        d = self.local_dim
        return MultiOp((_as_space(a, d), _as_space(b, d)), self.kernel(complex(lam)))

    evaluate = R

    def V_op(self, a) -> MultiOp:
        return MultiOp((_as_space(a, self.local_dim),), self.V)

    def M_op(self, a) -> MultiOp:
        return MultiOp((_as_space(a, self.local_dim),), self.M)

    def Minv_op(self, a) -> MultiOp:
        return MultiOp((_as_space(a, self.local_dim),), np.linalg.inv(self.M))

    def unitarity_scalar(self, lam: complex) -> complex:
        z, _ = proportionality_scalar(self.R("1", "2", lam) @ self.R("2", "1", -lam))
        return z

    def normalized(self) -> RModel:
        """The same family divided by ``scale`` so that ``R -> 1`` as ``eta -> 0``.

        The rescaled family keeps Yang-Baxter and unitarity but satisfies the
        crossing relations only up to scalars, so it is returned uncertified.
        It exists for the classical-limit sweep.
        """
        if self.scale is None:
            raise ValueError(f"model {self.name!r} has no classical normalization")
        kernel, scale = self.kernel, self.scale
        return RModel(
            name=self.name + "/normalized",
            local_dim=self.local_dim,
            eta=self.eta,
            rho=self.rho,
            V=self.V,
            M=self.M,
            kernel=lambda lam: kernel(lam) / scale(lam),
            params=dict(self.params, normalized=True),
            k_family=self.k_family,
            scale=None,
            certified=False,
        )


# -- sampling -------------------------------------------------------------


def sample_spectral(
    model: RModel,
    count: int = DEFAULT_SAMPLES,
    arity: int = 2,
    seed: int = DEFAULT_SEED,
    box: float = 2.0,
) -> list[tuple[complex, ...]]:
    """Seeded complex tuples in ``|Re|, |Im| <= box`` away from unitarity poles.

    Every argument combination used by the suites (differences, sums and
    the crossing shifts) is kept away from zeros of the unitarity scalar.
    """
    rng = np.random.default_rng(seed)
    out: list[tuple[complex, ...]] = []
    while len(out) < count:
        z = rng.uniform(-box, box, arity) + 1j * rng.uniform(-box, box, arity)
        args = list(z) + [a - b for a in z for b in z] + [a + b for a in z for b in z]
        args = [x for x in args if x != 0]
        shifted = [x + s * model.rho for x in args for s in (-2, -1, 1, 2)]
        if all(abs(model.unitarity_scalar(x)) >= POLE_GUARD for x in args + shifted):
            out.append(tuple(complex(x) for x in z))
    return out


# -- axioms ---------------------------------------------------------------

AXIOM_TAGS = ("YBE", "transp", "unitarity", "cross", "cross-2", "crossing-unitarity", "crosscom1")


def verify_axioms(model: RModel, samples: Sequence[Sequence[complex]]) -> AxiomReport:
    """Evaluate the three-space and two-space axioms at each sample.

    A sample is ``(lam1, lam2, ...)``; the two-space identities use ``lam1``
    and the Yang-Baxter equation uses ``(lam1, lam2)``.
    """
    if not samples:
        raise ValueError("need at least one spectral sample")
    R, rho = model.R, model.rho
    res: dict[str, list[float]] = {t: [] for t in AXIOM_TAGS}
    z_unit: list[complex] = []
    z_cu: list[complex] = []
    for s in samples:
        l1 = s[0]
        l2 = s[1] if len(s) > 1 else 0.37 * s[0] + 0.21
        lhs = product([R(1, 2, l1 - l2), R(1, 3, l1), R(2, 3, l2)])
        rhs = product([R(2, 3, l2), R(1, 3, l1), R(1, 2, l1 - l2)])
        res["YBE"].append(residual(lhs, rhs))

        res["transp"].append(residual(R(1, 2, l1), R(2, 1, l1).transpose(["1", "2"])))

        z, r = proportionality_scalar(R(1, 2, l1) @ R(2, 1, -l1))
        res["unitarity"].append(r)
        z_unit.append(z)

        V1 = model.V_op(1)
        res["cross"].append(residual(V1 @ R(1, 2, -l1 - rho).transpose(["2"]) @ V1, R(1, 2, l1)))
        V2t = MultiOp((aux("2", model.local_dim),), model.V.T)
        res["cross-2"].append(
            residual(V2t @ R(1, 2, -l1 - rho).transpose(["1"]) @ V2t, R(1, 2, l1))
        )

        cu = product(
            [
                R(2, 1, l1).transpose(["1"]),
                model.Minv_op(1),
                R(1, 2, -l1 - 2 * rho).transpose(["1"]),
                model.M_op(1),
            ]
        )
        z, r = proportionality_scalar(cu)
        res["crossing-unitarity"].append(r)
        z_cu.append(z)

        res["crosscom1"].append(
            commutator_residual(R(1, 2, l1), model.M_op(1) @ model.M_op(2))
        )

    names = {
        "YBE": "R12(l1-l2) R13(l1) R23(l2) = R23(l2) R13(l1) R12(l1-l2)",
        "transp": "R12(l) = R21(l)^{t1 t2}",
        "unitarity": "R12(l) R21(-l) = Z(l) 1",
        "cross": "V1 R12(-l-rho)^{t2} V1 = R12(l)",
        "cross-2": "V2^t R12(-l-rho)^{t1} V2^t = R12(l)",
        "crossing-unitarity": "R21(l)^{t1} M1^-1 R12(-l-2rho)^{t1} M1 = Z(l) 1",
        "crosscom1": "[R12(l), M1 M2] = 0",
    }
    report = AxiomReport()
    for tag in AXIOM_TAGS:
        scal = z_unit if tag == "unitarity" else z_cu if tag == "crossing-unitarity" else ()
        report.rows.append(gather(tag, names[tag], res[tag], TOL_AXIOM, scal))
    vv = model.V @ model.V
    report.constants.update(
        {
            "model": model.name,
            "eta": model.eta,
            "rho": model.rho,
            "V": model.V,
            "M": model.M,
            "V_squared": complex(vv[0, 0]),
            "V_squared_is_scalar": bool(np.allclose(vv, vv[0, 0] * np.eye(model.local_dim))),
            "VtV_equals_M": bool(np.allclose(model.V.T @ model.V, model.M)),
        }
    )
    return report


def certify(model: RModel, count: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED) -> RModel:
    """Run the axiom suite; raise on the first failing axiom."""
    report = verify_axioms(model, sample_spectral(model, count, seed=seed))
    for row in report.rows:
        if not row.passed:
            raise CertificationError(model.name, row.tag, row.residual)
    if not report.constants["V_squared_is_scalar"] or not report.constants["VtV_equals_M"]:
        raise CertificationError(model.name, "crossing-data", float("nan"))
    return replace(model, certified=True)


# -- model families -------------------------------------------------------


def _perm(n: int) -> np.ndarray:
    p = np.zeros((n * n, n * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            p[i * n + j, j * n + i] = 1.0
    return p


def _antidiagonal(n: int) -> np.ndarray:
    v = np.zeros((n, n), dtype=complex)
    for i in range(n):
        v[i, n - 1 - i] = (-1) ** i
    return v


def rational_gl_model(n: int = 2, eta: complex = 1.0) -> RModel:
    """``R(lam) = lam + eta P`` on two ``n``-dimensional spaces.

    Crossing data is the alternating antidiagonal ``V`` (``i sigma^y`` for
    ``n = 2``), ``M = V^t V = 1`` and ``rho = n eta / 2``.  Only ``n = 2``
    certifies: for ``n >= 3`` the partial transpose of ``P`` has rank one,
    so no ``V`` can map it back to ``P`` and certification raises on ``cross``.
    """
    if n < 2:
        raise ValueError("rational model needs n >= 2")
    eta = complex(eta)
    if eta == 0:
        raise ValueError("eta must be nonzero")
    P = _perm(n)
    I = np.eye(n * n, dtype=complex)
    V = _antidiagonal(n)

    def kernel(lam: complex) -> np.ndarray:
        return lam * I + eta * P

    model = RModel(
        name=f"rational-gl{n}",
        local_dim=n,
        eta=eta,
        rho=n * eta / 2,
        V=V,
        M=V.T @ V,
        kernel=kernel,
        params={"n": n, "eta": eta},
        k_family=(lambda lam, xi: np.diag([xi + lam, xi - lam])) if n == 2 else None,
        scale=lambda lam: lam,
    )
    return certify(model)


def six_vertex_model(q_param: complex = cmath.exp(0.35 + 0.1j)) -> RModel:
    """Trigonometric six-vertex ``R`` in the homogeneous gradation, ``eta = log q``.

    Off-diagonal weights ``e^{+-lam} sinh(eta)`` make the crossing matrix
    ``V = [[0, e^{-eta/2}], [-e^{eta/2}, 0]]`` and hence ``M = diag(e^eta, e^-eta)``
    non-trivial.
    """
    q_param = complex(q_param)
    if q_param == 0:
        raise ValueError("q_param must be nonzero")
    eta = cmath.log(q_param)
    for k in range(1, 5):
        if abs(cmath.sinh(k * eta)) < 1e-8:
            raise ValueError(f"q_param {q_param} is degenerate (q^{2 * k} = 1)")
    sh = cmath.sinh

    def kernel(lam: complex) -> np.ndarray:
        a, b, c = sh(lam + eta), sh(lam), sh(eta)
        return np.array(
            [
                [a, 0, 0, 0],
                [0, b, cmath.exp(lam) * c, 0],
                [0, cmath.exp(-lam) * c, b, 0],
                [0, 0, 0, a],
            ],
            dtype=complex,
        )

    V = np.array([[0, cmath.exp(-eta / 2)], [-cmath.exp(eta / 2), 0]], dtype=complex)
    model = RModel(
        name="six-vertex",
        local_dim=2,
        eta=eta,
        rho=eta,
        V=V,
        M=V.T @ V,
        kernel=kernel,
        params={"q_param": q_param, "eta": eta},
        k_family=lambda lam, xi: np.diag(
            [cmath.exp(lam) * sh(xi + lam), cmath.exp(-lam) * sh(xi - lam)]
        ),
        scale=sh,
    )
    return certify(model)


def model_from_descriptor(desc: dict) -> RModel:
    """Build a model from ``{"name": ..., "eta": ..., "q_param": ..., "n": ...}``."""
    name = desc.get("name", "rational")
    if name in ("rational", "rational-gl2", "rational-gl"):
        return rational_gl_model(int(desc.get("n", 2)), _cplx(desc.get("eta", 1.0)))
    if name in ("six-vertex", "six_vertex", "xxz"):
        if "q_param" in desc:
            return six_vertex_model(_cplx(desc["q_param"]))
        return six_vertex_model(cmath.exp(_cplx(desc.get("eta", 0.35 + 0.1j))))
    raise ValueError(f"unknown model {name!r}")


def _cplx(x) -> complex:
    if isinstance(x, (list, tuple)):
        return complex(x[0], x[1])
    if isinstance(x, str):
        return complex(x.replace(" ", "").replace("i", "j"))
    return complex(x)


def lax_matrix(model: RModel, aux_space, quantum_site: Space, lam: complex, theta: complex = 0):
    """``L_aq(lam) = R_aq(lam - theta)``; satisfies the RLL relation by YBE."""
    d = model.local_dim
    a = _as_space(aux_space, d)
    if quantum_site.dim != d:
        raise ValueError(f"quantum site {quantum_site.label!r} has dim {quantum_site.dim} != {d}")
    return MultiOp((a, quantum_site), model.kernel(complex(lam - theta)))
