"""Dense operators on ordered lists of labeled vector spaces.

Every operator carries the list of spaces it acts on.  Row and column
indices are big-endian in that list, i.e. the matrix of ``A`` on ``[1, 2]``
is laid out like ``np.kron(A1, A2)``.  Public operations re-align operands
to an explicit space order before doing arithmetic, so reordering tensor
legs never silently transposes anything.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from functools import reduce

import numpy as np

NORM_FLOOR = 1e-300


class SpaceError(ValueError):
    """Raised for unknown labels or inconsistent dimensions."""


class Kind(str, Enum):
    AUXILIARY = "auxiliary"
    QUANTUM = "quantum"


@dataclass(frozen=True)
class Space:
    """A labeled finite-dimensional vector space.

    Auxiliary spaces carry a spectral parameter when they take part in a
    spectral-dependent construction; quantum spaces never do.
    """

    label: str
    dim: int
    kind: Kind = Kind.AUXILIARY
    spectral: complex | None = None

    def __post_init__(self):
        if int(self.dim) < 1:
            raise SpaceError(f"space {self.label!r} has dim {self.dim} < 1")
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.kind is Kind.QUANTUM and self.spectral is not None:
            raise SpaceError(f"quantum space {self.label!r} cannot carry a spectral value")
        if self.spectral is not None:
            object.__setattr__(self, "spectral", complex(self.spectral))

    def at(self, spectral: complex | None) -> Space:
        """Same space with a different spectral value."""
        return Space(self.label, self.dim, self.kind, spectral)

    @property
    def lam(self) -> complex:
        if self.spectral is None:
            raise SpaceError(f"space {self.label!r} has no spectral value")
        return self.spectral


def aux(label: str, dim: int = 2, spectral: complex | None = None) -> Space:
    return Space(str(label), dim, Kind.AUXILIARY, spectral)


def quantum(label: str, dim: int = 2) -> Space:
    return Space(str(label), dim, Kind.QUANTUM, None)


class Orientation(str, Enum):
    ORDERED = "ordered"
    ANTIORDERED = "antiordered"


@dataclass(frozen=True)
class IndexSet:
    """An ordered set of auxiliary spaces.

    ``bar()`` reverses the member order and flips the orientation flag; it
    is an involution.
    """

    members: tuple[Space, ...]
    orientation: Orientation = Orientation.ORDERED

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        object.__setattr__(self, "orientation", Orientation(self.orientation))
        labels = self.labels
        if len(set(labels)) != len(labels):
            raise SpaceError(f"duplicate labels in index set {labels}")

    @classmethod
    def of(cls, labels: Iterable, spectral, dim: int = 2) -> IndexSet:
        """Build an ordered set; ``spectral`` is a scalar or one value per label."""
        labels = [str(x) for x in labels]
        if np.isscalar(spectral) or spectral is None:
            spectral = [spectral] * len(labels)
        return cls(tuple(aux(lb, dim, s) for lb, s in zip(labels, spectral, strict=True)))

    def bar(self) -> IndexSet:
        flipped = (
            Orientation.ANTIORDERED
            if self.orientation is Orientation.ORDERED
            else Orientation.ORDERED
        )
        return IndexSet(self.members[::-1], flipped)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.members)

    @property
    def spectral(self) -> tuple[complex, ...]:
        return tuple(s.lam for s in self.members)

    def with_spectral(self, values) -> IndexSet:
        if np.isscalar(values):
            values = [values] * len(self)
        return IndexSet(
            tuple(s.at(v) for s, v in zip(self.members, values, strict=True)), self.orientation
        )

    def map_spectral(self, fn) -> IndexSet:
        return self.with_spectral([fn(s.lam) for s in self.members])

    def isdisjoint(self, other: IndexSet) -> bool:
        return not set(self.labels) & set(other.labels)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return IndexSet(self.members[i], self.orientation)
        return self.members[i]


def _prod(dims: Iterable[int]) -> int:
    return int(reduce(lambda a, b: a * b, dims, 1))


@dataclass(frozen=True, eq=False)
class MultiOp:
    """A dense complex operator on an ordered list of spaces."""

    spaces: tuple[Space, ...]
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        spaces = tuple(self.spaces)
        labels = [s.label for s in spaces]
        if len(set(labels)) != len(labels):
            raise SpaceError(f"duplicate labels {labels}")
        mat = np.asarray(self.matrix, dtype=complex)
        n = _prod(s.dim for s in spaces)
        if mat.shape != (n, n):
            raise SpaceError(f"matrix shape {mat.shape} does not match space dims {n}")
        mat.setflags(write=False)
        object.__setattr__(self, "spaces", spaces)
        object.__setattr__(self, "matrix", mat)

    # -- constructors -----------------------------------------------------

    @classmethod
    def identity(cls, spaces: Sequence[Space] = ()) -> MultiOp:
        spaces = tuple(spaces)
        return cls(spaces, np.eye(_prod(s.dim for s in spaces), dtype=complex))

    @classmethod
    def scalar(cls, z: complex) -> MultiOp:
        return cls((), np.array([[z]], dtype=complex))

    @classmethod
    def permutation(cls, a: Space, b: Space) -> MultiOp:
        """The operator exchanging two spaces of equal dimension."""
        if a.dim != b.dim:
            raise SpaceError("permutation needs spaces of equal dimension")
        d = a.dim
        p = np.zeros((d * d, d * d), dtype=complex)
        for i in range(d):
            for j in range(d):
                p[i * d + j, j * d + i] = 1.0
        return cls((a, b), p)

    # -- basic accessors --------------------------------------------------

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.spaces)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.spaces)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def value(self) -> complex:
        """The scalar value of a 0-space operator."""
        if self.spaces:
            raise SpaceError(f"operator on {self.labels} is not a scalar")
        return complex(self.matrix[0, 0])

    def _tensor(self) -> np.ndarray:
        return self.matrix.reshape(self.dims * 2)

    # -- arithmetic -------------------------------------------------------

    def __matmul__(self, other: MultiOp) -> MultiOp:
        return compose(self, other)

    def __mul__(self, z) -> MultiOp:
        return MultiOp(self.spaces, self.matrix * z)

    __rmul__ = __mul__

    def __truediv__(self, z) -> MultiOp:
        return MultiOp(self.spaces, self.matrix / z)

    def __add__(self, other: MultiOp) -> MultiOp:
        a, b = _align_pair(self, other)
        return MultiOp(a.spaces, a.matrix + b.matrix)

    def __sub__(self, other: MultiOp) -> MultiOp:
        a, b = _align_pair(self, other)
        return MultiOp(a.spaces, a.matrix - b.matrix)

    def __neg__(self) -> MultiOp:
        return MultiOp(self.spaces, -self.matrix)

    def inv(self) -> MultiOp:
        return MultiOp(self.spaces, np.linalg.inv(self.matrix))

    def transpose(self, subset: Iterable[str] | None = None) -> MultiOp:
        if subset is None:
            subset = self.labels
        return partial_transpose(self, subset)

    def trace(self, subset: Iterable[str] | None = None) -> MultiOp:
        if subset is None:
            subset = self.labels
        return partial_trace(self, subset)

    def reorder(self, labels: Sequence[str]) -> MultiOp:
        """Permute tensor legs so that the space list follows ``labels``."""
        labels = [str(x) for x in labels]
        if sorted(labels) != sorted(self.labels):
            raise SpaceError(f"cannot reorder {self.labels} as {labels}")
        if list(labels) == list(self.labels):
            return self
        perm = [self.labels.index(lb) for lb in labels]
        n = len(perm)
        t = self._tensor().transpose(perm + [p + n for p in perm])
        spaces = tuple(self.spaces[p] for p in perm)
        return MultiOp(spaces, t.reshape(self.dim, self.dim))

    def relabel(self, mapping: dict) -> MultiOp:
        """Rename spaces; useful to evaluate the same operator on other legs."""
        spaces = []
        for s in self.spaces:
            new = mapping.get(s.label, s)
            if isinstance(new, str):
                new = Space(new, s.dim, s.kind, s.spectral)
            if new.dim != s.dim:
                raise SpaceError(f"relabel changes dim of {s.label!r}")
            spaces.append(new)
        return MultiOp(tuple(spaces), self.matrix)

    def allclose(self, other: MultiOp, tol: float = 1e-12) -> bool:
        return residual(self, other) <= tol


def _merge_spaces(*space_lists: Sequence[Space]) -> tuple[Space, ...]:
    out: list[Space] = []
    seen: dict[str, Space] = {}
    for lst in space_lists:
        for s in lst:
            if s.label in seen:
                if seen[s.label].dim != s.dim:
                    raise SpaceError(
                        f"space {s.label!r} has conflicting dims {seen[s.label].dim} and {s.dim}"
                    )
                continue
            seen[s.label] = s
            out.append(s)
    return tuple(out)


def embed(op: MultiOp, target: Sequence[Space]) -> MultiOp:
    """Extend ``op`` by identities to act on ``target``, ordered as ``target``."""
    target = tuple(target)
    tlabels = [s.label for s in target]
    if len(set(tlabels)) != len(tlabels):
        raise SpaceError(f"duplicate labels in target {tlabels}")
    tmap = {s.label: s for s in target}
    for s in op.spaces:
        if s.label not in tmap:
            raise SpaceError(f"space {s.label!r} not in target {tlabels}")
        if tmap[s.label].dim != s.dim:
            raise SpaceError(f"space {s.label!r}: dim {s.dim} vs target dim {tmap[s.label].dim}")
    rest = [s for s in target if s.label not in op.labels]
    mat = op.matrix
    if rest:
        mat = np.kron(mat, np.eye(_prod(s.dim for s in rest)))
    full = MultiOp(op.spaces + tuple(rest), mat)
    out = full.reorder(tlabels)
    return MultiOp(target, out.matrix)


def _align_pair(a: MultiOp, b: MultiOp) -> tuple[MultiOp, MultiOp]:
    target = _merge_spaces(a.spaces, b.spaces)
    return embed(a, target), embed(b, target)


def compose(a: MultiOp, b: MultiOp) -> MultiOp:
    """Matrix product after embedding both operands into the union of spaces.

    The union lists ``a``'s spaces first, then the spaces new in ``b``.
    """
    if a.spaces == b.spaces:
        return MultiOp(a.spaces, a.matrix @ b.matrix)
    ea, eb = _align_pair(a, b)
    return MultiOp(ea.spaces, ea.matrix @ eb.matrix)


def product(ops: Iterable[MultiOp]) -> MultiOp:
    """Left-to-right ordered product; the space list is fixed up front."""
    ops = list(ops)
    if not ops:
        return MultiOp.identity(())
    target = _merge_spaces(*(o.spaces for o in ops))
    mat = np.eye(_prod(s.dim for s in target), dtype=complex)
    for o in ops:
        mat = mat @ embed(o, target).matrix
    return MultiOp(target, mat)


def _check_subset(op: MultiOp, subset: Iterable[str]) -> list[int]:
    subset = [str(x) for x in subset]
    unknown = [x for x in subset if x not in op.labels]
    if unknown:
        raise SpaceError(f"unknown labels {unknown} for operator on {op.labels}")
    return [op.labels.index(x) for x in subset]


def partial_transpose(op: MultiOp, subset: Iterable[str]) -> MultiOp:
    """Swap row and column indices of the tensor factors in ``subset``."""
    idx = set(_check_subset(op, subset))
    n = len(op.spaces)
    perm = list(range(2 * n))
    for i in idx:
        perm[i], perm[i + n] = i + n, i
    t = op._tensor().transpose(perm)
    return MultiOp(op.spaces, t.reshape(op.dim, op.dim))


def partial_trace(op: MultiOp, subset: Iterable[str]) -> MultiOp:
    """Trace out ``subset``; tracing everything yields a 0-space scalar."""
    idx = sorted(set(_check_subset(op, subset)))
    n = len(op.spaces)
    keep = [i for i in range(n) if i not in idx]
    t = op._tensor()
    # move traced legs last, then contract row/col pairs
    order = keep + [i + n for i in keep] + idx + [i + n for i in idx]
    t = t.transpose(order)
    dk = _prod(op.spaces[i].dim for i in keep)
    dt = _prod(op.spaces[i].dim for i in idx)
    t = t.reshape(dk, dk, dt, dt)
    mat = np.trace(t, axis1=2, axis2=3)
    return MultiOp(tuple(op.spaces[i] for i in keep), mat)


def residual(lhs: MultiOp, rhs: MultiOp) -> float:
    """Relative Frobenius distance ``|lhs - rhs| / max(|lhs|, |rhs|, floor)``."""
    a, b = _align_pair(lhs, rhs)
    scale = max(np.linalg.norm(a.matrix), np.linalg.norm(b.matrix), NORM_FLOOR)
    return float(np.linalg.norm(a.matrix - b.matrix) / scale)


def proportionality_scalar(op: MultiOp) -> tuple[complex, float]:
    """Return ``z = Tr(op)/dim`` and how far ``op`` is from ``z * 1``."""
    z = complex(np.trace(op.matrix)) / op.dim
    dev = np.linalg.norm(op.matrix - z * np.eye(op.dim))
    return z, float(dev / max(np.linalg.norm(op.matrix), NORM_FLOOR))


def commutator_residual(a: MultiOp, b: MultiOp) -> float:
    """``|ab - ba| / max(|a||b|, floor)`` in the union of both space lists."""
    ea, eb = _align_pair(a, b)
    comm = ea.matrix @ eb.matrix - eb.matrix @ ea.matrix
    scale = max(np.linalg.norm(ea.matrix) * np.linalg.norm(eb.matrix), NORM_FLOOR)
    return float(np.linalg.norm(comm) / scale)


# -- matrix dump ------------------------------------------------------------


def _fmt_space(s: Space) -> str:
    head = f"{s.label}:{s.dim}:{s.kind.value}"
    if s.spectral is not None:
        head += f":{float(s.spectral.real)!r},{float(s.spectral.imag)!r}"
    return head


def _parse_space(token: str) -> Space:
    parts = token.split(":")
    if len(parts) not in (3, 4):
        raise ValueError(f"bad space token {token!r}")
    spectral = None
    if len(parts) == 4:
        re, im = parts[3].split(",")
        spectral = complex(float(re), float(im))
    return Space(parts[0], int(parts[1]), Kind(parts[2]), spectral)


def dumps(op: MultiOp) -> str:
    """Serialize as a header line plus row-major ``re im`` pairs, one row per line."""
    lines = ["spaces: " + " ".join(_fmt_space(s) for s in op.spaces)]
    for row in op.matrix:
        lines.append(" ".join(f"{float(z.real)!r} {float(z.imag)!r}" for z in row))
    return "\n".join(lines) + "\n"


def loads(text: str) -> MultiOp:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("spaces:"):
        raise ValueError("missing 'spaces:' header")
    tokens = lines[0][len("spaces:"):].split()
    spaces = tuple(_parse_space(t) for t in tokens)
    rows = []
    for ln in lines[1:]:
        vals = [float(x) for x in ln.split()]
        rows.append([complex(vals[i], vals[i + 1]) for i in range(0, len(vals), 2)])
    return MultiOp(spaces, np.array(rows, dtype=complex))
