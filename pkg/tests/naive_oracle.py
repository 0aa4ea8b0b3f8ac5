"""Index-loop reference implementations of the tensor kernels.

Operators are plain ``(labels, dims, matrix)`` triples and every entry is
computed by explicit loops over multi-indices, so nothing here shares code
with the reshape/transpose kernels under test.
"""

from __future__ import annotations

import itertools

import numpy as np


def _multi(dims):
    return list(itertools.product(*[range(d) for d in dims]))


def _flat(idx, dims):
    k = 0
    for i, d in zip(idx, dims):
        k = k * d + i
    return k


def embed(labels, dims, mat, target_labels, target_dims):
    """Entry ``(I, J)`` is ``mat[I|op, J|op]`` times deltas on the other legs."""
    pos = [target_labels.index(lb) for lb in labels]
    rest = [k for k in range(len(target_labels)) if k not in pos]
    n = int(np.prod(target_dims))
    out = np.zeros((n, n), dtype=complex)
    for I in _multi(target_dims):
        for J in _multi(target_dims):
            if any(I[k] != J[k] for k in rest):
                continue
            i = _flat([I[p] for p in pos], dims)
            j = _flat([J[p] for p in pos], dims)
            out[_flat(I, target_dims), _flat(J, target_dims)] = mat[i, j]
    return out


def union(la, da, lb, db):
    labels, dims = list(la), list(da)
    for lbl, d in zip(lb, db):
        if lbl not in labels:
            labels.append(lbl)
            dims.append(d)
    return labels, dims


def compose(la, da, ma, lb, db, mb):
    labels, dims = union(la, da, lb, db)
    ea = embed(la, da, ma, labels, dims)
    eb = embed(lb, db, mb, labels, dims)
    n = ea.shape[0]
    out = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            s = 0j
            for k in range(n):
                s += ea[i, k] * eb[k, j]
            out[i, j] = s
    return labels, dims, out


def partial_transpose(labels, dims, mat, subset):
    sub = {labels.index(x) for x in subset}
    out = np.zeros_like(mat)
    for I in _multi(dims):
        for J in _multi(dims):
            I2 = [J[k] if k in sub else I[k] for k in range(len(dims))]
            J2 = [I[k] if k in sub else J[k] for k in range(len(dims))]
            out[_flat(I2, dims), _flat(J2, dims)] = mat[_flat(I, dims), _flat(J, dims)]
    return out


def partial_trace(labels, dims, mat, subset):
    keep = [k for k in range(len(dims)) if labels[k] not in subset]
    traced = [k for k in range(len(dims)) if labels[k] in subset]
    kd = [dims[k] for k in keep]
    td = [dims[k] for k in traced]
    n = int(np.prod(kd)) if kd else 1
    out = np.zeros((n, n), dtype=complex)
    for I in _multi(kd):
        for J in _multi(kd):
            s = 0j
            for T in _multi(td):
                full_i, full_j = [0] * len(dims), [0] * len(dims)
                for k, v in zip(keep, I):
                    full_i[k] = v
                for k, v in zip(keep, J):
                    full_j[k] = v
                for k, v in zip(traced, T):
                    full_i[k] = full_j[k] = v
                s += mat[_flat(full_i, dims), _flat(full_j, dims)]
            out[_flat(I, kd), _flat(J, kd)] = s
    return [labels[k] for k in keep], out
