"""Linear algebra over GF(2) for linear classical rules."""

import numpy as np


def _as_gf2(m):
    return np.asarray(m, dtype=np.uint8) & 1


def rank(m):
    a = _as_gf2(m).copy()
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        piv = np.flatnonzero(a[r:, c])
        if piv.size == 0:
            continue
        p = r + piv[0]
        a[[r, p]] = a[[p, r]]
        hit = np.flatnonzero(a[:, c])
        hit = hit[hit != r]
        a[hit] ^= a[r]
        r += 1
        if r == rows:
            break
    return r


def inverse(m):
    a = _as_gf2(m)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    aug = np.concatenate([a, np.eye(n, dtype=np.uint8)], axis=1)
    for c in range(n):
        piv = np.flatnonzero(aug[c:, c])
        if piv.size == 0:
            raise np.linalg.LinAlgError("matrix is singular over GF(2)")
        p = c + piv[0]
        aug[[c, p]] = aug[[p, c]]
        hit = np.flatnonzero(aug[:, c])
        hit = hit[hit != c]
        aug[hit] ^= aug[c]
    return aug[:, n:].copy()


def matvec(m, x):
    return (_as_gf2(m).astype(np.int64) @ _as_gf2(x).astype(np.int64)) % 2


def matmul(a, b):
    return ((_as_gf2(a).astype(np.int64) @ _as_gf2(b).astype(np.int64)) % 2).astype(np.uint8)


def circulant(taps, r):
    """M[j, (j + t) mod r] = 1 for every tap t, accumulated mod 2."""
    m = np.zeros((r, r), dtype=np.uint8)
    for j in range(r):
        for t in taps:
            m[j, (j + t) % r] ^= 1
    return m


def xor_rule(r):
    """b'_j = b_{j-1} + b_j + b_{j+1} on Z_r."""
    return circulant((-1, 0, 1), r)
