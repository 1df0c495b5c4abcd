"""Dense operators on labelled sites.

Two composition rules are supported.  Tensor spaces (classical outcomes,
qubits) have joint dimension D**n with the first listed site most
significant.  Direct-sum spaces (the one-particle fermionic sector) have
dimension n*m, site i owning modes i*m .. i*m+m-1.
"""

from __future__ import annotations

import numpy as np


class SiteSpace:
    def __init__(self, sites, local_dim, kind="tensor"):
        self.sites = tuple(sites)
        if len(set(self.sites)) != len(self.sites):
            raise ValueError(f"duplicate sites in {self.sites}")
        self.pos = {s: i for i, s in enumerate(self.sites)}
        self.D = int(local_dim)
        self.kind = kind
        self.n = len(self.sites)

    @property
    def dim(self):
        return self.D**self.n if self.kind == "tensor" else self.D * self.n

    def positions(self, sites):
        try:
            return [self.pos[s] for s in sites]
        except KeyError as exc:
            raise ValueError(f"site {exc.args[0]!r} not in space {self.sites}") from None

    def modes(self, sites):
        D = self.D
        return np.array([self.pos[s] * D + a for s in sites for a in range(D)], dtype=int)

    # -- operators -------------------------------------------------------

    def embed(self, op, op_sites):
        """op acting on op_sites (in that order), identity elsewhere."""
        op = np.asarray(op)
        if self.kind == "direct_sum":
            out = np.eye(self.dim, dtype=np.result_type(op, float))
            idx = self.modes(op_sites)
            out[np.ix_(idx, idx)] = op
            return out
        pos = self.positions(op_sites)
        n, D, k = self.n, self.D, len(pos)
        if k == n and pos == list(range(n)):
            return op.copy()
        rest = [i for i in range(n) if i not in pos]
        full = np.kron(op, np.eye(D ** (n - k), dtype=op.dtype))
        order = pos + rest
        inv = list(np.argsort(order))
        T = full.reshape((D,) * (2 * n)).transpose(inv + [n + i for i in inv])
        return T.reshape(D**n, D**n)

    def trivial_on(self, op, site, tol):
        p = self.pos[site]
        if self.kind == "direct_sum":
            idx = self.modes([site])
            other = np.setdiff1d(np.arange(self.dim), idx)
            blk = op[np.ix_(idx, idx)] - np.eye(self.D)
            off = max(
                np.abs(op[np.ix_(idx, other)]).max(initial=0.0),
                np.abs(op[np.ix_(other, idx)]).max(initial=0.0),
            )
            return max(np.abs(blk).max(), off) <= tol
        n, D = self.n, self.D
        T = np.moveaxis(op.reshape((D,) * (2 * n)), [p, n + p], [2 * n - 2, 2 * n - 1])
        red = np.trace(T, axis1=-2, axis2=-1) / D
        diff = T - red[..., None, None] * np.eye(D)
        return np.abs(diff).max() <= tol

    def support(self, op, tol):
        return tuple(s for s in self.sites if not self.trivial_on(op, s, tol))

    def reduce(self, op, keep):
        """Normalized partial trace onto keep (tensor) or principal block (direct sum)."""
        keep = list(keep)
        if self.kind == "direct_sum":
            idx = self.modes(keep)
            return op[np.ix_(idx, idx)].copy()
        n, D = self.n, self.D
        kpos = self.positions(keep)
        T = op.reshape((D,) * (2 * n))
        current = list(range(n))
        for p in sorted(set(range(n)) - set(kpos), reverse=True):
            i = current.index(p)
            m = len(current)
            T = np.trace(T, axis1=i, axis2=m + i) / D
            current.pop(i)
        perm = [current.index(p) for p in kpos]
        m = len(current)
        T = T.transpose(perm + [m + i for i in perm])
        return T.reshape(D ** len(kpos), D ** len(kpos))

    # -- vectors (classical effects, states) -----------------------------

    def vector_trivial_on(self, vec, site, tol):
        T = vec.reshape((self.D,) * self.n)
        p = self.pos[site]
        return np.abs(T - T.mean(axis=p, keepdims=True)).max() <= tol

    def vector_support(self, vec, tol):
        return tuple(s for s in self.sites if not self.vector_trivial_on(vec, s, tol))

    def vector_reduce(self, vec, keep, mode="mean"):
        kpos = self.positions(keep)
        T = vec.reshape((self.D,) * self.n)
        drop = tuple(sorted(set(range(self.n)) - set(kpos)))
        T = T.mean(axis=drop) if mode == "mean" else T.sum(axis=drop)
        remaining = [p for p in range(self.n) if p not in drop]
        T = T.transpose([remaining.index(p) for p in kpos])
        return T.reshape(-1)

    def vector_embed(self, vec, vec_sites, fill=None):
        """vec on vec_sites tensored with ``fill`` (default all-ones) elsewhere."""
        pos = self.positions(vec_sites)
        rest = [i for i in range(self.n) if i not in pos]
        other = np.ones(self.D ** len(rest)) if fill is None else fill
        full = np.kron(vec, other).reshape((self.D,) * self.n)
        inv = list(np.argsort(pos + rest))
        return full.transpose(inv).reshape(-1)

    def permutation(self, mapping):
        """Operator sending site s's content to site mapping[s]."""
        if self.kind == "direct_sum":
            P = np.zeros((self.dim, self.dim))
            for s, t in mapping.items():
                P[np.ix_(self.modes([t]), self.modes([s]))] = np.eye(self.D)
            return P
        n, D = self.n, self.D
        idx = np.arange(D**n).reshape((D,) * n)
        # new axis for target t is the old axis of its source
        src = {mapping[s]: s for s in self.sites}
        moved = idx.transpose([self.pos[src[t]] for t in self.sites]).reshape(-1)
        P = np.zeros((D**n, D**n))
        P[np.arange(D**n), moved] = 1.0
        return P


def apply_gate(psi, gate, positions, n, D):
    """Apply a k-site gate to a batch of state vectors of shape (batch, D**n)."""
    batch = psi.shape[0]
    k = len(positions)
    T = psi.reshape((batch,) + (D,) * n)
    G = gate.reshape((D,) * (2 * k))
    out = np.tensordot(G, T, axes=(list(range(k, 2 * k)), [1 + p for p in positions]))
    # axes now: gate outputs (k), batch, untouched sites in order
    untouched = [p for p in range(n) if p not in positions]
    where = {p: i for i, p in enumerate(positions)}
    where.update({p: k + 1 + i for i, p in enumerate(untouched)})
    perm = [k] + [where[p] for p in range(n)]
    return out.transpose(perm).reshape(batch, D**n)


def max_abs(x):
    x = np.asarray(x)
    return float(np.abs(x).max()) if x.size else 0.0
