"""One-level Schwarz preconditioners built from a Decomposition.

SORAS:  M^{-1} v = sum_j R_j^T D_j B_j^{-1} D_j R_j v
ORAS:   M^{-1} v = sum_j R_j^T D_j B_j^{-1} R_j v

Local solves reuse the factorizations stored on each subdomain; the j-loop
runs in a fixed order so results are bit-stable across runs.
"""

from dataclasses import dataclass

import numpy as np

SORAS = "soras"
ORAS = "oras"


@dataclass
class SchwarzPreconditioner:
    """Apply-only linear operator; `local_matrix` selects the factor used for
    the local solves ("B" for the Robin problems, "F" for the local inner
    products — the latter only for symmetry diagnostics)."""

    kind: str
    dec: object
    local_matrix: str = "B"

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in (SORAS, ORAS):
            raise ValueError(f"unknown preconditioner kind {self.kind!r}")
        self.kind = kind
        if self.local_matrix not in ("B", "F"):
            raise ValueError("local_matrix must be 'B' or 'F'")

    @property
    def n(self):
        return self.dec.mesh.num_vertices

    def _factor(self, sd):
        f = sd.local.factor_B if self.local_matrix == "B" else sd.local.factor_F
        if f is None:
            raise ValueError(f"subdomain {sd.index}: requested local factor unavailable")
        return f

    def apply(self, v):
        v = np.asarray(v, dtype=float)
        out = np.zeros_like(v)
        for sd in self.dec.subdomains:
            rv = v[sd.dofs]
            if self.kind == SORAS:
                rv = sd.weights * rv
            sol = self._factor(sd).solve(rv)
            out[sd.dofs] += sd.weights * sol
        return out

    __call__ = apply


def apply(p, v):
    return p.apply(v)


def materialize(p, A, cap=5000):
    """M^{-1}A as a dense matrix (column k = apply(p, A e_k), computed with
    batched local solves).  Refuses systems larger than `cap`."""
    n = A.shape[0]
    if n > cap:
        raise ValueError(f"materialize: {n} dofs exceeds cap {cap}")
    Ad = A.toarray() if hasattr(A, "toarray") else np.asarray(A, dtype=float)
    out = np.zeros((n, n))
    for sd in p.dec.subdomains:
        rows = Ad[sd.dofs, :]
        if p.kind == SORAS:
            rows = sd.weights[:, None] * rows
        sol = p._factor(sd).solve(rows)
        out[sd.dofs, :] += sd.weights[:, None] * sol
    return out
