"""Linear search spaces for Hessian candidates and the sampled linear systems built on them."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, IllConditioned
from ..expr import (ONE, ZERO, SampleDomain, add, as_expr, coord, evaluate_array, mul, parse,
                    time, vel)
from ..mechanics import MAX_DIM, HessianCandidate


def monomials(variables, degree: int):
    """All monomials of total degree <= ``degree``, lowest degree first."""
    out = [ONE]
    for d in range(1, degree + 1):
        for combo in itertools.combinations_with_replacement(variables, d):
            out.append(mul(*combo))
    return out


@dataclass(frozen=True)
class AnsatzFamily:
    """Per-entry bases for a symmetric n x n matrix; one unknown per basis element.

    ``entries`` maps (i, j) with 1 <= i <= j <= n to a tuple of Expr.  The
    unknown attached to an element is shared by M_ij and M_ji, which makes
    symmetry (H3) structural.
    """

    n: int
    entries: tuple  # ((i, j), (basis...)) in row-major order

    def __post_init__(self):
        if not 1 <= self.n <= MAX_DIM:
            raise DimensionMismatch(f"dimension must lie in 1..{MAX_DIM}")
        clean = []
        for (i, j), basis in self.entries:
            i, j = min(i, j), max(i, j)
            if not 1 <= i <= j <= self.n:
                raise DimensionMismatch(f"ansatz entry ({i},{j}) outside a {self.n}x{self.n} matrix")
            clean.append(((i, j), tuple(as_expr(b) for b in basis)))
        clean.sort(key=lambda kv: kv[0])
        keys = [k for k, _ in clean]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate ansatz entry")
        object.__setattr__(self, "entries", tuple(clean))

    @classmethod
    def from_mapping(cls, n, mapping):
        """Build from {"i,j" or (i, j): [expr or str, ...]}."""
        items = []
        for key, basis in mapping.items():
            if isinstance(key, str):
                i, j = (int(x) for x in key.split(","))
            else:
                i, j = key
            items.append(((i, j), tuple(parse(b, n) if isinstance(b, str) else b for b in basis)))
        return cls(n, tuple(items))

    @classmethod
    def monomial(cls, n: int, degree: int = 2, include_time: bool = False):
        """Every entry spanned by monomials in q, v (and t) up to ``degree``."""
        variables = [coord(i) for i in range(1, n + 1)] + [vel(i) for i in range(1, n + 1)]
        if include_time:
            variables = [time()] + variables
        basis = tuple(monomials(variables, degree))
        return cls(n, tuple(((i, j), basis) for i in range(1, n + 1) for j in range(i, n + 1)))

    @property
    def size(self) -> int:
        return sum(len(b) for _, b in self.entries)

    def elements(self):
        """(entry, basis expr) per unknown, in unknown order."""
        for key, basis in self.entries:
            for b in basis:
                yield key, b

    def basis_matrix(self, k: int) -> HessianCandidate:
        """The matrix obtained with theta = e_k."""
        (i, j), b = list(self.elements())[k]
        return _entry_matrix(self.n, i, j, b)

    def basis_matrices(self):
        return [_entry_matrix(self.n, i, j, b) for (i, j), b in self.elements()]

    def build(self, theta) -> HessianCandidate:
        """sum_k theta_k B_k with exact (Fraction) or float coefficients."""
        n = self.n
        acc = [[[] for _ in range(n)] for _ in range(n)]
        for ((i, j), b), c in zip(self.elements(), theta):
            if c == 0:
                continue
            acc[i - 1][j - 1].append(mul(c, b))
        rows = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                rows[i][j] = rows[j][i] = add(*acc[i][j]) if acc[i][j] else ZERO
        return HessianCandidate(tuple(tuple(r) for r in rows))

    def gram_rank_check(self, domain: SampleDomain, seed: int, samples: int | None = None, tol=1e-9):
        """Sampled Gram rank of each entry's basis; raises if some entry is dependent."""
        for key, basis in self.entries:
            if not basis:
                continue
            count = samples or max(4 * len(basis), 64)
            syms = frozenset().union(*(b.free_symbols for b in basis))
            env = domain.sample(syms, count, seed) if syms else {"__const__": np.zeros(count)}
            X = np.column_stack([evaluate_array(b, env) for b in basis])
            X = X[~np.isnan(X).any(axis=1)]
            if X.shape[0] < len(basis):
                raise IllConditioned(f"too few valid samples to check the basis of entry {key}")
            s = np.linalg.svd(X / np.linalg.norm(X, axis=0), compute_uv=False)
            rank = int(np.sum(s > tol * s[0])) if s[0] > 0 else 0
            if rank < len(basis):
                raise ValueError(f"ansatz basis for entry {key} is linearly dependent "
                                 f"(sampled rank {rank} < {len(basis)})")

    def to_dict(self):
        return {f"{i},{j}": [str(b) for b in basis] for (i, j), basis in self.entries}


def _entry_matrix(n, i, j, b):
    rows = [[ZERO] * n for _ in range(n)]
    rows[i - 1][j - 1] = b
    rows[j - 1][i - 1] = b
    return HessianCandidate(tuple(tuple(r) for r in rows))


def sample_columns(columns, domain: SampleDomain, count: int, seed: int):
    """Stack sampled residuals into a dense system.

    ``columns[k]`` is the list of scalar residual Expr produced by unknown k
    (every column lists the same residuals in the same order).  Row (r, s)
    holds residual r at sample point s.  Rows with a non-finite entry are
    dropped; the number dropped is returned alongside the matrix.
    """
    exprs = [e for col in columns for e in col]
    syms = frozenset().union(*(e.free_symbols for e in exprs)) if exprs else frozenset()
    env = domain.sample(syms, count, seed) if syms else {"__const__": np.zeros(count)}
    if not columns:
        return np.zeros((0, 0)), 0
    R = len(columns[0])
    A = np.zeros((R * count, len(columns)))
    for k, col in enumerate(columns):
        if len(col) != R:
            raise ValueError("every column must list the same residuals")
        for r, e in enumerate(col):
            A[r * count:(r + 1) * count, k] = 0.0 if e == ZERO else evaluate_array(e, env)
    bad = np.isnan(A).any(axis=1)
    return A[~bad], int(bad.sum())


__all__ = ["AnsatzFamily", "monomials", "sample_columns"]
