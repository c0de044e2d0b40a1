"""Protograph base matrices, design rates and random lifting."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.sparse as sp


class ParameterError(ValueError):
    """Raised when code parameters are inconsistent."""


class ColumnRole(enum.Enum):
    INFORMATION = "information"
    PUNCTURED_INFORMATION = "punctured_information"
    PARITY = "parity"


@dataclass(frozen=True, eq=False)
class BaseMatrix:
    """Non-negative integer matrix; entry (i, j) is the number of edges
    between check type i and variable type j."""

    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=np.int64, copy=True)
        if arr.ndim == 1:
            arr = arr[None, :]
        if arr.ndim != 2:
            raise ParameterError("base matrix must be two-dimensional")
        if (arr < 0).any():
            raise ParameterError("base matrix entries must be non-negative")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def __getitem__(self, key):
        return self.entries[key]

    def __eq__(self, other):
        if not isinstance(other, BaseMatrix):
            return NotImplemented
        return self.shape == other.shape and bool((self.entries == other.entries).all())

    def __hash__(self):
        return hash((self.shape, self.entries.tobytes()))

    def __repr__(self):
        return f"BaseMatrix({self.entries.tolist()})"

    def tolist(self) -> list[list[int]]:
        return self.entries.tolist()

    def check_connected(self) -> None:
        """Raise if some row or column has no edges."""
        if (self.entries.sum(axis=1) == 0).any():
            raise ParameterError("base matrix has an empty row")
        if (self.entries.sum(axis=0) == 0).any():
            raise ParameterError("base matrix has an empty column")


def _regular_k(l: int, r: int) -> int:
    if l < 2 or r % l != 0 or r // l < 2:
        raise ParameterError(f"(l, r) = ({l}, {r}) needs l >= 2 and r = k*l with k >= 2")
    return r // l


def _check_mn(l: int, r: int, g: int) -> None:
    if g < 1 or r < 1 or l != g * r:
        raise ParameterError(f"(l, r, g) = ({l}, {r}, {g}) needs l = g*r with g, r >= 1")


def _check_L(L) -> None:
    if L != math.inf and (int(L) != L or L < 1):
        raise ParameterError(f"coupling number must be a positive integer or inf, got {L}")


def regular_base(l: int, r: int) -> BaseMatrix:
    """1 x k base matrix [l, ..., l] of the (l, r)-regular ensemble, r = k*l."""
    k = _regular_k(l, r)
    return BaseMatrix(np.full((1, k), l))


def mn_base(l: int, r: int, g: int) -> BaseMatrix:
    """g x (g+1) MacKay-Neal base matrix; column 0 (all r) is punctured."""
    _check_mn(l, r, g)
    B = np.ones((g, g + 1), dtype=np.int64)
    B[:, 0] = r
    return BaseMatrix(B)


# ARJA protograph with split extension: column 0 punctured, columns 1-4 sent
# by the source, columns 5-8 are the degree-2 nodes sent by the relay.
ARJA_SPLIT_EXTENDED = (
    (0, 0, 0, 1, 0, 0, 1, 0, 0),
    (0, 1, 0, 0, 1, 1, 1, 0, 0),
    (1, 1, 0, 1, 0, 1, 0, 0, 0),
    (1, 1, 0, 0, 0, 0, 0, 1, 0),
    (1, 0, 0, 1, 0, 0, 0, 1, 1),
    (1, 0, 0, 0, 1, 0, 0, 0, 1),
    (2, 0, 1, 0, 0, 0, 0, 0, 0),
)
ARJA_SENDER_COLS = range(0, 5)
ARJA_RELAY_COLS = range(5, 9)


def arja_split_extended_base() -> BaseMatrix:
    return BaseMatrix(np.array(ARJA_SPLIT_EXTENDED))


def design_rate_regular(l: int, r: int, L=math.inf) -> Fraction:
    """Design rate 1 - (L + l - 1) / (L k) of the coupled (l, r, L) code.

    ``L = math.inf`` gives the rate 1 - 1/k of the uncoupled ensemble.
    """
    k = _regular_k(l, r)
    _check_L(L)
    if L == math.inf:
        return 1 - Fraction(1, k)
    L = int(L)
    return 1 - Fraction(L + l - 1, L * k)


def design_rate_mn(l: int, r: int, g: int, L=math.inf) -> Fraction:
    """Design rate 1/g - (1 - 1/g) / L of the coupled (l, r, g, L)-MN code."""
    _check_mn(l, r, g)
    _check_L(L)
    base_rate = Fraction(1, g)
    if L == math.inf:
        return base_rate
    return base_rate - (1 - base_rate) / int(L)


@dataclass(frozen=True, eq=False)
class LiftedCode:
    """Parity-check matrix obtained by lifting a base matrix with factor q."""

    lifting_factor: int
    parity_check: sp.csr_matrix
    base: BaseMatrix
    column_roles: tuple = field(default=())

    @property
    def n(self) -> int:
        return self.parity_check.shape[1]

    @property
    def m(self) -> int:
        return self.parity_check.shape[0]

    def base_column(self, var: np.ndarray | int):
        """Base-matrix column that lifted variable ``var`` belongs to."""
        return np.asarray(var) // self.lifting_factor

    def to_alist(self) -> str:
        """Plain-text edge list: ``q m n`` header then ``row col`` per nonzero."""
        coo = self.parity_check.tocoo()
        order = np.lexsort((coo.col, coo.row))
        lines = [f"{self.lifting_factor} {self.m} {self.n}"]
        lines += [f"{r} {c}" for r, c in zip(coo.row[order], coo.col[order])]
        return "\n".join(lines) + "\n"


def read_alist(text: str) -> tuple[int, sp.csr_matrix]:
    """Parse the output of :meth:`LiftedCode.to_alist`; returns (q, H)."""
    lines = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
    q, m, n = (int(v) for v in lines[0])
    pairs = np.array([[int(a), int(b)] for a, b in lines[1:]], dtype=np.int64).reshape(-1, 2)
    data = np.ones(len(pairs), dtype=np.uint8)
    H = sp.csr_matrix((data, (pairs[:, 0], pairs[:, 1])), shape=(m, n))
    return q, H


def _disjoint_permutations(count: int, q: int, rng: np.random.Generator) -> list[np.ndarray]:
    # A colliding row is fixed by swapping its target with another row for
    # which the swap is collision-free; a few restarts cover dead ends.
    prev = np.zeros((0, q), dtype=np.int64)  # earlier permutations, one per row
    perms = []
    for _ in range(count):
        for _attempt in range(100):
            perm = rng.permutation(q)
            for _pass in range(10 * q):
                bad = np.flatnonzero((prev == perm).any(axis=0))
                if bad.size == 0:
                    break
                a = bad[0]
                candidates = np.flatnonzero(~np.isin(perm, prev[:, a]) & (prev != perm[a]).all(axis=0))
                if candidates.size == 0:
                    break
                b = rng.choice(candidates)
                perm[a], perm[b] = perm[b], perm[a]
            if not (prev == perm).any():
                break
        else:
            raise RuntimeError(f"could not draw {count} disjoint permutations of size {q}")
        prev = np.vstack([prev, perm])
        perms.append(perm)
    return perms


def lift(base: BaseMatrix, q: int, seed=None, column_roles: Sequence = ()) -> LiftedCode:
    """Replace each entry B(i, j) by a sum of B(i, j) random q x q
    permutation matrices with pairwise disjoint supports."""
    if q < 1 or q < base.entries.max(initial=0):
        raise ParameterError(f"lifting factor {q} is smaller than the largest base entry")
    rng = np.random.default_rng(seed)
    rows, cols = [], []
    offsets = np.arange(q)
    for i, j in zip(*np.nonzero(base.entries)):
        for perm in _disjoint_permutations(int(base.entries[i, j]), q, rng):
            rows.append(i * q + offsets)
            cols.append(j * q + perm)
    if rows:
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
    data = np.ones(len(rows), dtype=np.uint8)
    H = sp.csr_matrix((data, (rows, cols)), shape=(base.rows * q, base.cols * q))
    return LiftedCode(q, H, base, tuple(column_roles))
