"""Spatial coupling of protographs."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .base_matrix import (
    BaseMatrix,
    ColumnRole,
    ParameterError,
    _check_mn,
    _regular_k,
    design_rate_mn,
    design_rate_regular,
    mn_base,
    regular_base,
)


@dataclass(frozen=True)
class SpreadingSet:
    """Spreading matrices B_0, ..., B_d summing to ``base``.

    ``roles`` are the column roles of one uncoupled copy and ``family``
    records which constructor produced the set.
    """

    matrices: tuple[BaseMatrix, ...]
    roles: tuple[ColumnRole, ...] = ()
    family: str = "custom"
    params: tuple = ()

    def __post_init__(self):
        if not self.matrices:
            raise ParameterError("spreading set is empty")
        shapes = {m.shape for m in self.matrices}
        if len(shapes) != 1:
            raise ParameterError(f"spreading matrices differ in shape: {sorted(shapes)}")
        if not self.roles:
            roles = (ColumnRole.PARITY,) * self.matrices[0].cols
            object.__setattr__(self, "roles", roles)
        elif len(self.roles) != self.matrices[0].cols:
            raise ParameterError("one role per base column is required")

    @property
    def depth(self) -> int:
        return len(self.matrices) - 1

    @property
    def base(self) -> BaseMatrix:
        return BaseMatrix(sum(m.entries for m in self.matrices))


def regular_spreading(l: int, r: int) -> SpreadingSet:
    """l copies of the 1 x k all-ones row; column 0 of each copy carries information."""
    k = _regular_k(l, r)
    row = BaseMatrix(np.ones((1, k), dtype=np.int64))
    roles = (ColumnRole.INFORMATION,) + (ColumnRole.PARITY,) * (k - 1)
    return SpreadingSet((row,) * l, roles, "regular", (l, r))


def mn_spreading(l: int, r: int, g: int) -> SpreadingSet:
    """MacKay-Neal spreading: B_i holds [r-1, 0 (g-i times), 1 (i times)]
    in row i-1 for 1 <= i <= g-1, and B_0 takes the remainder."""
    _check_mn(l, r, g)
    full = mn_base(l, r, g).entries
    parts = []
    for i in range(1, g):
        Bi = np.zeros((g, g + 1), dtype=np.int64)
        Bi[i - 1] = [r - 1] + [0] * (g - i) + [1] * i
        parts.append(Bi)
    B0 = full - sum(parts, np.zeros_like(full))
    if (B0 < 0).any():
        raise ParameterError(f"MN spreading for (l, r, g) = ({l}, {r}, {g}) gives negative B_0")
    roles = (ColumnRole.PUNCTURED_INFORMATION,) + (ColumnRole.PARITY,) * g
    mats = tuple(BaseMatrix(m) for m in [B0] + parts)
    return SpreadingSet(mats, roles, "mn", (l, r, g))


@dataclass(frozen=True)
class CoupledCode:
    """Band-structured base matrix of L coupled copies plus column roles."""

    base: BaseMatrix
    L: int
    column_roles: tuple[ColumnRole, ...]
    family: str = "custom"
    params: tuple = ()

    @property
    def info_columns(self) -> np.ndarray:
        """Indices of information columns, punctured or not, in copy order."""
        keep = (ColumnRole.INFORMATION, ColumnRole.PUNCTURED_INFORMATION)
        return np.array([j for j, role in enumerate(self.column_roles) if role in keep], dtype=np.int64)

    def design_rate(self):
        if self.family == "regular":
            l, r = self.params
            return design_rate_regular(l, r, self.L)
        if self.family == "regular-uncoupled":
            l, r = self.params
            return design_rate_regular(l, r)
        if self.family == "mn":
            l, r, g = self.params
            return design_rate_mn(l, r, g, self.L)
        return None

    def to_json(self) -> str:
        return json.dumps(_code_document(self), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "CoupledCode":
        doc = json.loads(text)
        base = _base_from_document(doc)
        roles = tuple(ColumnRole(r) for r in doc["roles"])
        return cls(base, int(doc.get("L", 1)), roles, doc.get("family", "custom"), tuple(doc.get("params", ())))


def _code_document(code) -> dict:
    return {
        "rows": code.base.rows,
        "cols": code.base.cols,
        "entries": code.base.entries.ravel().tolist(),
        "roles": [r.value for r in code.column_roles],
        "L": code.L,
        "family": code.family,
        "params": list(code.params),
    }


def _base_from_document(doc: dict) -> BaseMatrix:
    entries = np.array(doc["entries"], dtype=np.int64)
    if entries.size != doc["rows"] * doc["cols"]:
        raise ParameterError("entry count does not match rows * cols")
    return BaseMatrix(entries.reshape(doc["rows"], doc["cols"]))


def couple(spreading: SpreadingSet, L: int) -> CoupledCode:
    """Stack L copies so that block (t + i, t) equals B_i."""
    if int(L) != L or L < 1:
        raise ParameterError(f"coupling number must be a positive integer, got {L}")
    L = int(L)
    mp, n_p = spreading.matrices[0].shape
    d = spreading.depth
    B = np.zeros((mp * (L + d), n_p * L), dtype=np.int64)
    for t in range(L):
        for i, Bi in enumerate(spreading.matrices):
            B[(t + i) * mp:(t + i + 1) * mp, t * n_p:(t + 1) * n_p] = Bi.entries
    roles = tuple(spreading.roles) * L
    return CoupledCode(BaseMatrix(B), L, roles, spreading.family, spreading.params)


def uncoupled(base: BaseMatrix, roles: Sequence[ColumnRole], family: str = "custom", params: tuple = ()) -> CoupledCode:
    """Wrap a plain base matrix as a single-copy code (no coupling)."""
    return CoupledCode(base, 1, tuple(roles), family, params)


def coupled_regular(l: int, r: int, L: int) -> CoupledCode:
    return couple(regular_spreading(l, r), L)


def coupled_mn(l: int, r: int, g: int, L: int) -> CoupledCode:
    return couple(mn_spreading(l, r, g), L)


def uncoupled_regular(l: int, r: int) -> CoupledCode:
    k = _regular_k(l, r)
    roles = (ColumnRole.INFORMATION,) + (ColumnRole.PARITY,) * (k - 1)
    return uncoupled(regular_base(l, r), roles, "regular-uncoupled", (l, r))
