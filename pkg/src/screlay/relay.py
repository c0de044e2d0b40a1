"""Joint destination-side protograph for decode-and-forward relaying.

The destination sees the source codeword over the S-D link and the relay
codeword over the R-D link.  Both Tanner graphs are decoded together after
tying each source information node to the matching relay information node
through a degree-2 check.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .base_matrix import (
    ARJA_RELAY_COLS,
    ARJA_SENDER_COLS,
    BaseMatrix,
    ColumnRole,
    ParameterError,
    arja_split_extended_base,
)
from .coupling import CoupledCode, _base_from_document


class ChannelLabel(enum.Enum):
    SD = "SD"
    RD = "RD"
    PUNCTURED = "P"


@dataclass(frozen=True)
class ChannelParams:
    eps_sd: float = 1.0
    eps_rd: float = 1.0
    eps_sr: float = 0.0

    def __post_init__(self):
        for name in ("eps_sd", "eps_rd", "eps_sr"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ParameterError(f"{name} = {v} is not a probability")


@dataclass(frozen=True)
class JointRelayGraph:
    """Joint base matrix with a channel label per column.

    ``sender_cols`` are the columns of the source code; the destination
    has succeeded once every edge touching them is resolved.
    """

    base: BaseMatrix
    labels: tuple[ChannelLabel, ...]
    sender_cols: range
    relay_cols: range
    connector_rows: range
    sender_rows: range = range(0)
    relay_rows: range = range(0)

    @property
    def target_columns(self) -> np.ndarray:
        return np.arange(self.sender_cols.start, self.sender_cols.stop)

    def to_json(self) -> str:
        doc = {
            "rows": self.base.rows,
            "cols": self.base.cols,
            "entries": self.base.entries.ravel().tolist(),
            "labels": [lab.value for lab in self.labels],
        }
        for name in ("sender_cols", "relay_cols", "connector_rows", "sender_rows", "relay_rows"):
            rng = getattr(self, name)
            doc[name] = [rng.start, rng.stop]
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "JointRelayGraph":
        doc = json.loads(text)
        base = _base_from_document(doc)
        labels = tuple(ChannelLabel(v) for v in doc["labels"])
        ranges = {name: range(*doc[name]) for name in ("sender_cols", "relay_cols", "connector_rows")}
        for name in ("sender_rows", "relay_rows"):
            if name in doc:
                ranges[name] = range(*doc[name])
        return cls(base, labels, **ranges)


def _label(role: ColumnRole, transmitted_by: ChannelLabel) -> ChannelLabel:
    if role is ColumnRole.PUNCTURED_INFORMATION:
        return ChannelLabel.PUNCTURED
    return transmitted_by


def build_joint(sender: CoupledCode, relay: CoupledCode, literal: bool = False) -> JointRelayGraph:
    """Stack the source and relay codes and add one degree-2 connector
    check per matched pair of information columns.

    With ``literal=True`` the two codes share their check rows
    (``[[B_S, B_R], [C_S, C_R]]``) instead of being block-diagonal.  This
    reading is kept only as a diagnostic.
    """
    s_info, r_info = sender.info_columns, relay.info_columns
    if len(s_info) != len(r_info):
        raise ParameterError(
            f"sender has {len(s_info)} information columns, relay has {len(r_info)}"
        )
    Bs, Br = sender.base.entries, relay.base.entries
    ns, nr = Bs.shape[1], Br.shape[1]
    if literal:
        if Bs.shape[0] != Br.shape[0]:
            raise ParameterError("shared-row construction needs equal row counts")
        top = np.hstack([Bs, Br])
        sender_rows = relay_rows = range(Bs.shape[0])
    else:
        top = np.zeros((Bs.shape[0] + Br.shape[0], ns + nr), dtype=np.int64)
        top[:Bs.shape[0], :ns] = Bs
        top[Bs.shape[0]:, ns:] = Br
        sender_rows = range(Bs.shape[0])
        relay_rows = range(Bs.shape[0], Bs.shape[0] + Br.shape[0])
    conn = np.zeros((len(s_info), ns + nr), dtype=np.int64)
    conn[np.arange(len(s_info)), s_info] = 1
    conn[np.arange(len(r_info)), ns + r_info] = 1
    B = np.vstack([top, conn])
    labels = tuple(_label(role, ChannelLabel.SD) for role in sender.column_roles)
    labels += tuple(_label(role, ChannelLabel.RD) for role in relay.column_roles)
    return JointRelayGraph(
        BaseMatrix(B),
        labels,
        sender_cols=range(0, ns),
        relay_cols=range(ns, ns + nr),
        connector_rows=range(top.shape[0], B.shape[0]),
        sender_rows=sender_rows,
        relay_rows=relay_rows,
    )


def arja_joint() -> JointRelayGraph:
    """Split-extended ARJA protograph: both codes already live in one matrix."""
    base = arja_split_extended_base()
    labels = (ChannelLabel.PUNCTURED,) + (ChannelLabel.SD,) * 4 + (ChannelLabel.RD,) * 4
    # The source code alone is the ARJA protograph; its rows are the checks
    # left after the relay nodes (split-off degree-2 nodes) are removed.
    return JointRelayGraph(
        base,
        labels,
        sender_cols=ARJA_SENDER_COLS,
        relay_cols=ARJA_RELAY_COLS,
        connector_rows=range(0),
        sender_rows=range(base.rows),
        relay_rows=range(0),
    )


def standalone(code: CoupledCode) -> JointRelayGraph:
    """Single code seen over one channel (labelled SD)."""
    labels = tuple(_label(role, ChannelLabel.SD) for role in code.column_roles)
    n = code.base.cols
    return JointRelayGraph(
        code.base,
        labels,
        sender_cols=range(n),
        relay_cols=range(n, n),
        connector_rows=range(0),
        sender_rows=range(code.base.rows),
    )


def eps_vector(graph: JointRelayGraph, params: ChannelParams) -> np.ndarray:
    """Per-column erasure probability of the channel each column is sent over."""
    lookup = {
        ChannelLabel.SD: params.eps_sd,
        ChannelLabel.RD: params.eps_rd,
        ChannelLabel.PUNCTURED: 1.0,
    }
    return np.array([lookup[lab] for lab in graph.labels], dtype=np.float64)
