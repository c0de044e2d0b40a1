"""Rate limits of the erasure relay channel without interference at D."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .relay import ChannelParams


@dataclass(frozen=True)
class RelayLimit:
    rate: float
    beta: float


def relay_limit(params: ChannelParams) -> RelayLimit:
    """Largest rate allowed by the cut-set style bound, with beta chosen
    self-consistently: beta = 1 if R < 1 - eps_sr, else beta = eps_sr."""
    sd, rd, sr = params.eps_sd, params.eps_rd, params.eps_sr
    broadcast = 1.0 - sd * sr
    # beta = 1 branch is only admissible strictly below 1 - eps_sr
    df_rate = min(broadcast, (1.0 - sd) + (1.0 - rd), 1.0 - sr)
    other = min(broadcast, (1.0 - sd) + sr * (1.0 - rd))
    if other >= 1.0 - sr and other >= df_rate:
        return RelayLimit(other, sr)
    return RelayLimit(df_rate, 1.0)


def max_rate(params: ChannelParams, decode_forward: bool = True) -> float:
    """Maximal source rate.

    In decode-and-forward operation (the default) the relay must decode,
    which gives min{1 - eps_sr, (1 - eps_sd) + (1 - eps_rd)}.  With
    ``decode_forward=False`` the general two-case bound of
    :func:`relay_limit` is returned.
    """
    if decode_forward:
        return min(1.0 - params.eps_sr, (1.0 - params.eps_sd) + (1.0 - params.eps_rd))
    return relay_limit(params).rate


def limit_boundary(R: float, eps_rd):
    """Largest eps_sd with R <= (1 - eps_sd) + (1 - eps_rd), capped at 1."""
    return np.minimum(1.0, 2.0 - R - np.asarray(eps_rd, dtype=float))[()]


@dataclass
class Gap:
    eps_rd: np.ndarray
    gaps: np.ndarray

    @property
    def max(self) -> float:
        return float(self.gaps.max()) if self.gaps.size else 0.0


def region_gap(region, R: float) -> Gap:
    """Distance from the computed boundary up to the limit line, at the
    points where the limit lies below 1 (the slope region)."""
    rd = np.array([p.eps_rd for p in region.points], dtype=float)
    sd = np.array([p.eps_sd_max for p in region.points], dtype=float)
    limit = limit_boundary(R, rd)
    keep = np.atleast_1d(limit) < 1.0
    return Gap(rd[keep], (np.atleast_1d(limit) - sd)[keep])


def limit_csv(R: float, grid: Sequence[float]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["eps_rd", "eps_sd_limit"])
    for v in grid:
        w.writerow([f"{v:.9g}", f"{float(limit_boundary(R, v)):.9g}"])
    return buf.getvalue()
