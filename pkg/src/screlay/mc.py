"""Finite-length Monte Carlo check of the decode-and-forward pipeline.

The all-zero codeword is sent, so only erasure positions matter.  The
relay peels the source code from its own observation; if it succeeds the
destination peels the lifted joint graph from the S-D and R-D
observations.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.stats import binomtest

from .base_matrix import LiftedCode, lift
from .relay import ChannelLabel, ChannelParams, JointRelayGraph

_LABEL_CODE = {ChannelLabel.SD: 0, ChannelLabel.RD: 1, ChannelLabel.PUNCTURED: 2}


@dataclass(frozen=True, eq=False)
class LiftedJoint:
    """Lifted joint graph with per-variable channel labels."""

    graph: JointRelayGraph
    code: LiftedCode
    labels: np.ndarray  # 0 = SD, 1 = RD, 2 = punctured
    sender: np.ndarray  # bool mask over variables
    sender_checks: sp.csr_matrix

    @property
    def H(self) -> sp.csr_matrix:
        return self.code.parity_check


def lift_joint(graph: JointRelayGraph, q: int, seed=None) -> LiftedJoint:
    code = lift(graph.base, q, seed)
    labels = np.repeat([_LABEL_CODE[lab] for lab in graph.labels], q).astype(np.int8)
    cols = np.arange(graph.base.cols)
    sender = np.repeat(np.isin(cols, graph.target_columns), q)
    rows = np.concatenate([np.arange(r * q, (r + 1) * q) for r in graph.sender_rows] or [np.zeros(0, int)])
    return LiftedJoint(graph, code, labels, sender, code.parity_check[rows])


@dataclass
class ErasurePattern:
    erased: np.ndarray
    params: ChannelParams
    seed: object = None


def _probabilities(lifted, params: ChannelParams, stage: str) -> np.ndarray:
    if isinstance(lifted, LiftedJoint):
        if stage == "relay":
            # the relay observes only the source codeword
            p = np.where(lifted.sender, params.eps_sr, 1.0)
        else:
            p = np.choose(lifted.labels, [params.eps_sd, params.eps_rd, 1.0]).astype(float)
        p[lifted.labels == 2] = 1.0
        return p
    roles = np.array([r.value for r in lifted.column_roles]) if lifted.column_roles else None
    p = np.full(lifted.n, params.eps_sr if stage == "relay" else params.eps_sd)
    if roles is not None:
        punct = np.repeat(roles == "punctured_information", lifted.lifting_factor)
        p[punct] = 1.0
    return p


def sample_erasures(lifted, params: ChannelParams, seed=None, stage: str = "destination") -> ErasurePattern:
    """Erase each variable independently with the probability of the link it
    is sent over; punctured variables are always erased.

    ``stage="relay"`` samples what the relay sees: source variables over
    the S-R link and everything else erased.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    p = _probabilities(lifted, params, stage)
    erased = rng.random(p.shape) < p
    erased |= p >= 1.0
    return ErasurePattern(erased, params, seed)


def peel(H, erased, schedule: str = "parallel", rng=None):
    """Iteratively recover erased variables from checks with exactly one
    erased neighbour (BP on the BEC, all-zero codeword).

    ``schedule="parallel"`` resolves every such check in one round;
    ``"serial"`` resolves one randomly chosen check at a time and counts
    each resolution as a round.  Both end in the same erasure set.

    ``erased`` may also be a 2-D batch with one pattern per row (parallel
    schedule only); rounds are then counted per pattern.

    Returns the remaining erasure flags and the number of rounds.
    """
    H = sp.csr_matrix(H, dtype=np.int64)
    erased = np.array(erased, dtype=bool, copy=True)
    if schedule == "serial":
        if erased.ndim != 1:
            raise ValueError("serial schedule takes a single pattern")
        return _peel_serial(H, erased, rng)
    if schedule != "parallel":
        raise ValueError(f"unknown schedule {schedule!r}")
    batch = erased.ndim == 2
    E = erased.T if batch else erased[:, None]  # variables x patterns, a view
    idx = np.arange(H.shape[1], dtype=np.int64)[:, None]
    rounds = np.zeros(E.shape[1], dtype=np.int64)
    live = np.arange(E.shape[1])
    while live.size:
        e = E[:, live].astype(np.int64)
        single = (H @ e) == 1
        active = single.any(axis=0)
        # with one erased neighbour the index-weighted sum is that neighbour
        chk, pat = np.nonzero(single)
        var = (H @ (idx * e))[chk, pat]
        E[var, live[pat]] = False
        live = live[active]
        rounds[live] += 1
    return erased, (rounds if batch else int(rounds[0]))


def _peel_serial(H, erased, rng):
    rng = np.random.default_rng(rng)
    Hc = H.tocsc()
    counts = H @ erased.astype(np.int64)
    rounds = 0
    while True:
        ready = np.flatnonzero(counts == 1)
        if ready.size == 0:
            return erased, rounds
        c = rng.choice(ready)
        nbrs = H.indices[H.indptr[c]:H.indptr[c + 1]]
        v = nbrs[erased[nbrs]][0]
        erased[v] = False
        counts[Hc.indices[Hc.indptr[v]:Hc.indptr[v + 1]]] -= 1
        rounds += 1


@dataclass
class TrialResult:
    relay_decoded: bool
    dest_decoded: bool
    residual_erasures: int
    peeling_rounds: int


def run_trial(lifted: LiftedJoint, params: ChannelParams, rng: np.random.Generator) -> TrialResult:
    at_relay = sample_erasures(lifted, params, rng, stage="relay").erased
    left, rounds = peel(lifted.sender_checks, at_relay)
    if left[lifted.sender].any():
        # relay failure is charged to the destination as well
        return TrialResult(False, False, int(left[lifted.sender].sum()), rounds)
    at_dest = sample_erasures(lifted, params, rng).erased
    left, rounds = peel(lifted.H, at_dest)
    residual = int(left[lifted.sender].sum())
    return TrialResult(True, residual == 0, residual, rounds)


@dataclass
class PipelineStats:
    params: ChannelParams
    trials: int = 0
    relay_fail: int = 0
    dest_fail: int = 0
    total_residual: int = 0
    seed: object = None
    results: list = field(default_factory=list, repr=False)

    @property
    def avg_residual(self) -> float:
        return self.total_residual / self.trials if self.trials else float("nan")

    @property
    def dest_fail_rate(self) -> float:
        return self.dest_fail / self.trials if self.trials else float("nan")

    @property
    def relay_fail_rate(self) -> float:
        return self.relay_fail / self.trials if self.trials else float("nan")

    def confidence_interval(self, failures: int, level: float = 0.95) -> tuple[float, float]:
        """Clopper-Pearson interval for a failure count."""
        if not self.trials:
            return (0.0, 1.0)
        ci = binomtest(failures, self.trials).proportion_ci(level, method="exact")
        return (ci.low, ci.high)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# seed={self.seed}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eps_sd", "eps_rd", "eps_sr", "trials", "relay_fail", "dest_fail", "avg_residual"])
        if self.trials:
            p = self.params
            w.writerow([f"{p.eps_sd:.9g}", f"{p.eps_rd:.9g}", f"{p.eps_sr:.9g}", self.trials,
                        self.relay_fail, self.dest_fail, f"{self.avg_residual:.9g}"])
        return buf.getvalue()


def run_pipeline(graph: JointRelayGraph, params: ChannelParams, q: int = 512, trials: int = 100,
                 seed: int = 0, lifted: LiftedJoint | None = None) -> PipelineStats:
    """Monte Carlo estimate of relay and destination block-failure rates.

    The joint graph is lifted once from ``seed``; trial ``i`` draws its
    erasures from the stream ``(seed, i)``.
    """
    stats = PipelineStats(params, seed=seed)
    if trials <= 0:
        return stats
    if lifted is None:
        lifted = lift_joint(graph, q, seed)
    for i in range(trials):
        res = run_trial(lifted, params, np.random.default_rng([seed, i]))
        stats.results.append(res)
        stats.trials += 1
        stats.relay_fail += not res.relay_decoded
        stats.dest_fail += not res.dest_decoded
        stats.total_residual += res.residual_erasures
    return stats
