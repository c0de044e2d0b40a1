import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from screlay.base_matrix import BaseMatrix, regular_base
from screlay.coupling import coupled_mn, coupled_regular, uncoupled_regular
from screlay.de import (
    BracketError,
    DEConfig,
    RegionResult,
    bisect_threshold,
    de_step,
    initial_state,
    run_de,
    sd_eps,
    standalone_eps,
    sweep_region,
)
from screlay.presets import preset_graph
from screlay.relay import ChannelParams, arja_joint, build_joint, eps_vector, standalone

U36 = build_joint(uncoupled_regular(3, 6), uncoupled_regular(3, 6))


def scalar_de(eps, l, r, x):
    """Textbook (l, r)-regular BEC recursion, one iteration."""
    return eps * (1 - (1 - x) ** (r - 1)) ** (l - 1)


def test_single_section_step():
    s = initial_state(BaseMatrix([[2]]), [0.5])
    s = de_step(BaseMatrix([[2]]), [0.5], s)
    assert s.y.tolist() == [0.5]
    assert s.x.tolist() == [0.25]
    assert s.iteration == 1


@pytest.mark.parametrize("l, r", [(3, 6), (5, 10)])
@pytest.mark.parametrize("eps", [0.3, 0.42, 0.45, 0.499])
def test_matches_scalar_recursion(l, r, eps):
    B = regular_base(l, r)
    state = initial_state(B, [eps] * B.cols)
    x = eps
    for _ in range(300):
        state = de_step(B, [eps] * B.cols, state)
        x = scalar_de(eps, l, r, x)
        assert np.abs(state.x - x).max() <= 1e-12


def test_zero_channel_resolves_in_one_step():
    c = coupled_regular(3, 6, 6)
    s = de_step(c.base, np.zeros(c.base.cols), initial_state(c.base, np.zeros(c.base.cols)))
    assert (s.x == 0).all()


def test_state_dict_covers_nonzero_sections():
    B = BaseMatrix([[1, 0, 2], [0, 3, 1]])
    d = initial_state(B, [0.1, 0.2, 0.3]).as_dict()
    assert sorted(d["x"]) == [(0, 0), (0, 2), (1, 1), (1, 2)]
    assert d["x"][(1, 1)] == 0.2


def test_run_de_36():
    g = standalone(uncoupled_regular(3, 6))
    assert run_de(g, [0.42, 0.42]).achievable
    res = run_de(g, [0.44, 0.44])
    assert not res.achievable and res.reason == "stalled"


def test_all_erased_stays_erased():
    c = coupled_regular(3, 6, 5)
    res = run_de(c.base, np.ones(c.base.cols))
    assert not res.achievable
    assert (res.state.x == 1).all()


def test_column_erasure_reported():
    res = run_de(U36, sd_eps(U36, 1.0)(0.3))
    assert res.achievable
    assert res.column_erasure[:2].max() < 1e-10
    # relay half is never observed and cannot be rebuilt by BP
    assert res.column_erasure[3] == pytest.approx(1.0)


def _trajectory_graphs():
    return [
        (U36, ChannelParams(0.43, 0.6)),
        (arja_joint(), ChannelParams(0.5, 0.7)),
        (build_joint(coupled_regular(3, 6, 8), coupled_regular(3, 6, 8)), ChannelParams(0.6, 0.45)),
        (build_joint(coupled_mn(4, 2, 2, 8), coupled_mn(4, 2, 2, 8)), ChannelParams(0.55, 0.5)),
    ]


@pytest.mark.parametrize("graph, params", _trajectory_graphs())
def test_monotone_and_bounded_trajectory(graph, params):
    eps = eps_vector(graph, params)
    state = initial_state(graph.base, eps)
    for _ in range(400):
        nxt = de_step(graph.base, eps, state)
        assert (nxt.x <= state.x).all()
        assert ((0 <= nxt.x) & (nxt.x <= 1) & (0 <= nxt.y) & (nxt.y <= 1)).all()
        state = nxt


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_achievability_monotone_in_channel(a, b, c, d):
    g = build_joint(coupled_regular(3, 6, 6), coupled_regular(3, 6, 6))
    lo = ChannelParams(min(a, b), min(c, d))
    hi = ChannelParams(max(a, b), max(c, d))
    if run_de(g, eps_vector(g, hi)).achievable:
        assert run_de(g, eps_vector(g, lo)).achievable


def test_bisect_uncoupled_36():
    res = bisect_threshold(standalone(uncoupled_regular(3, 6)), standalone_eps(standalone(uncoupled_regular(3, 6))))
    assert res.threshold == pytest.approx(0.4294, abs=1e-4)
    assert res.width <= 1e-6
    lo, hi = res.bracket
    assert lo == res.threshold and hi > lo


def test_bisect_joint_corner_36():
    res = bisect_threshold(U36, sd_eps(U36, 1.0))
    assert res.threshold == pytest.approx(0.4294, abs=1e-4)


def test_bisect_arja_corner():
    g = arja_joint()
    res = bisect_threshold(g, sd_eps(g, 1.0))
    assert res.threshold == pytest.approx(0.4387, abs=1e-4)


def test_bracket_errors():
    g = standalone(uncoupled_regular(3, 6))
    with pytest.raises(BracketError):
        bisect_threshold(g, standalone_eps(g), lo=0.45, hi=1.0)
    with pytest.raises(BracketError):
        bisect_threshold(g, standalone_eps(g), lo=0.0, hi=0.4)


def test_config_validation():
    with pytest.raises(ValueError):
        DEConfig(success_tol=1e-16, stall_tol=1e-15)


def test_sweep_corner_and_monotone():
    grid = [0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
    region = sweep_region(U36, grid, bisect_tol=1e-5)
    assert region.eps_rd.tolist() == grid
    assert region.points[-1].eps_sd_max == pytest.approx(0.4294, abs=1e-3)
    assert (np.diff(region.eps_sd_max) <= 1e-9).all()


@pytest.mark.parametrize("name, L", [("reg-3-6", None), ("arja-se", None), ("reg-3-6", 8), ("mn-4-2-2", 8),
                                     ("reg-5-10", 8)])
def test_sweep_at_perfect_relay_link(name, L):
    g = preset_graph(name, L)
    full = run_de(g, eps_vector(g, ChannelParams(1.0, 0.0))).achievable
    point = sweep_region(g, [0.0], bisect_tol=1e-4).points[0]
    if full:
        assert point.eps_sd_max == 1.0
    else:
        assert point.eps_sd_max < 1.0


def test_sweep_parallel_matches_serial():
    grid = [0.6, 0.8, 1.0]
    a = sweep_region(U36, grid, bisect_tol=1e-4)
    b = sweep_region(U36, grid, bisect_tol=1e-4, workers=3)
    assert a.eps_sd_max.tolist() == b.eps_sd_max.tolist()


def test_region_csv():
    region = sweep_region(U36, [1.0], bisect_tol=1e-4)
    lines = region.to_csv().splitlines()
    assert lines[0] == "eps_rd,eps_sd_max,iters,de_runs"
    rd, sd, iters, runs = lines[1].split(",")
    assert rd == "1" and len(sd.replace("0.", "")) <= 9 and int(runs) > 2
    assert isinstance(region, RegionResult)
