"""Named code pairs used throughout the command line and the tests."""

from __future__ import annotations

import json
import math
from pathlib import Path

from .base_matrix import ColumnRole, ParameterError, mn_base
from .coupling import CoupledCode, coupled_mn, coupled_regular, uncoupled, uncoupled_regular
from .relay import JointRelayGraph, arja_joint, build_joint, standalone

PRESETS = {
    "reg-3-6": ("regular", (3, 6)),
    "reg-5-10": ("regular", (5, 10)),
    "mn-4-2-2": ("mn", (4, 2, 2)),
    "arja-se": ("arja", ()),
}


def preset_code(name: str, L: int | None = None) -> CoupledCode:
    """Code used at both S and R; uncoupled when ``L`` is None."""
    if name not in PRESETS:
        raise ParameterError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    family, params = PRESETS[name]
    if family == "arja":
        raise ParameterError("arja-se is only available as a joint graph")
    if family == "regular":
        return uncoupled_regular(*params) if L is None else coupled_regular(*params, L)
    if L is None:
        roles = (ColumnRole.PUNCTURED_INFORMATION,) + (ColumnRole.PARITY,) * params[2]
        return uncoupled(mn_base(*params), roles, "mn-uncoupled", params)
    return coupled_mn(*params, L)


def preset_graph(name: str, L: int | None = None, literal: bool = False) -> JointRelayGraph:
    if name == "arja-se":
        return arja_joint()
    code = preset_code(name, L)
    return build_joint(code, code, literal=literal)


def preset_rate(name: str, L: int | None = None) -> float:
    """Source code rate used for the limit line."""
    if name == "arja-se":
        return 0.5
    code = preset_code(name, L)
    rate = code.design_rate()
    if rate is None:
        family, params = PRESETS[name]
        return 1.0 / params[2] if family == "mn" else math.nan
    return float(rate)


def load_graph(path: str | Path) -> tuple[JointRelayGraph, float | None]:
    """Read a custom code document.

    A document with ``labels`` is a joint graph; otherwise it is a single
    code that is used at both S and R.
    """
    text = Path(path).read_text()
    doc = json.loads(text)
    if "labels" in doc:
        return JointRelayGraph.from_json(text), doc.get("rate")
    code = CoupledCode.from_json(text)
    rate = code.design_rate()
    return build_joint(code, code), (float(rate) if rate is not None else doc.get("rate"))


def standalone_graph(name: str, L: int | None = None) -> JointRelayGraph:
    if name == "arja-se":
        g = arja_joint()
        # relay nodes unseen: the split-off degree-2 nodes stay erased
        return g
    return standalone(preset_code(name, L))
