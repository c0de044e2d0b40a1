from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from screlay.base_matrix import BaseMatrix, ColumnRole, ParameterError, design_rate_regular, mn_base
from screlay.coupling import (
    CoupledCode,
    SpreadingSet,
    couple,
    coupled_mn,
    coupled_regular,
    mn_spreading,
    regular_spreading,
)


def test_couple_single_matrix_is_block_diagonal():
    s = SpreadingSet((BaseMatrix([[1, 2]]),))
    code = couple(s, 3)
    expected = np.kron(np.eye(3, dtype=int), [[1, 2]])
    assert (code.base.entries == expected).all()


def test_couple_rejects_empty():
    with pytest.raises(ParameterError):
        SpreadingSet(())


def test_regular_coupled_expansion():
    code = coupled_regular(3, 6, 4)
    assert code.base.shape == (6, 8)
    assert code.base[:4, :4].tolist() == [[1, 1, 0, 0], [1, 1, 1, 1], [1, 1, 1, 1], [0, 0, 1, 1]]


def test_mn_coupled_expansion():
    code = coupled_mn(4, 2, 2, 3)
    assert code.base[:4, :6].tolist() == [
        [1, 1, 0, 0, 0, 0],
        [2, 1, 1, 0, 0, 0],
        [1, 0, 1, 1, 1, 0],
        [0, 0, 0, 2, 1, 1],
    ]


def test_mn_coupled_expansion_holds_for_long_chains():
    code = coupled_mn(4, 2, 2, 128)
    assert code.base.shape == (2 * 129, 3 * 128)
    assert code.base[:4, :6].tolist() == coupled_mn(4, 2, 2, 3).base[:4, :6].tolist()


def test_regular_spreading():
    s = regular_spreading(3, 6)
    assert [m.tolist() for m in s.matrices] == [[[1, 1]]] * 3
    assert s.base.tolist() == [[3, 3]]
    assert len(regular_spreading(5, 10).matrices) == 5


def test_mn_spreading_422():
    s = mn_spreading(4, 2, 2)
    B0, B1 = s.matrices
    assert B1.tolist() == [[1, 0, 1], [0, 0, 0]]
    assert B0.tolist() == [[1, 1, 0], [2, 1, 1]]
    assert s.base == mn_base(4, 2, 2)


def test_mn_spreading_623():
    # b_1 = [1, 0, 0, 1] in row 0, b_2 = [1, 0, 1, 1] in row 1
    B0, B1, B2 = mn_spreading(6, 2, 3).matrices
    assert B1.tolist() == [[1, 0, 0, 1], [0, 0, 0, 0], [0, 0, 0, 0]]
    assert B2.tolist() == [[0, 0, 0, 0], [1, 0, 1, 1], [0, 0, 0, 0]]
    assert B0.tolist() == [[1, 1, 1, 0], [1, 1, 0, 0], [2, 1, 1, 1]]
    assert (B0.entries + B1.entries + B2.entries == mn_base(6, 2, 3).entries).all()


def test_mn_spreading_rejects_bad_parameters():
    with pytest.raises(ParameterError):
        mn_spreading(4, 2, 3)


def test_roles():
    reg = coupled_regular(3, 6, 5)
    info = [j for j, r in enumerate(reg.column_roles) if r is ColumnRole.INFORMATION]
    assert info == [2 * t for t in range(5)]
    assert ColumnRole.PUNCTURED_INFORMATION not in reg.column_roles
    mn = coupled_mn(4, 2, 2, 5)
    punct = [j for j, r in enumerate(mn.column_roles) if r is ColumnRole.PUNCTURED_INFORMATION]
    assert punct == [3 * t for t in range(5)]
    assert mn.info_columns.tolist() == punct


@given(st.sampled_from([(3, 6), (4, 8), (5, 10), (3, 9), (2, 4)]), st.integers(1, 40))
def test_regular_shape_and_rate(lr, L):
    l, r = lr
    k = r // l
    code = coupled_regular(l, r, L)
    assert code.base.shape == (L + l - 1, k * L)
    rows, cols = code.base.shape
    assert 1 - Fraction(rows, cols) == design_rate_regular(l, r, L)


@pytest.mark.parametrize("code", [coupled_regular(3, 6, 6), coupled_regular(5, 10, 7), coupled_mn(4, 2, 2, 6),
                                  coupled_mn(6, 2, 3, 6)])
def test_column_degrees_preserved(code):
    B = code.base.entries
    if code.family == "regular":
        underlying = np.full(code.params[1] // code.params[0], code.params[0])
    else:
        underlying = mn_base(*code.params).entries.sum(axis=0)
    assert (B.sum(axis=0) == np.tile(underlying, code.L)).all()


@pytest.mark.parametrize("code, d", [(coupled_regular(3, 6, 10), 2), (coupled_regular(5, 10, 12), 4),
                                     (coupled_mn(4, 2, 2, 10), 1)])
def test_boundary_block_rows_are_lighter(code, d):
    s = regular_spreading(*code.params) if code.family == "regular" else mn_spreading(*code.params)
    mp = s.matrices[0].rows
    weights = code.base.entries.reshape(-1, mp, code.base.cols).sum(axis=(1, 2))
    interior = weights[d:-d]
    assert (interior == interior[0]).all()
    assert (weights[:d] < interior[0]).all() and (weights[-d:] < interior[0]).all()


def test_json_round_trip():
    code = coupled_mn(4, 2, 2, 4)
    back = CoupledCode.from_json(code.to_json())
    assert back == code
    assert back.design_rate() == code.design_rate()
