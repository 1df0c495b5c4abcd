import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from opca import library
from opca.backend import PAULI, Classical, Fermionic, Qubit
from opca.cayley import build_graph
from opca.group_engine import cyclic_presentation
from opca.io import (
    GlobalRule,
    InputError,
    dumps_report,
    load_rule,
    matrix_from_json,
    matrix_to_json,
    parse_operator,
    read_presentation,
    resolve,
    rule_from_dict,
    rule_to_dict,
    system_from_json,
    system_to_json,
)

Z8 = build_graph(cyclic_presentation(8))
cplx = st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False)


@given(hnp.arrays(complex, st.tuples(st.integers(1, 4), st.integers(1, 4)), elements=cplx))
def test_matrix_round_trip(M):
    assert np.array_equal(matrix_from_json(json.loads(json.dumps(matrix_to_json(M)))), M)


def test_real_matrices_stay_real():
    M = matrix_from_json([[1, 0], [0, 1]])
    assert M.dtype.kind == "f"
    with pytest.raises(InputError):
        matrix_from_json([[1, 0], [0]])


@pytest.mark.parametrize("system", [Qubit(), Classical(3), Fermionic(2)])
def test_system_round_trip(system):
    assert system_from_json(system_to_json(system)).describe() == system.describe()


@pytest.mark.parametrize("rule", [library.partial_swap_rule(), library.hadamard_walk_rule(),
                                  library.shift_rule(Classical(2)), library.tilted_cluster_rule()])
def test_rule_round_trip(rule):
    again = rule_from_dict(json.loads(json.dumps(rule_to_dict(rule))))
    assert again.offsets == rule.offsets
    assert np.allclose(again.block, rule.block)


def test_bundled_rule_files():
    assert np.allclose(load_rule(resolve("shift-qubit")).block, library.shift_rule().block)
    assert np.allclose(load_rule(resolve("partial-swap")).block, library.partial_swap_rule().block)
    xor = load_rule(resolve("xor"))
    assert isinstance(xor, GlobalRule)
    assert np.array_equal(xor.automaton(build_graph(cyclic_presentation(5))).V, library.xor_automaton(5).V)
    assert read_presentation(resolve("Z6xZ5")).model.finite


@pytest.mark.parametrize("text, message", [
    ('{"backend": "qubit"}', "offsets"),
    ('{"backend": "qutrit", "offsets": ["a"]}', "backend"),
    ('{"backend": "qubit", "offsets": ["a"], "block": [[1, 0], [0, 1]]}', "shape"),
    ('{"backend": "qubit",\n "offsets": ["a"], "block": }', ":2:"),
])
def test_bad_rule_files(tmp_path, text, message):
    p = tmp_path / "rule.json"
    p.write_text(text)
    with pytest.raises(InputError) as err:
        load_rule(str(p))
    assert message in str(err.value)
    assert str(p) in str(err.value)


def test_missing_file():
    with pytest.raises(InputError):
        load_rule("/nonexistent/rule.json")
    with pytest.raises(InputError):
        read_presentation("/nonexistent/group.json")


def test_operator_literals():
    F = parse_operator("Z@0*X@1", Z8, Qubit())
    assert F.region == ((0,), (1,))
    assert np.allclose(F.matrix, np.kron(PAULI["Z"], PAULI["X"]))
    assert parse_operator("flip@-1", Z8, Classical(2)).region == ((7,),)
    with pytest.raises(InputError):
        parse_operator("X0", Z8, Qubit())
    with pytest.raises(InputError):
        parse_operator("Q@0", Z8, Qubit())


def test_reports_are_deterministic_and_strict_json():
    obj = {"b": np.float64(np.inf), "a": [np.int64(3), 1 + 2j], "c": np.array([True, False])}
    text = dumps_report(obj, "norms", 7)
    assert text == dumps_report(dict(reversed(list(obj.items()))), "norms", 7)
    data = json.loads(text)
    assert data["b"] == "inf"
    assert data["a"] == [3, [1.0, 2.0]]
    assert data["schema_version"] and data["command"] == "norms" and data["seed"] == 7
    assert list(data) == sorted(data)
