import numpy as np
import pytest

from conftest import FINITE_BUILTINS, all_words
from tameslope import ExampleOne, ExplicitMarkovMap, GraphModel, golden_mean, interval_map, tent
from tameslope.families import blade_laps, build, parse_lap
from tameslope.graph import (
    FWD,
    REV,
    cylinder,
    mixing_check,
    refinement,
    transition_matrix,
    validate,
)
from tameslope.transition import ExplicitMatrix, FiniteMatrix, power_entry, truncation


def tiny(paths, vertices=("x", "y", "z"), arcs=(("a", "x", "y"), ("b", "y", "z"))):
    return ExplicitMarkovMap(GraphModel.from_triples(list(vertices), list(arcs)), paths)


def kinds(fmap):
    return {v.kind for v in validate(fmap).violations}


# -- validate ---------------------------------------------------------------------


def test_builtins_validate(finite_map):
    assert validate(finite_map).ok


def test_example_one_validates_at_depth_8():
    d = validate(ExampleOne(8))
    assert d.ok
    assert d.checked == len(ExampleOne(8).arc_ids) > 500


def test_path_continuity_violation():
    fmap = tiny({"a": [("a", FWD), ("b", FWD)], "b": [("b", FWD), ("a", FWD)]})
    assert "path continuity" in kinds(fmap)


def test_loop_arc_and_repeated_arc():
    fmap = tiny({"a": [("a", FWD)], "b": [("b", FWD)], "l": [("a", FWD)]},
                arcs=(("a", "x", "y"), ("b", "y", "z"), ("l", "x", "x")))
    assert "loop arc" in kinds(fmap)
    fmap = tiny({"a": [("a", FWD), ("a", REV)], "b": [("a", FWD)]})
    assert "repeated arc" in kinds(fmap)


def test_inconsistent_vertex_image():
    # a fixes y while b sends y to z
    fmap = tiny({"a": [("a", FWD)], "b": [("b", REV)]})
    assert "inconsistent vertex image" in kinds(fmap)


def test_unknown_arc_in_path():
    fmap = tiny({"a": [("q", FWD)], "b": [("a", FWD)]})
    assert "unknown arc" in kinds(fmap)


def test_violations_are_data_not_exceptions():
    fmap = tiny({"a": [("a", FWD), ("b", FWD)], "b": [("b", FWD), ("a", FWD)]})
    d = validate(fmap)
    assert not d.ok and all(str(v) for v in d.violations)


# -- transition matrix -------------------------------------------------------------


def test_documented_matrices():
    assert transition_matrix(tent(2)).to_array().tolist() == [[1, 1], [1, 1]]
    g = transition_matrix(golden_mean())
    assert set(g.successors("0")) == {"0", "1"}
    assert set(g.successors("1")) == {"0"}
    assert transition_matrix(tent(3)).to_array().tolist() == [[1] * 3] * 3


@pytest.mark.parametrize("name", ["tribonacci", "three-lap"])
def test_interval_maps_reproduce_input_matrix(name):
    rows = {"tribonacci": [[0, 1, 0], [0, 0, 1], [1, 1, 1]],
            "three-lap": [[1, 1, 0], [0, 0, 1], [1, 1, 1]]}[name]
    assert transition_matrix(FINITE_BUILTINS[name]()).to_array().tolist() == rows


def test_interval_map_rejects_noncontiguous_rows():
    with pytest.raises(ValueError):
        interval_map([[1, 0, 1], [1, 1, 1], [1, 1, 1]])


def test_example_one_third_lap_maps_over_next_blade():
    M = transition_matrix(ExampleOne(6))
    for n in range(6):
        assert set(M.successors(f"A{n}.3")) == set(blade_laps("A", n + 1))


def test_example_one_rows_have_no_repeated_targets():
    fmap = ExampleOne(5)
    for a in fmap.arc_ids:
        names = [b for b, _ in fmap.image_path(a)]
        assert len(names) == len(set(names))


def test_example_one_predecessors_invert_successors():
    fmap = ExampleOne(4)
    M = fmap.matrix()
    for a in fmap.arc_ids:
        for b in M.successors(a):
            assert a in M.predecessors(b)
        for p in M.predecessors(a):
            assert a in M.successors(p)


def test_lap_labels_parse():
    assert parse_lap("A3.2") == ("A", 3, 2)
    assert parse_lap("B")[0] == "B"
    assert parse_lap("nonsense") is None


def test_build_rejects_unknown_family():
    with pytest.raises(ValueError):
        build("nope")


# -- refinement -------------------------------------------------------------------


def test_refinement_counts():
    assert len(refinement(tent(2), 1).words) == 4
    assert len(refinement(golden_mean(), 2).words) == 5
    assert [w.word for w in refinement(golden_mean(), 0).words] == [(a,) for a in golden_mean().arc_ids]


def test_refinement_budget_flag():
    r = refinement(tent(3), 4, budget=10)
    assert not r.complete and len(r.words) == 10


def test_refinement_count_equals_matrix_power_sum(finite_map):
    M = finite_map.matrix()
    labels = finite_map.arc_ids
    for n in range(7):
        total = sum(power_entry(M, i, j, n) for i in labels for j in labels)
        assert len(refinement(finite_map, n).words) == total


def test_refinement_matches_product_filter(finite_map):
    M = finite_map.matrix()
    for n in range(5):
        got = {w.word for w in refinement(finite_map, n).words}
        assert got == set(all_words(finite_map.arc_ids, M.successors, n))


def test_refinement_is_nested(finite_map):
    for n in range(6):
        short = {w.word for w in refinement(finite_map, n).words}
        long = {w.word[:-1] for w in refinement(finite_map, n + 1).words}
        assert long == short


def test_refinement_on_rule_matrix_needs_start():
    M = ExampleOne(3).matrix()
    with pytest.raises(ValueError):
        refinement(M, 2)
    words = refinement(M, 3, start=["B"]).words
    assert len(words) == sum(1 for _ in _walks(M, ("B",), 3))
    assert {w.word for w in words} == set(_walks(M, ("B",), 3))
    assert all(cylinder(M, w.word).admissible for w in words)


def _walks(M, word, n):
    if len(word) == n + 1:
        yield word
        return
    for b in M.successors(word[-1]):
        yield from _walks(M, word + (b,), n)


def test_cylinder_admissibility_flag():
    M = golden_mean().matrix()
    assert cylinder(M, ["0", "1", "0"]).admissible
    assert not cylinder(M, ["1", "1"]).admissible


# -- mixing --------------------------------------------------------------------------


def test_mixing_examples():
    c = mixing_check(tent(2), 2)
    assert c.irreducible and c.aperiodic and c.leo_witness == 1
    assert mixing_check(golden_mean(), 4).leo_witness == 2
    p = mixing_check(FiniteMatrix.from_dense([[0, 1], [1, 0]]), 10)
    assert p.irreducible and p.period == 2 and p.leo_witness is None


def test_leo_witness_agrees_with_numpy_powers(finite_map):
    A = finite_map.matrix().to_array()
    c = mixing_check(finite_map, 20)
    P, expected = A.copy(), None
    for k in range(1, 21):
        if (P > 0).all():
            expected = k
            break
        P = P @ A
    assert c.leo_witness == expected


def test_mixing_check_on_rule_truncation():
    M = ExampleOne(0).matrix()
    c = mixing_check(M, 3, depth=16, base="B")
    assert c.irreducible and c.pruned >= 1  # the dangling third lap of the last blade
    with pytest.raises(ValueError):
        mixing_check(M, 3)
    with pytest.raises(ValueError):
        mixing_check(tent(2), 0)


def test_reducible_matrix_is_reported():
    c = mixing_check(ExplicitMatrix.from_array([[1, 1, 0], [1, 0, 0], [0, 0, 1]]), 5)
    assert not c.irreducible
    assert c.summary == "not irreducible on truncation"


def test_truncated_example_one_period():
    # loop lengths n + 2 + 2^n: 3, 5, 8, ... have gcd 1
    A = truncation(ExampleOne(0).matrix(), 8, "B")
    c = mixing_check(A, 2)
    assert c.period == 1
    assert np.gcd.reduce([n + 2 + 2 ** n for n in range(4)]) == 1
