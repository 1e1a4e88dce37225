import random
from fractions import Fraction

import pytest

from conftest import FINITE_BUILTINS, all_words, realization_oracle
from tameslope import (
    ExampleOne,
    PointCoord,
    SubEigenvector,
    build_constant_slope_model,
    evaluate_model,
    golden_mean,
    perron_vector,
    tent,
)
from tameslope.exact import AlgebraicValue
from tameslope.graph import ExplicitMarkovMap, FWD, GraphModel
from tameslope.symbolic import (
    NotAdmissibleError,
    UnsupportedInputError,
    arc_measure_n,
    delta,
    delta_identities_check,
    in_cylinder,
    itinerary,
    psi_cylinder,
    rho_distance,
    words_at_level,
)


def exact_model(fmap):
    return build_constant_slope_model(fmap, perron_vector(fmap, exact=True))


def float_model(fmap):
    return build_constant_slope_model(fmap, perron_vector(fmap), numeric="float")


def tent_vector():
    return SubEigenvector(Fraction(2), {"0": Fraction(1, 2), "1": Fraction(1, 2)}, tent(2).matrix())


# -- delta -----------------------------------------------------------------------


def test_delta_examples():
    v = tent_vector()
    assert delta(["0"], v) == Fraction(1, 2)
    assert delta(["0", "1"], v) == Fraction(1, 4)
    with pytest.raises(NotAdmissibleError):
        delta(["1", "1"], perron_vector(golden_mean(), exact=True))


def test_delta_matches_direct_product(finite_map):
    v = perron_vector(finite_map, exact=True)
    M = finite_map.matrix()
    for w in all_words(finite_map.arc_ids, M.successors, 4):
        expected = v[w[-1]]
        for a in w[:-1]:
            expected = expected / v.lam
        assert delta(w, v) == expected


@pytest.mark.parametrize("n", [0, 1, 2, 5, 10, 20, 30])
def test_example_one_third_lap_delta(n):
    v = SubEigenvector(2, ExampleOne(0).eigenvector(), ExampleOne(0).matrix())
    d = delta(ExampleOne.third_lap_word(n), v)
    assert d == 1 + Fraction(1, 2 ** (n + 1))
    assert d > 1


# -- identities -------------------------------------------------------------------


def test_identities_hold_exactly_on_words_up_to_length_8(finite_map):
    v = perron_vector(finite_map, exact=True)
    M = finite_map.matrix()
    for n in range(8):
        for w in all_words(finite_map.arc_ids, M.successors, n):
            c = delta_identities_check(v, w)
            assert c.refinement and c.shift, w


def test_identities_on_example_one_words():
    fmap = ExampleOne(3)
    v = SubEigenvector(2, fmap.eigenvector(), fmap.matrix())
    starts = ["B", "C1", "A0.3", "A1.1", "A2.3", "C4.2", "C7.1"]
    for n in range(8):
        for w in words_at_level(v, n, starts):
            c = delta_identities_check(v, w)
            assert c.ok, w


def test_perturbed_vector_fails_refinement():
    fmap = golden_mean()
    v = perron_vector(fmap, exact=True)
    bumped = dict(v.entries)
    bumped["1"] = bumped["1"] + Fraction(1, 1000)
    w = SubEigenvector(v.lam, bumped, fmap.matrix())
    assert not delta_identities_check(w, ["0"]).refinement
    assert not delta_identities_check(w, ["1", "0"]).refinement


def test_float_identities_to_tolerance():
    v = perron_vector(golden_mean())
    for w in all_words(["0", "1"], golden_mean().matrix().successors, 6):
        c = delta_identities_check(v, w, tol=1e-12)
        assert c.ok and c.refinement_gap < 1e-12


# -- arc measures -------------------------------------------------------------------


def test_normalization_by_enumeration(finite_map):
    model = exact_model(finite_map)
    for n in range(11):
        total = sum(words_at_level(model, n, finite_map.arc_ids).values())
        assert total == 1, (finite_map.name, n)


def test_normalization_through_arc_measure(finite_map):
    model = exact_model(finite_map)
    for n in range(11):
        assert arc_measure_n(finite_map, model, None, n) == 1


def test_arc_measure_examples():
    fmap = tent(2)
    v = tent_vector()
    assert arc_measure_n(fmap, v, "0", 2) == Fraction(1, 2)
    assert len([w for w in words_at_level(v, 2, ["0"])]) == 4
    assert all(d == Fraction(1, 8) for d in words_at_level(v, 2, ["0"]).values())
    assert arc_measure_n(fmap, v, [["0", "1", "1"]], 2) == delta(["0", "1", "1"], v)


def test_arc_measure_nondecreasing_and_exact_for_eigenvectors():
    fmap = golden_mean()
    v = perron_vector(fmap, exact=True)
    gamma = [["0", "1"], ["1", "0", "0"]]
    vals = [arc_measure_n(fmap, v, gamma, n) for n in range(2, 9)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert len(set(vals)) == 1


def test_arc_measure_rejects_unaligned_input():
    fmap = tent(2)
    v = tent_vector()
    with pytest.raises(UnsupportedInputError):
        arc_measure_n(fmap, v, (0.1, 0.3), 2)
    with pytest.raises(UnsupportedInputError):
        arc_measure_n(fmap, v, [["0"], ["0", "1"]], 2)
    with pytest.raises(UnsupportedInputError):
        arc_measure_n(fmap, v, [["0", "1", "1"]], 1)


def test_example_one_prefix_identity():
    # v is not summable, so the check is the finite identity sum of Delta = sum of v over the starts
    fmap = ExampleOne(3)
    v = SubEigenvector(2, fmap.eigenvector(), fmap.matrix())
    starts = ["B", "C1", "A2.3", "C5.2"]
    for n in range(10):
        assert sum(words_at_level(v, n, starts).values()) == sum(v[s] for s in starts)


def test_max_delta_nonincreasing(finite_map):
    model = exact_model(finite_map)
    prev = None
    for n in range(9):
        m = max(float(d) for d in words_at_level(model, n, finite_map.arc_ids).values())
        if prev is not None:
            assert m <= prev + 1e-15
        prev = m


# -- itineraries and cylinders -----------------------------------------------------------


def _tent_orbit_letters(x, n):
    out = []
    for _ in range(n + 1):
        out.append("0" if x < Fraction(1, 2) else "1")
        x = 2 * x if x < Fraction(1, 2) else 2 - 2 * x
    return out


def test_tent_itinerary_of_point_three():
    model = exact_model(tent(2))
    x = model.point("0", Fraction(3, 10))
    it = itinerary(model, x, 3)
    assert not it.ambiguous
    assert list(it.word.word) == _tent_orbit_letters(Fraction(3, 10), 3) == ["0", "1", "1", "0"]


def test_tent_itinerary_matches_orbit_on_random_rationals():
    model = exact_model(tent(2))
    rng = random.Random(11)
    for _ in range(50):
        x = Fraction(rng.randrange(1, 1000), 1001)
        arc = "0" if x < Fraction(1, 2) else "1"
        p = model.point(arc, x if arc == "0" else x - Fraction(1, 2))
        it = itinerary(model, p, 8)
        assert not it.ambiguous
        assert list(it.word.word) == _tent_orbit_letters(x, 8)


def test_fixed_point_gives_constant_word():
    model = exact_model(tent(2))
    it = itinerary(model, model.point("0", 0), 6)
    assert not it.ambiguous and it.word.word == ("0",) * 7


def test_partition_point_is_ambiguous():
    model = exact_model(tent(2))
    it = itinerary(model, model.point("0", Fraction(1, 2)), 4)
    assert it.ambiguous and it.at_step == 0 and set(it.candidates) == {"0", "1"}


def test_psi_examples():
    model = exact_model(tent(2))
    lo, hi = psi_cylinder(model, ["1"])
    assert (lo.offset, hi.offset) == (0, Fraction(1, 2))
    for n in range(6):
        lo, hi = psi_cylinder(model, ["0"] * (n + 1))
        assert lo == PointCoord("0", 0)
        assert hi.offset == Fraction(1, 2 ** n) / 2


def test_psi_length_equals_delta(finite_map):
    model = exact_model(finite_map)
    M = finite_map.matrix()
    for w in all_words(finite_map.arc_ids, M.successors, 4):
        lo, hi = psi_cylinder(model, w)
        assert hi.offset - lo.offset == delta(w, model)


def test_psi_nested_in_prefix(finite_map):
    model = float_model(finite_map)
    M = finite_map.matrix()
    for w in all_words(finite_map.arc_ids, M.successors, 4):
        lo, hi = psi_cylinder(model, w)
        plo, phi = psi_cylinder(model, w[:-1])
        assert plo.offset - 1e-15 <= lo.offset <= hi.offset <= phi.offset + 1e-15


def test_itinerary_psi_round_trip(finite_map):
    model = float_model(finite_map)
    rng = random.Random(5)
    lam = float(model.lam)
    vmax = max(model.lengths.values())
    n = 8
    for _ in range(100):
        a = rng.choice(model.arcs)
        x = model.point(a, rng.uniform(0.01, 0.99) * model.lengths[a])
        it = itinerary(model, x, n)
        if it.ambiguous:
            continue
        assert in_cylinder(model, it.word.word, x)
        lo, hi = psi_cylinder(model, it.word.word)
        assert hi.offset - lo.offset <= vmax * lam ** (-n) + 1e-15


def test_itinerary_agrees_with_line_realization(finite_map):
    model = float_model(finite_map)
    f, xs, arcs = realization_oracle(model)
    rng = random.Random(9)
    for _ in range(40):
        t = rng.random()
        k = min(int(sum(t >= xs[1:-1])), len(arcs) - 1)
        p = model.point(arcs[k], t - xs[k])
        it = itinerary(model, p, 10)
        letters, y = [], t
        for _ in range(11):
            letters.append(arcs[min(int(sum(y >= xs[1:-1])), len(arcs) - 1)])
            y = f(y)
        assert list(it.word.word) == letters


# -- metric ---------------------------------------------------------------------------------


def _random_point(model, rng):
    a = rng.choice(model.arcs)
    return model.point(a, rng.random() * model.lengths[a])


def test_rho_zero_on_equal_points():
    model = float_model(golden_mean())
    x = model.point("0", 0.2)
    assert float(rho_distance(model, x, x)) == 0.0


def test_rho_on_tree_arc_endpoints():
    fmap = ExplicitMarkovMap(
        GraphModel.from_triples(["o", "p", "q", "r"], [("a", "o", "p"), ("b", "o", "q"), ("c", "o", "r")]),
        {"a": [("b", FWD)], "b": [("c", FWD)], "c": [("a", FWD)]},
    )
    v = SubEigenvector(Fraction(1), {"a": Fraction(1, 3), "b": Fraction(1, 3), "c": Fraction(1, 3)},
                       fmap.matrix())
    model = build_constant_slope_model(fmap, v)
    for a in "abc":
        t, h = fmap.endpoints(a)
        r = rho_distance(model, model.vertex_point(t), model.vertex_point(h))
        assert r.exact and r.upper == pytest.approx(1 / 3, abs=1e-15)
    r = rho_distance(model, model.point("a", Fraction(1, 6)), model.point("b", Fraction(1, 12)))
    assert r.upper == pytest.approx(1 / 6 + 1 / 12, abs=1e-15)


def test_rho_on_interval_is_line_distance(finite_map):
    model = float_model(finite_map)
    rng = random.Random(2)
    for _ in range(50):
        x, y = _random_point(model, rng), _random_point(model, rng)
        assert float(rho_distance(model, x, y)) == pytest.approx(
            abs(model.position(x) - model.position(y)), abs=1e-12)


@pytest.mark.parametrize("ctor", [golden_mean, tent])
def test_rho_triangle_inequality(ctor):
    model = float_model(ctor())
    rng = random.Random(17)
    for _ in range(100):
        x, y, z = (_random_point(model, rng) for _ in range(3))
        assert float(rho_distance(model, x, z)) <= (
            float(rho_distance(model, x, y)) + float(rho_distance(model, y, z)) + 1e-12)


@pytest.mark.parametrize("ctor", [golden_mean, tent])
def test_rho_lambda_lipschitz(ctor):
    model = float_model(ctor())
    lam = float(model.lam)
    rng = random.Random(23)
    for _ in range(500):
        x, y = _random_point(model, rng), _random_point(model, rng)
        fx, fy = evaluate_model(model, x), evaluate_model(model, y)
        assert float(rho_distance(model, fx, fy)) <= lam * float(rho_distance(model, x, y)) + 1e-9


def test_algebraic_values_print_as_radicals():
    v = perron_vector(golden_mean(), exact=True)
    assert isinstance(v["0"], AlgebraicValue)
    assert "sqrt(5)" in str(v["0"])
