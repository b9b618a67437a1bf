import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pjp.core import State
from pjp.prediction import (BUILTIN_PR, CallablePR, DominantFirstPolyPR, FirstPolyPR,
                            LinearRegressionPR, Omega, OmegaEntry, PowerPR, PRRegistry,
                            SecondPolyPR, SinPR, StaticPR, UnknownTypeError, check_pr_consistency,
                            observed_points, pr_1st_poly, pr_2nd_poly, pr_dom_1st_poly,
                            pr_linear_reg, pr_power, pr_sin, pr_static, predict_sequence, retrieve,
                            sin_fit, view_flag_model, view_flag_samples, world_value)
from support import brute_retrieve, exact_first_poly, exact_quadratic, instance, plan_text, run_plan


def seq_of(values, v="v"):
    """``[1, None, 3]`` -> states; ``None`` entries leave ``v`` unassigned."""
    return tuple(State({} if x is None else {v: x}) for x in values)


def pts(*pairs):
    return tuple(pairs)


# ---------------------------------------------------------------------------
# retrieval


def test_retrieve_examples():
    assert retrieve(seq_of([1, None, 3]), 1, "v") == 1
    assert retrieve(seq_of([None, 3]), 0, "v") == 3
    assert retrieve(seq_of([None, None]), 1, "v") is None


def test_retrieve_skips_bottom_assignments():
    seq = (State({"v": 2}), State({"v": None}))
    assert retrieve(seq, 1, "v") == 2


def test_retrieve_empty_sequence():
    with pytest.raises(ValueError):
        retrieve((), 0, "v")


seqs = st.lists(st.one_of(st.none(), st.integers(-9, 9)), min_size=1, max_size=8)


@given(seqs, st.integers(-1, 8))
def test_retrieve_matches_set_definition(values, m):
    seq = seq_of(values)
    assert retrieve(seq, m, "v") == brute_retrieve(seq, m, "v")


@given(seqs, st.data())
def test_static_is_retrieve(values, data):
    seq = seq_of(values)
    t = data.draw(st.integers(0, len(seq) - 1))
    assert pr_static(seq, t, "v") == retrieve(seq, t, "v")


def test_static_examples():
    for values, t, want in (([1, None, 3], 1, 1), ([None, 3], 0, 3), ([None, None], 1, None)):
        assert pr_static(seq_of(values), t, "v") == want


# ---------------------------------------------------------------------------
# first-order polynomial


@pytest.fixture(scope="module")
def example1_obs():
    inst = instance("example1")
    seq = run_plan(inst, plan_text("example1"))
    return {a: inst.model.observe_seq(a, seq) for a in ("b", "c")}


def test_first_poly_example1_values(example1_obs):
    assert pr_1st_poly(example1_obs["b"], 4, "shared(sa)") == pytest.approx(19 / 3, abs=1e-9)
    assert pr_1st_poly(example1_obs["c"], 4, "shared(sa)") == pytest.approx(7, abs=1e-9)
    assert pr_1st_poly(example1_obs["b"], 7, "shared(sa)") == pytest.approx(22 / 3, abs=1e-9)
    assert pr_static(example1_obs["b"], 0, "shared(sa)") == 4


def test_first_poly_single_point():
    for t in range(3):
        assert pr_1st_poly(seq_of([None, 5, None]), t, "v") == 5


@given(st.lists(st.tuples(st.integers(0, 12), st.integers(-20, 20)), min_size=1, max_size=6,
                unique_by=lambda p: p[0]), st.integers(0, 14))
def test_first_poly_matches_exact_oracle(points, t):
    points = tuple(sorted(points))
    got = FirstPolyPR().predict(points, t)
    want = exact_first_poly(points, t)
    assert got == pytest.approx(float(want), rel=1e-9, abs=1e-9)


def test_predict_sequence_example():
    omega = Omega({"v": OmegaEntry("1st_poly")})
    out = predict_sequence(PRRegistry(), omega, seq_of([1, None, 3, None]))
    assert [s["v"] for s in out] == [1, 2, 3, 4]


def test_predict_sequence_all_static_is_retrieve():
    seq = (State({"a": 1}), State({"b": 2}), State({"a": 5}))
    out = predict_sequence(PRRegistry(), Omega.all_static(), seq)
    for t in range(3):
        for v in "ab":
            assert out[t][v] == retrieve(seq, t, v)


def test_predict_sequence_unregistered_type():
    omega = Omega({"v": OmegaEntry("wobble")})
    with pytest.raises(UnknownTypeError):
        predict_sequence(PRRegistry(), omega, seq_of([1]))


def test_predict_sequence_mixed_omega_matches_calls(example1_obs):
    inst = instance("example1")
    seq = run_plan(inst, plan_text("example1"))
    out = predict_sequence(PRRegistry(), inst.omega, seq)
    for v in ("shared(sa)", "secret(sa)", "agent_loc(c)"):
        pr = PRRegistry()[inst.omega.type_of(v)]
        for t in range(len(seq)):
            assert out[t][v] == pr(seq, t, v)


def test_augmented_input_keeps_predictions():
    pr = FirstPolyPR()
    base = pr.series(pts((0, 1), (2, 3)), 3)
    again = pr.series(pts((0, 1), (1, 2), (2, 3)), 3)
    assert base == again == [1, 2, 3, 4]


# ---------------------------------------------------------------------------
# second-order polynomial, power, sinusoid


def test_second_poly_examples():
    assert SecondPolyPR().predict(pts((0, 2), (1, 3), (2, 6)), 6) == pytest.approx(38)
    assert SecondPolyPR().predict(pts((0, 0), (1, 1), (2, 4)), 3) == pytest.approx(9)
    assert SecondPolyPR().predict(pts((0, 2), (1, 3)), 5) == 3
    assert pr_2nd_poly(seq_of([None]), 0, "v") is None


@given(st.lists(st.integers(0, 10), min_size=3, max_size=3, unique=True),
       st.lists(st.integers(-9, 9), min_size=3, max_size=3, unique=True), st.integers(0, 12))
def test_second_poly_matches_lagrange(ts, ys, t):
    points = tuple(sorted(zip(ts, ys)))
    want = exact_quadratic(points, t)
    assert SecondPolyPR().predict(points, t) == pytest.approx(float(want), rel=1e-9, abs=1e-7)


def test_second_poly_needs_three_distinct_values():
    # a constant series never yields a fit
    d = SecondPolyPR().fit(pts((0, 1), (1, 1), (2, 1)))
    assert d.used_fallback


def test_power_examples():
    assert PowerPR().predict(pts((2, 9)), 3) == 9
    assert PowerPR().predict(pts((1, 3)), 2) == pytest.approx(9)
    assert PowerPR().predict(pts((3, 8)), 4) == pytest.approx(16)
    assert pr_power(seq_of([None, None]), 1, "v") is None


@pytest.mark.parametrize("t,y", [(1, 3), (3, 8), (3, -27), (2, 9), (4, 16), (5, -32)])
def test_power_base_matches_polynomial_roots(t, y):
    roots = [r for r in np.roots([1] + [0] * (t - 1) + [-y]) if abs(r.imag) < 1e-7]
    d = PowerPR().fit(pts((t, y)))
    if len(roots) == 1:
        assert d.fitted_coefficients[0] == pytest.approx(roots[0].real)
    else:
        assert d.used_fallback


def test_power_zero_exponent_falls_back():
    d = PowerPR().fit(pts((0, 1)))
    assert d.used_fallback
    assert PowerPR().predict(pts((0, 1)), 3) == 1


def test_sin_world_rule_prediction():
    points = tuple((t, world_value("sin", (8, 5, 4), t)) for t in range(6))
    assert SinPR().predict(points, 6) == pytest.approx(8 * math.sin(34), abs=0.05)
    assert SinPR().predict(points, 6) == pytest.approx(4.23, abs=0.005)


def test_sin_fallbacks():
    assert SinPR().predict(pts((0, 2), (1, 4)), 5) == 4
    for t in range(5):
        assert SinPR().predict(pts((0, 0), (1, 0), (2, 0)), t) == pytest.approx(0, abs=1e-6)
    assert pr_sin(seq_of([None]), 0, "v") is None


def test_sin_fit_residual_oracle():
    ts = np.arange(5.0)
    ys = 2.5 * np.sin(0.7 * np.pi / 2 * ts + 0.3)
    a, b, c, res = sin_fit(tuple(zip(ts.tolist(), ys.tolist())))
    model = a * np.sin(b * np.pi / 2 * ts + c)
    assert np.sum((model - ys) ** 2) < 1e-12
    assert res < 1e-12


# ---------------------------------------------------------------------------
# regression and dominant coefficients

EXAMPLE2 = pts((1, 4), (3, 6), (5, 8), (8, 20))


def test_linear_reg_examples():
    assert LinearRegressionPR().predict(EXAMPLE2, 9) == pytest.approx(20.24, abs=0.01)
    assert LinearRegressionPR().predict(pts((0, 0), (1, 2)), 5) == pytest.approx(10)
    assert LinearRegressionPR().predict(pts((0, 4), (3, 4), (7, 4)), 11) == pytest.approx(4)


def test_linear_reg_matches_numpy():
    rng = random.Random(3)
    for _ in range(50):
        ts = sorted(rng.sample(range(20), rng.randint(2, 8)))
        ys = [rng.uniform(-10, 10) for _ in ts]
        slope, icpt = np.polyfit(ts, ys, 1)
        got = LinearRegressionPR().fit(tuple(zip(ts, ys))).fitted_coefficients
        assert got == pytest.approx((slope, icpt), rel=1e-9, abs=1e-9)


def test_linear_reg_point_on_line_is_stationary():
    pr = LinearRegressionPR()
    a, b = pr.fit(EXAMPLE2).fitted_coefficients
    more = tuple(sorted(EXAMPLE2 + ((10, a * 10 + b),)))
    assert pr.fit(more).fitted_coefficients == pytest.approx((a, b), abs=1e-9)


def _brute_dominant(points):
    counts = {}
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            (t1, y1), (t2, y2) = points[i], points[j]
            a = Fraction(y2 - y1, t2 - t1)
            key = (a, y1 - a * t1)
            counts[key] = counts.get(key, 0) + 1
    best = max(counts.values())
    return min(k for k, c in counts.items() if c == best), best


def test_dom_first_poly_example():
    assert DominantFirstPolyPR().predict(EXAMPLE2, 9) == pytest.approx(12)
    assert _brute_dominant(EXAMPLE2) == ((1, 3), 3)


@given(st.lists(st.tuples(st.integers(0, 9), st.integers(-5, 5)), min_size=2, max_size=6,
                unique_by=lambda p: p[0]))
def test_dom_first_poly_matches_pair_enumeration(points):
    points = tuple(sorted(points))
    (a, b), _ = _brute_dominant(points)
    assert DominantFirstPolyPR().fit(points).fitted_coefficients == pytest.approx(
        (float(a), float(b)), abs=1e-9)


def test_dom_collinear_equals_first_poly_line():
    points = pts((0, 1), (2, 5), (3, 7), (6, 13))
    for t in range(9):
        assert DominantFirstPolyPR().predict(points, t) == pytest.approx(FirstPolyPR().predict(points, t))


def test_dom_tie_break_is_smallest_coefficients():
    # three pairs, three classes of one pair each
    points = pts((0, 0), (1, 1), (2, 0))
    (a, b), _ = _brute_dominant(points)
    assert DominantFirstPolyPR().fit(points).fitted_coefficients == pytest.approx((float(a), float(b)))
    assert (a, b) == (-1, 2)


def test_wrappers_agree_with_classes():
    seq = seq_of([1, None, 4, None, 16])
    for fn, cls in ((pr_linear_reg, LinearRegressionPR), (pr_dom_1st_poly, DominantFirstPolyPR)):
        assert fn(seq, 3, "v") == cls()(seq, 3, "v")


# ---------------------------------------------------------------------------
# diagnostics, omega, registry


def test_fit_diagnostics_fallback_flag():
    assert FirstPolyPR().fit(pts((0, 1))).used_fallback
    assert not FirstPolyPR().fit(pts((0, 1), (1, 2))).used_fallback
    assert StaticPR().fit(pts((0, 1), (1, 2))).used_fallback
    d = SecondPolyPR().fit(pts((0, 2), (1, 3), (2, 6)))
    assert not d.used_fallback and d.fitted_coefficients == pytest.approx((1, 0, 2))


def test_omega_arity():
    OmegaEntry("1st_poly", (1.0, 2.0), (None, None))
    with pytest.raises(ValueError):
        OmegaEntry("2nd_poly", (1.0, 2.0))
    with pytest.raises(ValueError):
        OmegaEntry("static", (1.0,))


def test_world_values_match_goal_constants():
    assert world_value("1st_poly", (1, 3), 2) == 5
    assert world_value("2nd_poly", (1, 0, 2), 6) == 38
    assert world_value("power", (3,), 2) == 9
    assert round(world_value("sin", (8, 5, 4), 6), 2) == 4.23


def test_registry_register_and_override():
    reg = PRRegistry()
    assert set(reg.names()) == set(BUILTIN_PR)
    swapped = reg.with_overrides({"1st_poly": "dom_1st_poly"})
    assert swapped["1st_poly"].name == "dom_1st_poly"
    assert reg["1st_poly"].name == "1st_poly"
    custom = reg.register("mine", CallablePR("mine", lambda p, t: 0))
    assert "mine" in custom and "mine" not in reg
    with pytest.raises(UnknownTypeError):
        reg["mine"]


# ---------------------------------------------------------------------------
# consistency harness


def _samples(rng, count):
    out = []
    for _ in range(count):
        n = rng.randint(1, 8)
        k = rng.choice([1, 2, 3])
        out.append(seq_of([None if rng.random() < 0.4 else round(rng.uniform(-5, 5) * k, 1)
                           for _ in range(n)]))
    return out


@pytest.mark.parametrize("name", sorted(set(BUILTIN_PR) - {"sin"}))
def test_builtin_compulsory_properties(name):
    rep = check_pr_consistency(PRRegistry()[name], _samples(random.Random(7), 200))
    assert rep.preserving.passed, rep.preserving.witness
    assert rep.recursive.passed, rep.recursive.witness
    assert rep.recursive.checked > 0


def test_static_reconstructive_on_view_flag_model():
    model = view_flag_model(("i", "j"), ("x", "y"))
    rep = check_pr_consistency(StaticPR(), view_flag_samples(random.Random(0), 100), model=model)
    assert rep.reconstructive.passed is True and rep.compulsory_ok


def test_first_poly_recursive_example():
    rep = check_pr_consistency(FirstPolyPR(), [seq_of([1, None, 3, None])], supersets=20)
    assert rep.compulsory_ok


def test_broken_pr_gives_preserving_witness():
    broken = CallablePR("broken", lambda points, t: t)
    rep = check_pr_consistency(broken, [seq_of([5, None, 7])])
    assert rep.preserving.passed is False
    seq, v, t, y, got = rep.preserving.witness
    assert y != got


def test_harness_rejects_empty_samples():
    with pytest.raises(ValueError):
        check_pr_consistency(StaticPR(), [])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.one_of(st.none(), st.integers(-6, 6)), min_size=1, max_size=7))
def test_preserving_for_every_builtin(values):
    seq = seq_of(values)
    points = observed_points(seq, "v")
    for cls in BUILTIN_PR.values():
        out = cls().series(points, len(seq) - 1)
        for t, y in points:
            assert out[t] == y
