import itertools
from fractions import Fraction

import numpy as np
import pytest

from freechoice import causal_graphs as cg
from freechoice import lemmas
from freechoice.cones import (
    Cone,
    causal_cone,
    cone_from_json,
    cone_to_json,
    elemental_inequalities,
    fm_eliminate,
    is_implied,
    maximize,
    project,
    remove_redundant,
    shannon_cone,
)
from freechoice.errors import CapacityError, EliminationAborted
from freechoice.forms import EntropyCoordinateSpace, LinForm, entropy_form, mi_form
from freechoice.simplex import solve


# -- forms ---------------------------------------------------------------------


def test_space_columns():
    s = EntropyCoordinateSpace(("A", "B", "C"), ("t",))
    assert s.dim == 8
    assert s.column(("A",)) == 0
    assert s.column("A,C") == 4
    assert s.column(7) == 6
    assert s.column("t") == 7
    assert s.label(4) == "A,C"
    with pytest.raises(ValueError):
        s.column(0)


def test_linform_arithmetic_and_canonical():
    s = EntropyCoordinateSpace(("A", "B"))
    f = LinForm.build(s, {"A": Fraction(1, 2), "B": Fraction(3, 2)}, 1)
    g = f * 2 - f
    assert g == f
    c = f.canonical()
    assert c.terms() == {"A": 1, "B": 3}
    assert c.const == 2
    assert f.evaluate([1, 1, 0]) == 3
    with pytest.raises(TypeError):
        LinForm.build(s, {"A": 0.5})


def test_mi_form_expands():
    s = EntropyCoordinateSpace(("A", "B", "C"))
    assert mi_form(s, "A", "B", "C").terms() == {"A,C": 1, "B,C": 1, "A,B,C": -1, "C": -1}


# -- simplex ---------------------------------------------------------------------


def test_simplex_small_lp():
    # min -w0 - w1 s.t. w0 + w2 = 1, w1 + w3 = 2
    cols = [{0: 1}, {1: 1}, {0: 1}, {1: 1}]
    res = solve(cols, [1, 2], [-1, -1, 0, 0])
    assert res.status == "optimal"
    assert res.value == -3


def test_simplex_infeasible_and_unbounded():
    assert solve([{0: 1}], [-1], [0]).status == "infeasible"
    assert solve([{0: 1}, {0: 1}, {0: -1}], [1], [0, -1, 0]).status == "unbounded"


# -- Shannon cones -------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_elemental_count(n):
    s = EntropyCoordinateSpace(tuple(f"X{i}" for i in range(n)))
    expected = n + (n * (n - 1) // 2) * 2 ** (n - 2) if n > 1 else 1
    assert len(elemental_inequalities(s)) == expected


def test_shannon_cone_capacity():
    with pytest.raises(CapacityError):
        shannon_cone(8)


def _entropy_point(space, rng, n_samples=1):
    """Entropy vector of a random joint distribution over the space variables."""
    from freechoice.probtab import Distribution, entropy

    n = space.n
    t = rng.random(2 ** n)
    d = Distribution([(v, 2) for v in space.variables], t / t.sum())
    return [Fraction(entropy(d, space.subset(m))).limit_denominator(10 ** 9) for m in range(1, 2 ** n)]


def test_random_entropy_vectors_lie_in_shannon_cone():
    rng = np.random.default_rng(0)
    cone = shannon_cone(4)
    for _ in range(20):
        p = _entropy_point(cone.space, rng)
        assert cone.contains([float(x) for x in p], tol=1e-7)


def test_is_implied_examples():
    cone = shannon_cone(("X1", "X2", "X3"))
    s = cone.space
    h = lambda *v: entropy_form(s, v)  # noqa: E731
    imp = is_implied(cone, h("X1", "X2") - h("X1"))
    assert imp.implied
    assert imp.certificate.verify(cone, h("X1", "X2") - h("X1"))
    assert is_implied(cone, h("X1") + h("X2") - h("X1", "X2"))
    assert not is_implied(cone, h("X1") - h("X1", "X2"))
    # conditioning reduces entropy
    assert is_implied(cone, h("X1") - h("X1", "X2") + h("X2"))


def test_maximize_bounded_and_unbounded():
    cone = shannon_cone(2)
    s = cone.space
    f = entropy_form(s, "X1") - entropy_form(s, ("X1", "X2"))
    res = maximize(cone, f)
    assert res.optimum == 0
    assert res.certificate.verify(cone, -f)
    assert maximize(cone, entropy_form(s, "X1")).unbounded


def test_causal_cone_of_bell_implies_input_independence():
    cone = causal_cone(cg.bell())
    s = cone.space
    assert is_implied(cone, -mi_form(s, "X", "Y"))
    assert not is_implied(cone, -mi_form(s, "A", "B"))


# -- elimination -------------------------------------------------------------


def test_projecting_shannon_three_gives_shannon_two():
    cone = shannon_cone(3)
    s = cone.space
    keep = [s.column("X1"), s.column("X2"), s.column("X1,X2")]
    proj = project(cone, keep)
    small = shannon_cone(2)
    # same constraints up to the embedding: each implies the other
    embed = lambda f: LinForm.build(s, {",".join(small.space.subset(c + 1)): v  # noqa: E731
                                        for c, v in enumerate(f.coeffs) if v})
    for f in small.inequalities:
        assert is_implied(proj, embed(f))
    for f in proj.inequalities:
        assert is_implied(cone, f)


def _random_cone(rng, n_vars=4, n_ineq=9):
    s = EntropyCoordinateSpace((), tuple(f"z{i}" for i in range(n_vars)))
    forms = []
    for _ in range(n_ineq):
        coeffs = {f"z{i}": int(rng.integers(-3, 4)) for i in range(n_vars)}
        forms.append(LinForm.build(s, coeffs, int(rng.integers(0, 4))))
    # box keeps everything bounded
    for i in range(n_vars):
        forms.append(LinForm.build(s, {f"z{i}": -1}, 5))
        forms.append(LinForm.build(s, {f"z{i}": 1}, 5))
    return Cone(s, tuple(forms))


@pytest.mark.parametrize("seed", range(6))
def test_fourier_motzkin_preserves_projected_optima(seed):
    rng = np.random.default_rng(seed)
    cone = _random_cone(rng)
    s = cone.space
    try:
        maximize(cone, LinForm.zero(s))
    except ValueError:
        pytest.skip("infeasible draw")
    proj = project(cone, [s.column("z0"), s.column("z1")])
    assert all(f.coeffs[2] == 0 and f.coeffs[3] == 0 for f in proj.inequalities)
    for a, b in itertools.product(range(-2, 3), repeat=2):
        obj = LinForm.build(s, {"z0": a, "z1": b})
        assert maximize(cone, obj).optimum == maximize(proj, obj).optimum


def test_single_elimination_matches_brute_force_pairs():
    s = EntropyCoordinateSpace((), ("a", "b"))
    cone = Cone(s, (
        LinForm.build(s, {"a": 1, "b": -1}),       # a >= b
        LinForm.build(s, {"b": 1}, -1),            # b >= 1
        LinForm.build(s, {"a": -1, "b": 1}, 3),    # a <= b + 3
    ))
    out = fm_eliminate(cone, s.column("b"))
    assert {f.key() for f in out.inequalities} == {LinForm.build(s, {"a": 1}, -1).canonical().key()}


def test_remove_redundant_keeps_optimum():
    s = EntropyCoordinateSpace((), ("a", "b"))
    forms = (
        LinForm.build(s, {"a": -1}, 1),
        LinForm.build(s, {"a": -1}, 2),             # implied by the first
        LinForm.build(s, {"b": -1}, 1),
        LinForm.build(s, {"a": -1, "b": -1}, 3),    # implied by the two boxes
        LinForm.build(s, {"a": 1}),
        LinForm.build(s, {"b": 1}),
    )
    cone = Cone(s, forms)
    red = remove_redundant(cone)
    assert len(red) == 4
    obj = LinForm.build(s, {"a": 2, "b": 1})
    assert maximize(red, obj).optimum == maximize(cone, obj).optimum == 3


def test_projection_ceiling_raises():
    cone = lemmas.md_cone()
    with pytest.raises(EliminationAborted):
        project(cone, [cone.space.column("t")], max_inequalities=1)


def test_cone_json_round_trip():
    cone = causal_cone(cg.bell())
    back = cone_from_json(cone_to_json(cone), cone.space)
    assert {f.key() for f in back.inequalities} == {f.key() for f in cone.inequalities}
    assert {f.key() for f in back.equalities} == {f.key() for f in cone.equalities}


# -- the measurement-dependence cone -----------------------------------------


@pytest.fixture(scope="module")
def md():
    return lemmas.md_cone()


def test_md_cone_size(md):
    assert md.space.n == 6
    assert md.space.aux == ("t",)
    assert len(md.equalities) == 8


def test_lemma1_bounds(md):
    rep = lemmas.verify_lemma1_bounds(md)
    assert rep.passed, rep.render()
    for k in (1, 2, 3):
        assert rep.data[f"bound{k}"].optimum == 0


def test_mi_lower_and_non_implication(md):
    rep = lemmas.verify_mi_lower_bound(md)
    assert rep.passed, rep.render()


def test_lemma2():
    rep = lemmas.verify_lemma2()
    assert rep.passed, rep.render()


def test_exhibit_point_is_feasible(md):
    point = lemmas.exhibit_point(md, {"X": {0}, "Y": {1}, "Lambda": {0, 1}, "R": set()})
    # X, Y copies of Lambda's bits: feasible with t = 2
    assert md.contains(point)
    assert point[md.space.column("t")] == 2


def test_remove_redundant_respects_deadline():
    import time

    from freechoice.cones import remove_redundant
    from freechoice.errors import EliminationAborted

    cone = shannon_cone(("A", "B", "C"))
    with pytest.raises(EliminationAborted):
        remove_redundant(cone, deadline=time.monotonic() - 1)
    assert len(remove_redundant(cone, deadline=None)) <= len(cone)
